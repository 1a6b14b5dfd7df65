#pragma once

// Verification reports: a fixed-order list of named residual checks plus
// classification verdicts and fitted constants, rendered either as a human
// text table (3 significant digits) or as JSON (17 significant digits, for
// golden-file comparisons).  Rendering is deterministic: same report state,
// same bytes.

#include <cstdio>
#include <string>
#include <utility>
#include <vector>

namespace rsm {

struct CheckEntry {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    std::string verdict;  // "pass" | "fail" | "not_applicable" | "info"
    std::string note;
};

namespace detail {

inline std::string num17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}
inline std::string num3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}
inline std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 8);
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", ch);
                    out += buf;
                } else {
                    out += ch;
                }
        }
    }
    return out;
}

} // namespace detail

struct VerificationReport {
    std::string label;
    int chart_dim = 0;
    int ambient_dim = 0;
    std::vector<int> grid_sizes;
    long long grid_points = 0;
    double tol_exact = 0.0, tol_third = 0.0, tol_class = 0.0;

    bool conic = false, spherical = false, proper = false, rectifying = false;
    std::string classification;

    std::vector<CheckEntry> entries;
    std::vector<std::pair<std::string, double>> fitted;  // insertion-ordered
    std::vector<std::string> notes;

    bool verified() const {
        if (!(proper && rectifying)) return false;
        for (const auto& e : entries)
            if (e.verdict == "fail") return false;
        return true;
    }

    const CheckEntry* find(const std::string& name) const {
        for (const auto& e : entries)
            if (e.name == name) return &e;
        return nullptr;
    }

    std::string to_text() const {
        std::string out;
        out += "immersion: " + label + "\n";
        out += "chart dim " + std::to_string(chart_dim) + " -> ambient dim " +
               std::to_string(ambient_dim) + "\n";
        out += "grid:";
        for (std::size_t i = 0; i < grid_sizes.size(); ++i)
            out += (i ? " x " : " ") + std::to_string(grid_sizes[i]);
        out += " (" + std::to_string(grid_points) + " points)\n";
        // Sampling certifies the grid, not the whole chart; say so for the
        // quantifier-carrying verdict.
        out += "classification: " + classification +
               (proper && rectifying ? " (on sampled grid)" : "") + "\n";
        out += "verdict: " + std::string(verified() ? "PASS" : "FAIL") + "\n";
        if (!fitted.empty()) {
            out += "fitted constants:";
            for (std::size_t i = 0; i < fitted.size(); ++i)
                out += (i ? ", " : " ") + fitted[i].first + " = " + detail::num3(fitted[i].second);
            out += "\n";
        }
        out += "checks:\n";
        for (const auto& e : entries) {
            std::string tag = e.verdict == "not_applicable" ? "n/a " : e.verdict;
            while (tag.size() < 4) tag += ' ';
            std::string name = e.name;
            while (name.size() < 36) name += ' ';
            out += "  [" + tag + "] " + name;
            if (e.verdict == "not_applicable") {
                out += " -";
            } else {
                out += " value " + detail::num3(e.value);
                if (e.verdict != "info") out += "  tol " + detail::num3(e.tolerance);
            }
            if (!e.note.empty()) out += "  (" + e.note + ")";
            out += "\n";
        }
        for (const auto& n : notes) out += "note: " + n + "\n";
        return out;
    }

    std::string to_json() const {
        using detail::json_escape;
        using detail::num17;
        std::string out = "{\n";
        out += "  \"label\": \"" + json_escape(label) + "\",\n";
        out += "  \"chart_dim\": " + std::to_string(chart_dim) + ",\n";
        out += "  \"ambient_dim\": " + std::to_string(ambient_dim) + ",\n";
        out += "  \"grid\": [";
        for (std::size_t i = 0; i < grid_sizes.size(); ++i)
            out += (i ? ", " : "") + std::to_string(grid_sizes[i]);
        out += "],\n";
        out += "  \"grid_points\": " + std::to_string(grid_points) + ",\n";
        out += "  \"tolerances\": {\"exact\": " + num17(tol_exact) +
               ", \"third_order\": " + num17(tol_third) +
               ", \"classification\": " + num17(tol_class) + "},\n";
        out += "  \"classification\": \"" + json_escape(classification) + "\",\n";
        out += std::string("  \"conic\": ") + (conic ? "true" : "false") + ",\n";
        out += std::string("  \"spherical\": ") + (spherical ? "true" : "false") + ",\n";
        out += std::string("  \"proper\": ") + (proper ? "true" : "false") + ",\n";
        out += std::string("  \"rectifying\": ") + (rectifying ? "true" : "false") + ",\n";
        out += std::string("  \"verified\": ") + (verified() ? "true" : "false") + ",\n";
        out += "  \"fitted\": {";
        for (std::size_t i = 0; i < fitted.size(); ++i)
            out += (i ? ", " : "") + ("\"" + json_escape(fitted[i].first) + "\": " +
                                      num17(fitted[i].second));
        out += "},\n";
        out += "  \"entries\": [\n";
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const auto& e = entries[i];
            out += "    {\"name\": \"" + json_escape(e.name) + "\", \"value\": ";
            out += e.verdict == "not_applicable" ? "null" : num17(e.value);
            out += ", \"tolerance\": " + num17(e.tolerance);
            out += ", \"verdict\": \"" + e.verdict + "\"";
            if (!e.note.empty()) out += ", \"note\": \"" + json_escape(e.note) + "\"";
            out += i + 1 < entries.size() ? "},\n" : "}\n";
        }
        out += "  ],\n";
        out += "  \"notes\": [";
        for (std::size_t i = 0; i < notes.size(); ++i)
            out += (i ? ", " : "") + ("\"" + json_escape(notes[i]) + "\"");
        out += "]\n";
        out += "}\n";
        return out;
    }
};

} // namespace rsm

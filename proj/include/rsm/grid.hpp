#pragma once

// Deterministic sample grids over chart boxes, plus a data-parallel loop whose
// output layout is independent of the number of worker threads.

#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "rsm/errors.hpp"

namespace rsm {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
};

// Uniform lexicographic grid (first variable slowest), shrunk a fixed fraction
// from each boundary so samples stay interior to the chart.
class Grid {
public:
    Grid() = default;
    Grid(std::vector<Interval> box, std::vector<int> sizes, double shrink = 0.05)
        : box_(std::move(box)), sizes_(std::move(sizes)), shrink_(shrink) {
        if (box_.empty() || box_.size() != sizes_.size())
            throw InvalidArgument("grid: box and size lists must match and be non-empty");
        total_ = 1;
        for (std::size_t i = 0; i < sizes_.size(); ++i) {
            if (sizes_[i] < 2)
                throw InvalidArgument("grid: need at least 2 points per dimension, got " +
                                      std::to_string(sizes_[i]));
            if (!(box_[i].length() > 0.0))
                throw InvalidArgument("grid: empty interval in dimension " + std::to_string(i));
            total_ *= sizes_[i];
        }
    }

    // Default: 9 points per dimension unless explicit sizes are given.
    static Grid regular(std::span<const Interval> box, std::vector<int> sizes = {}) {
        std::vector<int> s = std::move(sizes);
        if (s.empty()) s.assign(box.size(), 9);
        if (s.size() == 1 && box.size() > 1) s.assign(box.size(), s[0]);
        return Grid(std::vector<Interval>(box.begin(), box.end()), std::move(s));
    }

    int dim() const { return static_cast<int>(sizes_.size()); }
    int total() const { return total_; }
    const std::vector<int>& sizes() const { return sizes_; }
    const std::vector<Interval>& box() const { return box_; }
    double shrink() const { return shrink_; }

    std::vector<double> point(int flat) const {
        std::vector<double> p(sizes_.size());
        for (int d = dim() - 1; d >= 0; --d) {
            const int i = flat % sizes_[static_cast<std::size_t>(d)];
            flat /= sizes_[static_cast<std::size_t>(d)];
            const auto& iv = box_[static_cast<std::size_t>(d)];
            const double frac =
                shrink_ + (1.0 - 2.0 * shrink_) * static_cast<double>(i) /
                              static_cast<double>(sizes_[static_cast<std::size_t>(d)] - 1);
            p[static_cast<std::size_t>(d)] = iv.lo + frac * iv.length();
        }
        return p;
    }

private:
    std::vector<Interval> box_;
    std::vector<int> sizes_;
    double shrink_ = 0.05;
    int total_ = 0;
};

// Runs fn(i) for i in [0, total) across `jobs` threads in fixed contiguous
// chunks.  Results must be written to preallocated per-index slots; the first
// exception (by chunk order) is rethrown after all threads join, so failure
// behavior is deterministic too.
inline void parallel_for_index(int total, int jobs, const std::function<void(int)>& fn) {
    jobs = std::max(1, jobs);
    if (jobs == 1 || total <= 1) {
        for (int i = 0; i < total; ++i) fn(i);
        return;
    }
    jobs = std::min(jobs, total);
    const int chunk = (total + jobs - 1) / jobs;
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs), nullptr);
    for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([&, w] {
            const int begin = w * chunk;
            const int end = std::min(total, begin + chunk);
            try {
                for (int i = begin; i < end; ++i) fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : workers) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace rsm

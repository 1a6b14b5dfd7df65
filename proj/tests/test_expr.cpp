#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "rsm/expr.hpp"

namespace dsl = rsm::dsl;

TEST_CASE("helix spec parses and evaluates") {
    const auto spec =
        dsl::parse_immersion("dim 1 -> 3; x = [3*cos(s), 3*sin(s), 4*s]; s in [0, 6.28]");
    REQUIRE(spec.chart_dim == 1);
    REQUIRE(spec.ambient_dim == 3);
    REQUIRE(spec.var_names == std::vector<std::string>{"s"});
    CHECK(spec.domain[0][0] == 0.0);
    CHECK(spec.domain[0][1] == 6.28);

    const double p[] = {0.0};
    const auto jets = dsl::eval_spec(spec, p, 1);
    REQUIRE(jets.size() == 3);
    CHECK(jets[0].value() == 3.0);
    CHECK(jets[1].value() == 0.0);
    CHECK(jets[2].value() == 0.0);
    CHECK(jets[0].d1(0) == 0.0);
    CHECK(jets[1].d1(0) == 3.0);
    CHECK(jets[2].d1(0) == 4.0);
}

TEST_CASE("power rule through the immersion-spec evaluator") {
    const auto spec = dsl::parse_immersion("dim 1 -> 1\nx = [s^2]\ns in [-3, 3]");
    const double p[] = {2.0};
    const auto jets = dsl::eval_spec(spec, p, 2);
    CHECK(jets[0].value() == 4.0);
    CHECK(jets[0].d1(0) == 4.0);
    CHECK(jets[0].d2(0, 0) == 2.0);
}

TEST_CASE("unclosed bracket reports a span inside the text") {
    try {
        dsl::parse_immersion("dim 2 -> 3\nx = [cos(u2)");
        FAIL("expected a parse error");
    } catch (const dsl::ParseError& e) {
        CHECK(e.span().line == 2);
        CHECK(e.span().col >= 5);
        CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("]"));
    }
}

TEST_CASE("name and arity errors carry spans") {
    try {
        dsl::parse_immersion("dim 1 -> 1\nx = [q + 1]\ns in [0, 1]");
        FAIL("expected a parse error");
    } catch (const dsl::ParseError& e) {
        CHECK(e.message() == "unknown identifier 'q'");
        CHECK(e.span().line == 2);
        CHECK(e.span().col == 6);
    }
    CHECK_THROWS_WITH(dsl::parse_immersion("dim 1 -> 1\nx = [sin(s, s)]\ns in [0, 1]"),
                      Catch::Matchers::ContainsSubstring("expects 1 argument"));
    CHECK_THROWS_WITH(dsl::parse_immersion("dim 1 -> 1\nx = [foo(s)]\ns in [0, 1]"),
                      Catch::Matchers::ContainsSubstring("unknown function 'foo'"));
    CHECK_THROWS_WITH(dsl::parse_immersion("dim 1 -> 1\nx = [pow(s, s)]\ns in [0, 1]"),
                      Catch::Matchers::ContainsSubstring("numeric literal"));
    CHECK_THROWS_WITH(dsl::parse_immersion("dim 1 -> 2\nx = [s]\ns in [0, 1]"),
                      Catch::Matchers::ContainsSubstring("component list has 1 entries"));
    CHECK_THROWS_WITH(dsl::parse_immersion("dim 1 -> 1\nx = [s]\ns in [1, 1]"),
                      Catch::Matchers::ContainsSubstring("positive length"));
    CHECK_THROWS_WITH(dsl::parse_immersion("dim 1 -> 1\nx = [s]"),
                      Catch::Matchers::ContainsSubstring("missing domain"));
}

TEST_CASE("constants fold and pi is built in") {
    const auto spec = dsl::parse_immersion(
        "dim 1 -> 2\nconst a = 2*pi\nx = [a*s, s]\ns in [-pi, pi]");
    REQUIRE(spec.constants.size() == 1);
    CHECK(spec.constants[0].second == Catch::Approx(2.0 * M_PI));
    CHECK(spec.domain[0][0] == Catch::Approx(-M_PI));
    const double p[] = {0.5};
    const auto jets = dsl::eval_spec(spec, p, 0);
    CHECK(jets[0].value() == Catch::Approx(M_PI));
}

TEST_CASE("variable aliases replace the default names") {
    const auto spec = dsl::parse_immersion(
        "dim 2 -> 2\nvars a,b\nx = [a + b, a - b]\na in [0, 1]\nb in [0, 1]");
    CHECK(spec.var_names == std::vector<std::string>{"a", "b"});
    const double p[] = {0.25, 0.5};
    const auto jets = dsl::eval_spec(spec, p, 1);
    CHECK(jets[0].value() == 0.75);
    CHECK(jets[1].value() == -0.25);
    CHECK(jets[1].d1(1) == -1.0);
}

TEST_CASE("chart arclength flag survives parse and print") {
    const auto spec = dsl::parse_immersion(
        "dim 1 -> 2\nchart arclength\nx = [cos(s), sin(s)]\ns in [0, 6]");
    CHECK(spec.arclength_chart);
    const auto printed = dsl::print_spec(spec);
    CHECK_THAT(printed, Catch::Matchers::ContainsSubstring("chart arclength"));
    CHECK(dsl::parse_immersion(printed).arclength_chart);
}

TEST_CASE("evaluation errors surface the failing component and domain violations") {
    const auto spec = dsl::parse_immersion("dim 1 -> 2\nx = [s, log(-s)]\ns in [0.5, 2]");
    const double inside[] = {1.0};
    CHECK_THROWS_WITH(dsl::eval_spec(spec, inside, 1),
                      Catch::Matchers::ContainsSubstring("component 2"));
    const double outside[] = {3.0};
    CHECK_THROWS_WITH(dsl::eval_spec(spec, outside, 1),
                      Catch::Matchers::ContainsSubstring("outside declared domain"));
}

TEST_CASE("spec evaluation matches an independently coded closed form") {
    const auto spec = dsl::parse_immersion(
        "dim 2 -> 3\n"
        "x = [(2 + cos(u2))*cos(s), (2 + cos(u2))*sin(s), sin(u2)]\n"
        "s in [-pi, pi]\nu2 in [-pi, pi]");
    std::mt19937 rng(99412);
    std::uniform_real_distribution<double> angle(-3.1, 3.1);
    for (int trial = 0; trial < 100; ++trial) {
        const double s = angle(rng), u = angle(rng);
        const double p[] = {s, u};
        const auto jets = dsl::eval_spec(spec, p, 0);
        const long double sl = s, ul = u;
        CHECK(jets[0].value() ==
              Catch::Approx(static_cast<double>((2.0L + std::cos(ul)) * std::cos(sl))).margin(1e-12));
        CHECK(jets[1].value() ==
              Catch::Approx(static_cast<double>((2.0L + std::cos(ul)) * std::sin(sl))).margin(1e-12));
        CHECK(jets[2].value() == Catch::Approx(static_cast<double>(std::sin(ul))).margin(1e-12));
    }
}

TEST_CASE("evaluation is bitwise deterministic") {
    const auto spec = dsl::parse_immersion(
        "dim 2 -> 3\nx = [s*cos(u2), s*sin(u2), s/(1 + u2^2)]\ns in [0.5, 2]\nu2 in [-1, 1]");
    const double p[] = {1.3, 0.4};
    const auto a = dsl::eval_spec(spec, p, 3);
    const auto b = dsl::eval_spec(spec, p, 3);
    for (std::size_t c = 0; c < a.size(); ++c) {
        CHECK(a[c].value() == b[c].value());
        CHECK(a[c].d3(0, 0, 1) == b[c].d3(0, 0, 1));
    }
}

// --- round-trip property ---------------------------------------------------

namespace {

const std::vector<std::string> kVars = {"s", "u2"};
const std::map<std::string, double> kConsts = {{"a", 1.7}};

dsl::ExprPtr make_node(dsl::NodeKind kind) {
    auto e = std::make_shared<dsl::Expr>();
    e->kind = kind;
    return e;
}

dsl::ExprPtr random_expr(std::mt19937& rng, int depth) {
    std::uniform_int_distribution<int> leaf_pick(0, 3);
    std::uniform_int_distribution<int> node_pick(0, 4);
    std::uniform_real_distribution<double> num(0.0, 8.0);
    if (depth == 0 || rng() % 4 == 0) {
        switch (leaf_pick(rng)) {
            case 0: {
                auto e = std::const_pointer_cast<dsl::Expr>(make_node(dsl::NodeKind::Number));
                e->number = num(rng);
                return e;
            }
            case 1: {
                auto e = std::const_pointer_cast<dsl::Expr>(make_node(dsl::NodeKind::Variable));
                e->var_index = static_cast<int>(rng() % kVars.size());
                e->name = kVars[static_cast<std::size_t>(e->var_index)];
                return e;
            }
            case 2: {
                auto e = std::const_pointer_cast<dsl::Expr>(make_node(dsl::NodeKind::Constant));
                e->name = "pi";
                e->const_value = M_PI;
                return e;
            }
            default: {
                auto e = std::const_pointer_cast<dsl::Expr>(make_node(dsl::NodeKind::Constant));
                e->name = "a";
                e->const_value = 1.7;
                return e;
            }
        }
    }
    switch (node_pick(rng)) {
        case 0: {
            auto e = std::const_pointer_cast<dsl::Expr>(make_node(dsl::NodeKind::Negate));
            e->args.push_back(random_expr(rng, depth - 1));
            return e;
        }
        case 1: {
            auto e = std::const_pointer_cast<dsl::Expr>(make_node(dsl::NodeKind::Binary));
            e->op = static_cast<dsl::BinaryOp>(rng() % 4);
            e->args.push_back(random_expr(rng, depth - 1));
            e->args.push_back(random_expr(rng, depth - 1));
            return e;
        }
        case 2: {
            auto e = std::const_pointer_cast<dsl::Expr>(make_node(dsl::NodeKind::Power));
            static const double exps[] = {-3, -2, -1, 0, 1, 2, 3, 0.5, 1.5, -0.5, 2.25};
            e->number = exps[rng() % std::size(exps)];
            e->args.push_back(random_expr(rng, depth - 1));
            return e;
        }
        default: {
            auto e = std::const_pointer_cast<dsl::Expr>(make_node(dsl::NodeKind::Call));
            static const std::pair<const char*, dsl::Func> funcs[] = {
                {"sin", dsl::Func::Sin},   {"cos", dsl::Func::Cos}, {"tan", dsl::Func::Tan},
                {"atan", dsl::Func::Atan}, {"sqrt", dsl::Func::Sqrt}, {"exp", dsl::Func::Exp},
                {"log", dsl::Func::Log}};
            const auto& [name, func] = funcs[rng() % std::size(funcs)];
            e->name = name;
            e->func = func;
            e->args.push_back(random_expr(rng, depth - 1));
            return e;
        }
    }
}

} // namespace

TEST_CASE("pretty-print then parse is the identity on random ASTs") {
    std::mt19937 rng(31337);
    for (int trial = 0; trial < 300; ++trial) {
        const auto original = random_expr(rng, 4);
        const std::string printed = dsl::pretty_print(*original);
        CAPTURE(trial, printed);
        const auto reparsed = dsl::parse_expression(printed, kVars, kConsts);
        CHECK(dsl::structural_equal(*original, *reparsed));
        // And printing is a fixpoint from the first print on.
        CHECK(dsl::pretty_print(*reparsed) == printed);
    }
}

TEST_CASE("whole-spec print then parse preserves everything") {
    const auto spec = dsl::parse_immersion(
        "dim 2 -> 4\n"
        "chart arclength\n"
        "const c = 1.25\n"
        "x = [sqrt(s^2 + c^2), s*cos(u2), s*sin(u2), -s/(2 + cos(u2))]\n"
        "s in [0.4, 2]\n"
        "u2 in [-pi, pi]\n");
    const auto reparsed = dsl::parse_immersion(dsl::print_spec(spec));
    CHECK(reparsed.chart_dim == spec.chart_dim);
    CHECK(reparsed.ambient_dim == spec.ambient_dim);
    CHECK(reparsed.arclength_chart == spec.arclength_chart);
    CHECK(reparsed.constants == spec.constants);
    CHECK(reparsed.domain == spec.domain);
    REQUIRE(reparsed.components.size() == spec.components.size());
    for (std::size_t c = 0; c < spec.components.size(); ++c)
        CHECK(dsl::structural_equal(*spec.components[c], *reparsed.components[c]));
    CHECK(dsl::print_spec(reparsed) == dsl::print_spec(spec));
}

TEST_CASE("parse errors for structurally broken files") {
    CHECK_THROWS_AS(dsl::parse_immersion("x = [1]\ns in [0,1]"), dsl::ParseError);
    CHECK_THROWS_AS(dsl::parse_immersion("dim 0 -> 2\nx = [1, 1]"), dsl::ParseError);
    CHECK_THROWS_AS(dsl::parse_immersion("dim 2 -> 1\nx = [s]"), dsl::ParseError);
    CHECK_THROWS_AS(dsl::parse_immersion("dim 1 -> 1\nx = [s]\ns in [0, 1]\ns in [0, 2]"),
                    dsl::ParseError);
    CHECK_THROWS_AS(dsl::parse_immersion("dim 1 -> 1\nvars x\nx = [x]\nx in [0, 1]"),
                    dsl::ParseError);
    CHECK_THROWS_AS(dsl::parse_immersion("dim 1 -> 1\nx = [s $ 2]\ns in [0, 1]"),
                    dsl::ParseError);
}

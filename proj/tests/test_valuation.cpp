#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mrfmech/valuation.hpp"
#include "support.hpp"

using namespace mrfmech;

namespace {

Mrf iid_uniform_pair() {  // two independent coordinates, two labels each
    Mrf m;
    m.supports = {{"lo", "hi"}, {"lo", "hi"}};
    m.vertex_potentials = {{0, 0}, {0, 0}};
    return m;
}

SetValuation additive12() {
    SetValuation g;
    g.kind = ValuationKind::additive;
    g.singleton = {{1.0, 2.0}, {1.0, 2.0}};
    return g;
}

SetValuation table_from_min(double scale, std::vector<std::vector<double>> singles) {
    std::mt19937_64 dummy(1);
    SetValuation g;
    g.kind = ValuationKind::subadditive_table;
    g.singleton = singles;
    std::vector<int> rad;
    for (auto& s : singles) rad.push_back(static_cast<int>(s.size()) + 1);
    ProductSpace sets(rad);
    g.full_table.resize(sets.count);
    std::vector<int> u(rad.size());
    for (std::size_t idx = 0; idx < sets.count; ++idx) {
        sets.decode(idx, u);
        double add = 0.0, mx = 0.0;
        for (std::size_t i = 0; i < rad.size(); ++i)
            if (u[i] > 0) {
                add += singles[i][static_cast<std::size_t>(u[i]) - 1];
                mx = std::max(mx, singles[i][static_cast<std::size_t>(u[i]) - 1]);
            }
        g.full_table[idx] = std::min(add, scale * mx);
    }
    return g;
}

}  // namespace

TEST_CASE("value: class-appropriate evaluation") {
    SetValuation add = additive12();
    std::vector<std::pair<int, int>> both = {{0, 0}, {1, 1}};
    CHECK(value(add, both) == doctest::Approx(3.0));  // 1 + 2

    SetValuation ud = add;
    ud.kind = ValuationKind::unit_demand;
    CHECK(value(ud, both) == doctest::Approx(2.0));  // max(1,2)

    auto tab = table_from_min(1.5, {{1.0, 2.0}, {1.0, 2.0}});
    CHECK(value(tab, both) == doctest::Approx(std::min(3.0, 1.5 * 2.0)));
    std::vector<std::pair<int, int>> bad = {{0, 0}, {0, 1}};
    CHECK_THROWS(value(tab, bad));  // two types for one item
}

TEST_CASE("validate_class: additive and unit-demand pass, bad table fails with witness") {
    CHECK(validate_class(additive12()).pass);
    SetValuation ud = additive12();
    ud.kind = ValuationKind::unit_demand;
    CHECK(validate_class(ud).pass);

    // g({a})=1, g({b})=1, g({a,b})=3 violates subadditivity
    SetValuation bad;
    bad.kind = ValuationKind::subadditive_table;
    bad.singleton = {{1.0}, {1.0}};
    bad.full_table = {0.0, 1.0, 1.0, 3.0};
    auto rep = validate_class(bad);
    CHECK(!rep.pass);
    CHECK(!rep.violation.empty());
}

TEST_CASE("validate_class: generated min-mixture tables always pass") {
    std::mt19937_64 rng(31337);
    for (int t = 0; t < 30; ++t) {
        auto m = testsupport::random_mrf(rng, 2, 4, 2, 3, 1.0);
        auto g = gen::random_valuation(rng, ValuationKind::subadditive_table, m.radices());
        CAPTURE(t);
        CHECK(validate_class(g).pass);
    }
}

TEST_CASE("restrict: empty set, full set, and additive marginal expectation") {
    auto d = make_distribution(iid_uniform_pair(), additive12());
    CHECK(val(restrict(d, 0u)) == doctest::Approx(0.0));
    CHECK(val(restrict(d, d.items)) == doctest::Approx(val(d)));
    CHECK(val(restrict(d, 1u)) == doctest::Approx(1.5));  // E[g(t_0)]
}

TEST_CASE("val: additive 3, unit-demand 1.75, empty 0") {
    auto d = make_distribution(iid_uniform_pair(), additive12());
    CHECK(val(d) == doctest::Approx(3.0).epsilon(1e-12));
    auto ud = d;
    ud.g.kind = ValuationKind::unit_demand;
    CHECK(val(ud) == doctest::Approx(1.75).epsilon(1e-12));  // 1*1/4 + 2*3/4
    CHECK(val(restrict(d, 0u)) == doctest::Approx(0.0));
}

TEST_CASE("condition_on_tail: threshold extremes and exact conditional") {
    Mrf m;  // correlated pair, beta = ln 2
    m.supports = {{"0", "1"}, {"0", "1"}};
    m.vertex_potentials = {{0, 0}, {0, 0}};
    m.edges.push_back({{0, 1}, agree_disagree_table(m.supports[0], m.supports[1], std::log(2.0))});
    auto d = make_distribution(m, additive12());

    std::vector<double> never = {kInf, kInf};
    auto same = condition_on_tail(d, never, 0u);
    CHECK(val(same) == doctest::Approx(val(d)).epsilon(1e-12));

    std::vector<double> always = {0.0, 0.0};
    auto allt = condition_on_tail(d, always, d.items);
    CHECK(val(allt) == doctest::Approx(val(d)).epsilon(1e-12));

    // mid threshold 2: tail = items with label "hi"; condition on T = {0}
    std::vector<double> mid = {2.0, 2.0};
    auto c = condition_on_tail(d, mid, 1u);
    // only outcome (1,0) has T={0}: v = 2 + 1 = 3
    CHECK(val(c) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK_THROWS(condition_on_tail(d, never, 3u));  // impossible tail
}

TEST_CASE("condition_on_tail: law of total expectation over feasible tails") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 10; ++t) {
        auto m = testsupport::random_mrf(rng, 2, 3, 2, 3, 1.0);
        auto g = gen::random_valuation(rng, ValuationKind::additive, m.radices());
        auto d = make_distribution(m, g);
        std::vector<double> thr(static_cast<std::size_t>(d.joint.n()), 2.0);
        double total = 0.0;
        std::vector<int> outcome(static_cast<std::size_t>(d.joint.n()));
        std::vector<double> pr_tail(1u << d.joint.n(), 0.0);
        for (std::size_t idx = 0; idx < d.joint.size(); ++idx) {
            d.joint.space.decode(idx, outcome);
            pr_tail[tail_set(d, thr, outcome)] += d.joint.p[idx];
        }
        for (std::uint32_t a = 0; a < (1u << d.joint.n()); ++a) {
            if (pr_tail[a] <= 0.0) continue;
            total += pr_tail[a] * val(condition_on_tail(d, thr, a));
        }
        CAPTURE(t);
        CHECK(total == doctest::Approx(val(d)).epsilon(1e-9));
    }
}

TEST_CASE("additive restriction is complementary: val(S) + val(S^c) = val") {
    std::mt19937_64 rng(9);
    for (int t = 0; t < 10; ++t) {
        auto m = testsupport::random_mrf(rng, 2, 4, 2, 3, 1.0);
        auto g = gen::random_valuation(rng, ValuationKind::additive, m.radices());
        auto d = make_distribution(m, g);
        for (std::uint32_t s = 0; s <= d.items; ++s) {
            if ((s & ~d.items) != 0) continue;
            CHECK(val(restrict(d, s)) + val(restrict(d, d.items & ~s)) ==
                  doctest::Approx(val(d)).epsilon(1e-9));
        }
    }
}

TEST_CASE("pointwise monotone + subadditive on every outcome for validated tables") {
    std::mt19937_64 rng(10);
    auto m = testsupport::random_mrf(rng, 3, 3, 2, 2, 1.0);
    auto g = gen::random_valuation(rng, ValuationKind::subadditive_table, m.radices());
    REQUIRE(validate_class(g).pass);
    auto d = make_distribution(m, g);
    std::vector<int> outcome(3);
    for (std::size_t idx = 0; idx < d.joint.size(); ++idx) {
        d.joint.space.decode(idx, outcome);
        for (std::uint32_t s = 0; s < 8; ++s)
            for (std::uint32_t t = 0; t < 8; ++t) {
                double vs = eval_outcome(g, outcome, s), vt = eval_outcome(g, outcome, t);
                double vu = eval_outcome(g, outcome, s | t);
                CHECK(vu <= vs + vt + 1e-12);
                if ((s & t) == t) CHECK(vt <= vs + 1e-12);  // t subset of s
            }
    }
}

TEST_CASE("rho: unit-demand is 1, equal additive trio is 2, additive <= n-1") {
    Mrf m;
    m.supports = {{"a"}, {"a"}, {"a"}};
    m.vertex_potentials = {{0}, {0}, {0}};
    SetValuation g;
    g.kind = ValuationKind::additive;
    g.singleton = {{1.0}, {1.0}, {1.0}};
    auto d = make_distribution(m, g);
    CHECK(rho(d).rho == doctest::Approx(2.0));  // (v+v)/v

    auto ud = d;
    ud.g.kind = ValuationKind::unit_demand;
    CHECK(rho(ud).rho == doctest::Approx(1.0));

    std::mt19937_64 rng(11);
    for (int t = 0; t < 10; ++t) {
        auto mm = testsupport::random_mrf(rng, 2, 4, 2, 3, 1.0);
        auto gg = gen::random_valuation(rng, ValuationKind::additive, mm.radices());
        auto dd = make_distribution(mm, gg);
        auto rep = rho(dd);
        CHECK(rep.rho <= static_cast<double>(dd.joint.n() - 1) + 1e-12);
    }
}

TEST_CASE("rho: zero denominators are skipped; all-zero errors") {
    Mrf m;
    m.supports = {{"a", "b"}, {"a", "b"}};
    m.vertex_potentials = {{0, 0}, {0, 0}};
    SetValuation g;
    g.kind = ValuationKind::additive;
    g.singleton = {{0.0, 1.0}, {0.0, 1.0}};
    auto d = make_distribution(m, g);
    auto rep = rho(d);
    CHECK(rep.skipped > 0);
    CHECK(rep.rho == doctest::Approx(1.0));

    SetValuation z = g;
    z.singleton = {{0.0, 0.0}, {0.0, 0.0}};
    auto dz = make_distribution(m, z);
    CHECK_THROWS(rho(dz));
}

TEST_CASE("filter_by_singleton: table filtering keeps class validity") {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 10; ++t) {
        auto m = testsupport::random_mrf(rng, 2, 3, 2, 3, 1.0);
        auto g = gen::random_valuation(rng, ValuationKind::subadditive_table, m.radices());
        double cutoff = 2.0;
        auto tail = filter_by_singleton(g, [&](int i, int w) { return g.singleton[static_cast<std::size_t>(i)][static_cast<std::size_t>(w)] >= cutoff; });
        auto core = filter_by_singleton(g, [&](int i, int w) { return g.singleton[static_cast<std::size_t>(i)][static_cast<std::size_t>(w)] < cutoff; });
        CAPTURE(t);
        CHECK(validate_class(tail).pass);
        CHECK(validate_class(core).pass);
    }
}

TEST_CASE("eval_outcome: dummy labels contribute nothing") {
    auto tab = table_from_min(2.0, {{1.0, 2.0}, {1.0, 2.0}});
    std::vector<int> with_dummy = {2, 1};  // label 2 = dummy for item 0
    CHECK(eval_outcome(tab, with_dummy, 3u) == doctest::Approx(2.0));
    std::vector<int> all_dummy = {2, 2};
    CHECK(eval_outcome(tab, all_dummy, 3u) == doctest::Approx(0.0));
}

// Walkthrough on a two-item instance with matching-type correlation: builds
// the exact joint, compares simple mechanisms against the LP-optimal menu,
// and evaluates the geometric threshold policy against the prophet benchmark.

#include <cstdio>

#include "mrfmech/coretail.hpp"
#include "mrfmech/prophet.hpp"

using namespace mrfmech;

int main() {
    // two binary types, coupled with strength ln 2 when the labels match
    Mrf m;
    m.supports = {{"lo", "hi"}, {"lo", "hi"}};
    m.vertex_potentials = {{0, 0}, {0, 0}};
    m.edges.push_back({{0, 1}, agree_disagree_table(m.supports[0], m.supports[1], std::log(2.0))});

    SetValuation g;
    g.kind = ValuationKind::additive;
    g.singleton = {{1.0, 2.0}, {1.0, 2.0}};

    auto d = make_distribution(m, g);
    double delta = max_weighted_degree(m).delta;
    std::printf("max weighted degree: %.6f\n", delta);

    auto jt = d.joint;
    std::printf("joint over (t0,t1):");
    for (std::size_t idx = 0; idx < jt.size(); ++idx) std::printf(" %.4f", jt.p[idx]);
    std::printf("\n");

    auto s = srev(d);
    auto b = brev(d);
    auto lp = optimal_rev(d);
    std::printf("SRev  = %.6f\nBRev  = %.6f (price %.3f)\nRev   = %.6f (LP, %d iterations)\n",
                s.revenue, b.revenue, b.price, lp.revenue, lp.lp_iterations);

    for (const auto& r : check_theorems(d, delta, lp.revenue))
        std::printf("%-28s lhs %.6f <= rhs %.6f  %s\n", r.name.c_str(), r.lhs, r.rhs,
                    r.pass ? "ok" : "VIOLATED");

    ProphetInstance inst{m, g.singleton, {0, 1}};
    double emax = expected_max(inst, jt);
    double alg = evaluate_policy(inst, geometric_threshold_policy(inst, delta, jt), jt);
    std::printf("E[max] = %.6f, threshold policy = %.6f, optimal online = %.6f\n", emax, alg,
                optimal_online(inst, jt));
    return 0;
}

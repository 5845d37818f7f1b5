// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria run exact oracles at fixed tolerances and enforce their
// runtime budgets.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mrfmech/coretail.hpp"
#include "mrfmech/gen.hpp"
#include "mrfmech/io.hpp"
#include "mrfmech/ocrs.hpp"
#include "mrfmech/prophet.hpp"
#include "oracles.hpp"

using namespace mrfmech;
using Clock = std::chrono::steady_clock;

namespace {

struct Criterion {
    int id;
    std::string description;
    bool pass = true;
    std::string detail;
    double seconds = 0.0;
    double budget_seconds = 0.0;  // 0 = no budget

    void finish(Clock::time_point t0) {
        seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        if (budget_seconds > 0.0 && seconds > budget_seconds) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("runtime budget exceeded");
        }
    }
    void print() const {
        std::printf("[%s] criterion %d: %s (%s%s%.1fs", pass ? "PASS" : "FAIL", id, description.c_str(),
                    detail.c_str(), detail.empty() ? "" : "; ", seconds);
        if (budget_seconds > 0.0) std::printf(" <= %.0fs", budget_seconds);
        std::printf(")\n");
        std::fflush(stdout);
    }
};

std::string fmt(double v) { return format_double(v); }

// -- criterion 1: Lemma 2 conditioning ratios ------------------------------

Criterion run_lemma2_suite() {
    Criterion c{1, "Lemma 2 conditioning ratios on 200 random MRFs (n<=4, |support|<=3, |psi|<=2)"};
    c.budget_seconds = 60.0;
    auto t0 = Clock::now();
    int violations = 0;
    double worst_hi = 0.0;
    for (int k = 0; k < 200; ++k) {
        std::mt19937_64 rng(0xACC0ull + static_cast<std::uint64_t>(k));
        auto m = gen::random_mrf(rng, 2, 4, 2, 3, 2.0);
        auto jt = joint_table(m);
        double delta = max_weighted_degree(m).delta;
        auto rep = check_conditioning_bounds(jt, delta, {.sample_count = 10'000, .seed = rng()});
        if (!rep.pass) ++violations;
        worst_hi = std::max(worst_hi, rep.max_ratio / std::exp(4.0 * delta));
    }
    c.pass = violations == 0;
    c.detail = "0 violations allowed, got " + std::to_string(violations) + ", worst ratio/e^{4d} " + fmt(worst_hi);
    c.finish(t0);
    return c;
}

// -- criteria 2 + 3: revenue theorems and intermediate lemmas ---------------

std::pair<Criterion, Criterion> run_revenue_suites() {
    Criterion c2{2, "revenue theorems (Rev vs SRev/BRev bounds), 100 instances per buyer class"};
    c2.budget_seconds = 600.0;
    Criterion c3{3, "intermediate lemmas (marginal mechanism, crude bound, core/tail, cutoff, dominance)"};
    auto t0 = Clock::now();
    int thm_viol = 0, lemma_viol = 0, thm_total = 0, lemma_total = 0;
    double worst_thm_slack = kInf, worst_lemma_slack = kInf;
    const double caps[] = {0.0, 0.3, 0.6};
    for (auto kind : {ValuationKind::additive, ValuationKind::unit_demand, ValuationKind::subadditive_table}) {
        for (int k = 0; k < 100; ++k) {
            gen::InstanceGenConfig cfg;
            cfg.mrf = {2, 3, 2, 3, caps[k % 3]};
            cfg.kind = kind;
            auto inst = gen::random_instance(0xB0114D5ull + static_cast<std::uint64_t>(k) * 131ull +
                                                 static_cast<std::uint64_t>(kind),
                                             cfg);
            auto d = make_distribution(inst.mrf, inst.g);
            double delta = max_weighted_degree(inst.mrf).delta;
            for (const auto& r : run_all_checks(d, delta)) {
                bool thm = r.name.rfind("rev_bound_", 0) == 0;
                if (thm) {
                    ++thm_total;
                    thm_viol += r.pass ? 0 : 1;
                    if (std::isfinite(r.slack)) worst_thm_slack = std::min(worst_thm_slack, r.slack);
                } else {
                    ++lemma_total;
                    lemma_viol += r.pass ? 0 : 1;
                    if (std::isfinite(r.slack)) worst_lemma_slack = std::min(worst_lemma_slack, r.slack);
                }
            }
        }
    }
    c2.pass = thm_viol == 0;
    c2.detail = std::to_string(thm_total) + " theorem checks, " + std::to_string(thm_viol) +
                " violations, worst slack " + fmt(worst_thm_slack);
    c2.finish(t0);
    c3.pass = lemma_viol == 0;
    c3.detail = std::to_string(lemma_total) + " lemma checks, " + std::to_string(lemma_viol) +
                " violations, worst slack " + fmt(worst_lemma_slack);
    c3.seconds = c2.seconds;
    return {c2, c3};
}

// -- criterion 4: prophet upper bound ---------------------------------------

Criterion run_prophet_upper() {
    Criterion c{4, "prophet policy guarantee E[ALG](20d+15) >= E[max] on 200 random instances"};
    c.budget_seconds = 120.0;
    auto t0 = Clock::now();
    int violations = 0, evaluated = 0;
    double worst = kInf;
    for (int k = 0; k < 200; ++k) {
        std::mt19937_64 rng(0x9409BE7ull + static_cast<std::uint64_t>(k));
        ProphetInstance inst;
        inst.mrf = gen::random_mrf(rng, 2, 4, 2, 3, 1.0);
        for (int i = 0; i < inst.mrf.n(); ++i) {
            std::vector<double> v;
            for (std::size_t w = 0; w < inst.mrf.supports[static_cast<std::size_t>(i)].size(); ++w)
                v.push_back(gen::grid_value(rng));
            inst.values.push_back(v);
        }
        inst.order.resize(static_cast<std::size_t>(inst.mrf.n()));
        for (int i = 0; i < inst.mrf.n(); ++i) inst.order[static_cast<std::size_t>(i)] = i;
        auto jt = joint_table(inst.mrf);
        double delta = max_weighted_degree(inst.mrf).delta;
        double emax = expected_max(inst, jt);
        if (emax <= 0.0) continue;
        ++evaluated;
        double alg = evaluate_policy(inst, geometric_threshold_policy(inst, delta, jt), jt);
        double margin = alg * (20.0 * delta + 15.0) - emax;
        worst = std::min(worst, margin / emax);
        if (margin < -1e-9 * emax) ++violations;
    }
    c.pass = violations == 0;
    c.detail = std::to_string(evaluated) + " instances, " + std::to_string(violations) +
               " violations, worst relative margin " + fmt(worst);
    c.finish(t0);
    return c;
}

// -- criterion 5: prophet lower bound ----------------------------------------

Criterion run_prophet_lower() {
    Criterion c{5, "prophet hardness at delta in {0.5, 1, 2}: online optimum 1, closed-form E[max], ratio"};
    c.budget_seconds = 30.0;
    auto t0 = Clock::now();
    std::string fails;
    for (double delta : {0.5, 1.0, 2.0}) {
        auto h = hard_instance(delta);
        for (const auto& r : verify_lower_bound(h.instance, h.cf, delta)) {
            if (!r.pass) fails += " " + r.name + "@" + fmt(delta);
        }
    }
    c.pass = fails.empty();
    c.detail = fails.empty() ? "all closed-form and ratio checks hold at 1e-9" : ("failed:" + fails);
    c.finish(t0);
    return c;
}

// -- criterion 6: OCRS -------------------------------------------------------

Criterion run_ocrs_suite() {
    Criterion c{6, "OCRS: adaptive selectability equals alpha on 100 instances; hard chain impossibility"};
    c.budget_seconds = 60.0;
    auto t0 = Clock::now();
    int violations = 0;
    double worst_dev = 0.0;
    std::mt19937_64 rng(0x0C45ull);
    for (int k = 0; k < 100; ++k) {
        auto m = gen::random_sparse_binary_mrf(rng, 2, 4, 0.8);
        auto inst = make_ocrs_instance(std::move(m));
        double delta = max_weighted_degree(inst.mrf).delta;
        double alpha = 1.0 / (1.0 + std::exp(4.0 * delta));
        double sel = 0.0;
        bool ok = true;
        try {
            sel = selectability(inst, adaptive_scheme(inst, alpha)).min_ratio;
        } catch (const std::exception&) {
            ok = false;
        }
        double dev = std::abs(sel - alpha);
        worst_dev = std::max(worst_dev, dev);
        if (!ok || dev > 1e-12) ++violations;
    }
    std::string detail = "100 adaptive checks, worst |sel-alpha| " + fmt(worst_dev);
    for (double delta : {1.0, 2.0, 3.0}) {
        auto hp = hard_ocrs_params(delta);
        double amax = max_alpha(hp.p, hp.q, hp.n);
        if (!leq_tol(amax, 4.0 * std::exp(-delta), 1e-9)) {
            ++violations;
            detail += "; max_alpha bound failed at delta " + fmt(delta);
        }
        double worst = 0.0;
        for (double alpha : {amax * 0.5, amax, std::min(1.0, amax * 2.0)})
            worst = std::max(worst, std::abs(y_recursion_final(hp.p, hp.q, hp.n, alpha) -
                                             y_closed_form_final(hp.p, hp.q, hp.n, alpha)));
        if (worst > 1e-12) {
            ++violations;
            detail += "; y-recursion mismatch " + fmt(worst) + " at delta " + fmt(delta);
        }
    }
    c.pass = violations == 0;
    c.detail = detail + ", " + std::to_string(violations) + " violations";
    c.finish(t0);
    return c;
}

// -- criterion 7: oracle cross-checks ----------------------------------------

Criterion run_oracle_crosschecks() {
    Criterion c{7, "oracle cross-checks: LP vs vertex enumeration, n=1 LP vs posted price, online DP vs policy trees"};
    auto t0 = Clock::now();
    std::string fails;
    {
        std::mt19937_64 rng(0x10AD5ull);
        for (int k = 0; k < 50; ++k) {
            auto p = oracle::random_lp(rng);
            auto s = lp_solve(p);
            auto v = oracle::lp_by_vertex_enumeration(p);
            if (s.status != LpStatus::optimal || !v ||
                std::abs(s.objective - *v) > 1e-7 * std::max(1.0, std::abs(*v)))
                fails += " lp#" + std::to_string(k);
        }
    }
    {
        for (int k = 0; k < 50; ++k) {
            std::mt19937_64 rng(0x51417ull + static_cast<std::uint64_t>(k));
            auto m = gen::random_mrf(rng, 1, 1, 2, 3, 1.0);
            auto g = gen::random_valuation(rng, ValuationKind::additive, m.radices());
            auto d = make_distribution(m, g);
            double lp = optimal_rev(d).revenue;
            double posted = rev_i(d, 0).revenue;
            if (std::abs(lp - posted) > 1e-9 * std::max(1.0, posted)) fails += " single#" + std::to_string(k);
        }
    }
    {
        int done = 0;
        for (int k = 0; done < 20 && k < 200; ++k) {
            std::mt19937_64 rng(0x0911115ull + static_cast<std::uint64_t>(k));
            ProphetInstance inst;
            inst.mrf = gen::random_mrf(rng, 2, 3, 2, 2, 1.0);
            for (int i = 0; i < inst.mrf.n(); ++i) {
                std::vector<double> v;
                for (std::size_t w = 0; w < 2; ++w) v.push_back(gen::grid_value(rng));
                inst.values.push_back(v);
            }
            inst.order.resize(static_cast<std::size_t>(inst.mrf.n()));
            for (int i = 0; i < inst.mrf.n(); ++i) inst.order[static_cast<std::size_t>(i)] = i;
            double dp = optimal_online(inst);
            double brute = oracle::best_policy_by_enumeration(inst);
            if (std::abs(dp - brute) > 1e-12 * std::max(1.0, brute)) fails += " online#" + std::to_string(k);
            ++done;
        }
    }
    c.pass = fails.empty();
    c.detail = fails.empty() ? "50 LPs at 1e-7, 50 single-item at 1e-9, 20 online DPs at 1e-12"
                             : ("failed:" + fails);
    c.finish(t0);
    return c;
}

// -- criterion 8: determinism -------------------------------------------------

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

Criterion run_determinism(const std::string& cli) {
    Criterion c{8, "verify-all twice with one seed produces byte-identical CSVs"};
    auto t0 = Clock::now();
    if (cli.empty()) {
        c.pass = false;
        c.detail = "CLI path not configured";
        c.finish(t0);
        return c;
    }
    std::string base = "acceptance_determinism";
    std::string cmd1 = cli + " verify-all --seed 99 --bounds-count 2 --conditioning-count 5 --prophet-count 5 --ocrs-count 5 --out " +
                       base + "_a.csv 2>/dev/null";
    std::string cmd2 = cli + " verify-all --seed 99 --bounds-count 2 --conditioning-count 5 --prophet-count 5 --ocrs-count 5 --out " +
                       base + "_b.csv 2>/dev/null";
    int r1 = std::system(cmd1.c_str());
    int r2 = std::system(cmd2.c_str());
    auto a = slurp(base + "_a.csv");
    auto b = slurp(base + "_b.csv");
    c.pass = r1 == 0 && r2 == 0 && !a.empty() && a == b;
    c.detail = "exit codes " + std::to_string(r1) + "/" + std::to_string(r2) + ", " +
               std::to_string(a.size()) + " bytes" + (a == b ? ", identical" : ", DIFFER");
    std::remove((base + "_a.csv").c_str());
    std::remove((base + "_b.csv").c_str());
    c.finish(t0);
    return c;
}

}  // namespace

int main(int argc, char** argv) {
#ifdef MRFMECH_CLI_PATH
    std::string cli = MRFMECH_CLI_PATH;
#else
    std::string cli;
#endif
    if (argc > 1) cli = argv[1];

    std::vector<Criterion> results;
    results.push_back(run_lemma2_suite());
    results.back().print();
    {
        auto [c2, c3] = run_revenue_suites();
        c2.print();
        c3.print();
        results.push_back(c2);
        results.push_back(c3);
    }
    results.push_back(run_prophet_upper());
    results.back().print();
    results.push_back(run_prophet_lower());
    results.back().print();
    results.push_back(run_ocrs_suite());
    results.back().print();
    results.push_back(run_oracle_crosschecks());
    results.back().print();
    results.push_back(run_determinism(cli));
    results.back().print();

    int failed = 0;
    for (const auto& c : results) failed += c.pass ? 0 : 1;
    std::printf("%s: %zu/%zu criteria passed\n", failed == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
                results.size() - static_cast<std::size_t>(failed), results.size());
    return failed == 0 ? 0 : 1;
}

#pragma once

// Prophet inequalities over MRF-correlated values: exact policy evaluation,
// the randomized geometric-threshold algorithm, the optimal-online benchmark,
// and the path-MRF hardness construction with its closed-form recursions.

#include "mrf.hpp"
#include "report.hpp"

namespace mrfmech {

struct ProphetInstance {
    Mrf mrf;
    std::vector<std::vector<double>> values;  // per item, value of each label
    std::vector<int> order;                   // arrival permutation

    int n() const { return static_cast<int>(values.size()); }
};

inline void validate_prophet(const ProphetInstance& inst) {
    validate_mrf(inst.mrf);
    if (static_cast<int>(inst.values.size()) != inst.mrf.n() ||
        static_cast<int>(inst.order.size()) != inst.mrf.n())
        throw std::invalid_argument("prophet: value map / order size mismatch");
    std::vector<bool> seen(inst.order.size(), false);
    for (int i : inst.order) {
        if (i < 0 || i >= inst.mrf.n() || seen[static_cast<std::size_t>(i)])
            throw std::invalid_argument("prophet: order is not a permutation");
        seen[static_cast<std::size_t>(i)] = true;
    }
    for (int i = 0; i < inst.mrf.n(); ++i) {
        if (inst.values[static_cast<std::size_t>(i)].size() != inst.mrf.supports[static_cast<std::size_t>(i)].size())
            throw std::invalid_argument("prophet: value map not total");
        for (double v : inst.values[static_cast<std::size_t>(i)])
            if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("prophet: values must be finite and nonnegative");
    }
}

// Single randomized threshold: draw a level, take the first arrival meeting it.
struct ThresholdPolicy {
    std::vector<std::pair<double, double>> levels;  // (threshold, weight)
};

inline double expected_max(const ProphetInstance& inst, const JointTable& jt) {
    double s = 0.0;
    std::vector<int> outcome(static_cast<std::size_t>(jt.n()));
    for (std::size_t idx = 0; idx < jt.size(); ++idx) {
        if (jt.p[idx] <= 0.0) continue;
        jt.space.decode(idx, outcome);
        double mx = 0.0;
        for (int i = 0; i < inst.n(); ++i)
            mx = std::max(mx, inst.values[static_cast<std::size_t>(i)][static_cast<std::size_t>(outcome[static_cast<std::size_t>(i)])]);
        s += jt.p[idx] * mx;
    }
    return s;
}

inline double expected_max(const ProphetInstance& inst) { return expected_max(inst, joint_table(inst.mrf)); }

// Exact value of a threshold policy: acceptance is the closed comparison
// X >= threshold.
inline double evaluate_policy(const ProphetInstance& inst, const ThresholdPolicy& policy,
                              const JointTable& jt) {
    double total = 0.0;
    std::vector<int> outcome(static_cast<std::size_t>(jt.n()));
    for (std::size_t idx = 0; idx < jt.size(); ++idx) {
        if (jt.p[idx] <= 0.0) continue;
        jt.space.decode(idx, outcome);
        for (auto [tau, w] : policy.levels) {
            if (w <= 0.0) continue;
            for (int k = 0; k < inst.n(); ++k) {
                int i = inst.order[static_cast<std::size_t>(k)];
                double x = inst.values[static_cast<std::size_t>(i)][static_cast<std::size_t>(outcome[static_cast<std::size_t>(i)])];
                if (x >= tau) {
                    total += jt.p[idx] * w * x;
                    break;
                }
            }
        }
    }
    return total;
}

inline double evaluate_policy(const ProphetInstance& inst, const ThresholdPolicy& policy) {
    return evaluate_policy(inst, policy, joint_table(inst.mrf));
}

// Geometric threshold levels e^z * E[max] for integer z in {-1, ..., K},
// K = ceil(4 delta + 1), drawn uniformly.
inline ThresholdPolicy geometric_threshold_policy(const ProphetInstance& inst, double delta, const JointTable& jt) {
    double opt = expected_max(inst, jt);
    if (!(opt > 0.0)) throw std::runtime_error("geometric_threshold_policy: expected maximum is zero");
    int k_top = static_cast<int>(std::ceil(4.0 * delta + 1.0 - 1e-12));
    ThresholdPolicy pol;
    double w = 1.0 / static_cast<double>(k_top + 2);
    for (int z = -1; z <= k_top; ++z) pol.levels.emplace_back(std::exp(static_cast<double>(z)) * opt, w);
    return pol;
}

inline ThresholdPolicy geometric_threshold_policy(const ProphetInstance& inst, double delta) {
    return geometric_threshold_policy(inst, delta, joint_table(inst.mrf));
}

// Optimal online value by backward induction over full observation prefixes
// in arrival order; exact under the joint table.
inline double optimal_online(const ProphetInstance& inst, const JointTable& jt) {
    const int n = inst.n();
    // joint reordered so that coordinate k is the k-th arrival
    std::vector<int> rad(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        rad[static_cast<std::size_t>(k)] = jt.space.radices[static_cast<std::size_t>(inst.order[static_cast<std::size_t>(k)])];
    ProductSpace rs(rad);
    std::vector<double> level(rs.count, 0.0);  // prefix probabilities at depth n
    {
        std::vector<int> outcome(static_cast<std::size_t>(n)), reord(static_cast<std::size_t>(n));
        for (std::size_t idx = 0; idx < jt.size(); ++idx) {
            if (jt.p[idx] == 0.0) continue;
            jt.space.decode(idx, outcome);
            for (int k = 0; k < n; ++k) reord[static_cast<std::size_t>(k)] = outcome[static_cast<std::size_t>(inst.order[static_cast<std::size_t>(k)])];
            level[rs.encode(reord)] += jt.p[idx];
        }
    }
    // V at depth n is 0; walk depths backwards, collapsing one coordinate at
    // a time: value[prefix] = sum_c Pr(c|prefix) max(x_c, value[prefix+c])
    std::vector<double> value(level.size(), 0.0);
    std::vector<double> prefix_prob = std::move(level);
    for (int k = n - 1; k >= 0; --k) {
        const int rk = rad[static_cast<std::size_t>(k)];
        const int item = inst.order[static_cast<std::size_t>(k)];
        std::size_t count = 1;
        for (int j = 0; j < k; ++j) count *= static_cast<std::size_t>(rad[static_cast<std::size_t>(j)]);
        std::vector<double> nprob(count, 0.0), nvalue(count, 0.0);
        for (std::size_t pre = 0; pre < count; ++pre) {
            double acc = 0.0, tot = 0.0;
            for (int c = 0; c < rk; ++c) {
                std::size_t child = pre * static_cast<std::size_t>(rk) + static_cast<std::size_t>(c);
                double pc = prefix_prob[child];
                if (pc <= 0.0) continue;
                double x = inst.values[static_cast<std::size_t>(item)][static_cast<std::size_t>(c)];
                acc += pc * std::max(x, value[child]);
                tot += pc;
            }
            nprob[pre] = tot;
            nvalue[pre] = tot > 0.0 ? acc / tot : 0.0;
        }
        prefix_prob = std::move(nprob);
        value = std::move(nvalue);
    }
    return value[0];
}

inline double optimal_online(const ProphetInstance& inst) { return optimal_online(inst, joint_table(inst.mrf)); }

// Per-state backward induction for path MRFs observed in path order; exact
// and linear in the path length.
inline double optimal_online_markov(const ProphetInstance& inst) {
    for (int k = 0; k < inst.n(); ++k)
        if (inst.order[static_cast<std::size_t>(k)] != k)
            throw std::invalid_argument("optimal_online_markov: requires path arrival order");
    auto pc = path_chain(inst.mrf);
    const std::size_t n = pc.length();
    std::vector<double> cont(inst.values[n - 1].size(), 0.0);  // E[opt from i+1 | t_i = state]
    for (std::size_t i = n - 1; i-- > 0;) {
        const auto& tm = pc.trans[i];
        std::vector<double> next(inst.values[i].size(), 0.0);
        for (std::size_t a = 0; a < tm.size(); ++a) {
            double acc = 0.0;
            for (std::size_t b = 0; b < tm[a].size(); ++b)
                acc += tm[a][b] * std::max(inst.values[i + 1][b], cont[b]);
            next[a] = acc;
        }
        cont = std::move(next);
    }
    double v = 0.0;
    for (std::size_t a = 0; a < pc.initial.size(); ++a)
        v += pc.initial[a] * std::max(inst.values[0][a], cont[a]);
    return v;
}

// Closed-form quantities of the hardness construction.
struct LowerBoundClosedForm {
    double p = 0.5, q = 0.0;
    int n = 0;                   // vertices 0..n
    std::vector<double> lambda;  // lambda[k] for k = 1..n (index 0 unused)
    double r1 = 1.0, r0 = 0.0;   // optimal online reward from start states 1 / 0
    double m1 = 0.0, m0 = 0.0;   // expected maximum from start states 1 / 0
};

// E[max] from the explicit sum over the first active index, evaluated
// directly and independently of the matrix recursion.
inline double lower_bound_expected_max_closed_form(double p, double q, int n) {
    double s = 1.0;
    double ompq = 1.0 - p - q;
    double denom = (q + p * std::pow(ompq, n)) * (q + p);
    for (int k = 1; k <= n; ++k) {
        double num = (q + p * std::pow(ompq, k)) * (q + p * std::pow(ompq, n - k));
        s += p * std::pow(1.0 - q, k - 1) * num / denom;
    }
    return s;
}

struct HardInstance {
    ProphetInstance instance;
    LowerBoundClosedForm cf;
};

// Path-MRF instance on which no online algorithm beats (delta+1)/2: binary
// path with ±delta coupling, anchored conditional Pr[t_i = 0 | t_{i-1} = 1] =
// 1/2, and geometrically rescaled values chosen so the optimal online reward
// is exactly 1.
inline HardInstance hard_instance(double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("hard_instance: delta must be positive");
    LowerBoundClosedForm cf;
    cf.p = 0.5;
    cf.q = std::exp(-4.0 * delta) / (1.0 + std::exp(-4.0 * delta));
    const double base = 0.5 - cf.q;
    if (base <= 2.0 * cf.q)
        throw std::runtime_error("hard_instance: delta too small, no valid horizon (1/2 - q <= 2q)");
    cf.n = static_cast<int>(std::ceil(std::log(2.0 * cf.q) / std::log(base) - 1e-12));
    cf.lambda.assign(static_cast<std::size_t>(cf.n) + 1, 0.0);
    for (int k = 1; k <= cf.n; ++k)
        cf.lambda[static_cast<std::size_t>(k)] =
            (cf.q + cf.p * std::pow(1.0 - cf.p - cf.q, k - 1)) / (cf.q + cf.p * std::pow(1.0 - cf.p - cf.q, k));

    // R and M recursions in the (start-state 1, start-state 0) basis
    double r1 = 1.0, r0 = 0.0, m1 = 1.0, m0 = 0.0;
    for (int k = 1; k <= cf.n; ++k) {
        double lam = cf.lambda[static_cast<std::size_t>(k)];
        double nr1 = lam * ((1.0 - cf.p) * r1 + cf.p * r0);
        double nr0 = lam * (cf.q * r1 + (1.0 - cf.q) * r0);
        double bump = cf.p * std::pow(1.0 - cf.q, k - 1);
        double nm1 = lam * ((1.0 - cf.p) * m1 + cf.p * m0) + bump;
        double nm0 = lam * (cf.q * m1 + (1.0 - cf.q) * m0);
        r1 = nr1;
        r0 = nr0;
        m1 = nm1;
        m0 = nm0;
    }
    cf.r1 = r1;
    cf.r0 = r0;
    cf.m1 = m1;
    cf.m0 = m0;

    HardInstance out;
    out.cf = cf;
    auto& inst = out.instance;
    std::vector<std::vector<std::string>> sup;
    sup.push_back({"1"});
    for (int i = 1; i <= cf.n; ++i) sup.push_back({"0", "1"});
    std::vector<std::vector<double>> edges;
    for (int i = 0; i < cf.n; ++i)
        edges.push_back(agree_disagree_table(sup[static_cast<std::size_t>(i)], sup[static_cast<std::size_t>(i) + 1], delta));
    std::vector<AnchoredTarget> anchored;
    for (int i = 1; i <= cf.n; ++i) {
        AnchoredTarget t;
        t.anchor = i == 1 ? 0 : 1;  // the label "1" of the predecessor
        t.probs = {cf.p, 1.0 - cf.p};
        anchored.push_back(t);
    }
    inst.mrf = build_path_mrf(sup, edges, {1.0}, anchored);
    inst.values.push_back({1.0});
    double scale = 1.0;
    for (int i = 1; i <= cf.n; ++i) {
        scale *= cf.lambda[static_cast<std::size_t>(cf.n - i + 1)];  // lambda_n * ... * lambda_{n-i+1}
        inst.values.push_back({0.0, scale});
    }
    inst.order.resize(static_cast<std::size_t>(cf.n) + 1);
    for (int i = 0; i <= cf.n; ++i) inst.order[static_cast<std::size_t>(i)] = i;
    validate_prophet(inst);
    return out;
}

// Exact instance quantities against the closed forms, plus the competitive
// ratio claim.
inline std::vector<BoundReport> verify_lower_bound(const ProphetInstance& inst, const LowerBoundClosedForm& cf,
                                                   double delta_nominal) {
    std::vector<BoundReport> out;
    auto jt = joint_table(inst.mrf);
    double opt_on = optimal_online(inst, jt);
    double emax = expected_max(inst, jt);
    double m_closed = lower_bound_expected_max_closed_form(cf.p, cf.q, cf.n);
    auto eq_report = [](std::string name, double a, double b, double tol) {
        BoundReport r = make_report(std::move(name), std::abs(a - b), tol * std::max(1.0, std::abs(b)));
        r.witness = "got " + format_double(a) + ", want " + format_double(b);
        return r;
    };
    out.push_back(eq_report("lb_optimal_online_is_one", opt_on, 1.0, 1e-9));
    out.push_back(eq_report("lb_recursion_r1_is_one", cf.r1, 1.0, 1e-9));
    out.push_back(eq_report("lb_expected_max_matches_closed_form", emax, m_closed, 1e-9));
    out.push_back(eq_report("lb_recursion_matches_closed_form", cf.m1, m_closed, 1e-12));
    out.push_back(make_report("lb_competitive_ratio", (delta_nominal + 1.0) / 2.0, emax / opt_on));
    return out;
}

}  // namespace mrfmech

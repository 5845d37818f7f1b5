#pragma once

// Simple mechanisms and the optimal single-buyer revenue LP.
//
// Everything is computed exactly over the joint type table. Posted-price
// searches scan candidate prices on the per-item singleton-value supports
// (plus +inf for "not offered"); for additive buyers separate pricing
// decomposes per item and the scan is exact, for unit-demand/subadditive
// buyers the grid is a documented restriction and results carry a
// grid_restricted flag.
//
// Buyer tie-breaking is seller-favorable everywhere: among utility-maximal
// options the buyer takes the higher price, then the lower option index.

#include <cstdlib>
#include <map>

#include "lp.hpp"
#include "valuation.hpp"

namespace mrfmech {

struct MenuOption {
    std::vector<std::pair<std::uint32_t, double>> lottery;  // (item subset, probability), sums to 1
    double price = 0.0;
};

struct Menu {
    std::vector<MenuOption> options;  // the (empty set, 0) option is implicit
};

struct PriceVector {
    std::vector<double> prices;  // +inf marks an item not offered
};

struct RevResult {
    double revenue = 0.0;
    double price = kInf;
};

struct SrevResult {
    double revenue = 0.0;
    PriceVector prices;
    bool grid_restricted = false;
};

struct OptRevResult {
    double revenue = 0.0;
    Menu menu;
    int lp_iterations = 0;
    double lp_max_violation = 0.0;
    double lp_duality_gap = 0.0;
};

namespace detail {

// value-probability pairs of a scalar random variable, aggregated and sorted
inline std::vector<std::pair<double, double>> scalar_dist(const std::vector<double>& vals,
                                                          const std::vector<double>& probs) {
    std::map<double, double> agg;
    for (std::size_t i = 0; i < vals.size(); ++i)
        if (probs[i] > 0.0) agg[vals[i]] += probs[i];
    return {agg.begin(), agg.end()};
}

// best posted price over the support of a scalar value distribution,
// ties toward the lower price
inline RevResult best_posted_price(const std::vector<std::pair<double, double>>& dist) {
    RevResult r;
    r.revenue = 0.0;
    r.price = kInf;
    double tail = 0.0;
    std::vector<std::pair<double, double>> suffix(dist.size());
    for (std::size_t i = dist.size(); i-- > 0;) {
        tail += dist[i].second;
        suffix[i] = {dist[i].first, tail};
    }
    for (auto [v, pr] : suffix) {
        if (v <= 0.0) continue;
        double rev = v * pr;
        if (rev > r.revenue + 1e-12 * std::max(1.0, rev)) {
            r.revenue = rev;
            r.price = v;
        }
    }
    return r;
}

// all subsets of `items`, ordered by compact index
inline std::vector<std::uint32_t> subsets_of(std::uint32_t items) {
    std::vector<int> pos;
    for (int i = 0; i < 32; ++i)
        if (items & (1u << i)) pos.push_back(i);
    std::vector<std::uint32_t> out(1u << pos.size());
    for (std::uint32_t c = 0; c < out.size(); ++c) {
        std::uint32_t m = 0;
        for (std::size_t b = 0; b < pos.size(); ++b)
            if (c & (1u << b)) m |= 1u << pos[static_cast<std::size_t>(b)];
        out[c] = m;
    }
    return out;
}

// Positive-probability buyer types with their subset-value vectors; outcomes
// inducing identical valuations are merged (they behave identically in any
// menu, so the LP optimum is unchanged and shrinks).
struct TypeList {
    std::vector<double> prob;
    std::vector<std::vector<double>> vals;  // [type][compact subset index]
    std::vector<std::uint32_t> subsets;
};

inline TypeList build_types(const ValuationDistribution& d) {
    TypeList tl;
    tl.subsets = subsets_of(d.items);
    std::map<std::vector<double>, std::size_t> index;
    std::vector<int> outcome(static_cast<std::size_t>(d.joint.n()));
    std::vector<double> v(tl.subsets.size());
    for (std::size_t idx = 0; idx < d.joint.size(); ++idx) {
        if (d.joint.p[idx] <= 0.0) continue;
        d.joint.space.decode(idx, outcome);
        for (std::size_t s = 0; s < tl.subsets.size(); ++s) v[s] = eval_outcome(d.g, outcome, tl.subsets[s]);
        auto [it, fresh] = index.try_emplace(v, tl.prob.size());
        if (fresh) {
            tl.prob.push_back(d.joint.p[idx]);
            tl.vals.push_back(v);
        } else {
            tl.prob[it->second] += d.joint.p[idx];
        }
    }
    return tl;
}

inline std::size_t lp_var_cap() {
    static const std::size_t cap = [] {
        if (const char* e = std::getenv("MRFMECH_LP_VAR_CAP")) {
            char* end = nullptr;
            unsigned long long v = std::strtoull(e, &end, 10);
            if (end && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
        }
        return static_cast<std::size_t>(100'000);
    }();
    return cap;
}

}  // namespace detail

// Optimal posted price for item i alone: max over p of p * Pr[v(i) >= p],
// attained on the singleton-value support, ties to the lower price.
inline RevResult rev_i(const ValuationDistribution& d, int i) {
    if (!(d.items & (1u << i))) throw std::invalid_argument("rev_i: item not in play");
    auto mg = marginal(d.joint, i);
    std::vector<double> vals(mg.size());
    for (std::size_t w = 0; w < mg.size(); ++w)
        vals[w] = d.g.singleton[static_cast<std::size_t>(i)][w];
    return detail::best_posted_price(detail::scalar_dist(vals, mg));
}

// Utility-maximizing option index; menu.options.size() denotes the implicit
// (empty, 0) option.
inline std::size_t buyer_choice(const Menu& menu, const std::function<double(std::uint32_t)>& v,
                                double tie_tol = 1e-9) {
    std::size_t best = menu.options.size();
    double best_u = 0.0, best_p = 0.0;
    for (std::size_t k = 0; k < menu.options.size(); ++k) {
        const auto& opt = menu.options[k];
        double ev = 0.0;
        for (auto [mask, pr] : opt.lottery) ev += pr * v(mask);
        double u = ev - opt.price;
        double tol = tie_tol * std::max({1.0, std::abs(u), std::abs(best_u)});
        if (u > best_u + tol || (std::abs(u - best_u) <= tol && opt.price > best_p + tol)) {
            best = k;
            best_u = u;
            best_p = opt.price;
        }
    }
    return best;
}

inline double menu_revenue(const ValuationDistribution& d, const Menu& menu, double tie_tol = 1e-9) {
    double rev = 0.0;
    std::vector<int> outcome(static_cast<std::size_t>(d.joint.n()));
    for (std::size_t idx = 0; idx < d.joint.size(); ++idx) {
        if (d.joint.p[idx] <= 0.0) continue;
        d.joint.space.decode(idx, outcome);
        auto v = [&](std::uint32_t mask) { return eval_outcome(d.g, outcome, mask & d.items); };
        std::size_t k = buyer_choice(menu, v, tie_tol);
        if (k < menu.options.size()) rev += d.joint.p[idx] * menu.options[k].price;
    }
    return rev;
}

// Grand-bundle pricing: best posted price on the support of v(item set).
inline RevResult brev(const ValuationDistribution& d) {
    std::vector<double> vals;
    std::vector<double> probs;
    std::vector<int> outcome(static_cast<std::size_t>(d.joint.n()));
    for (std::size_t idx = 0; idx < d.joint.size(); ++idx) {
        if (d.joint.p[idx] <= 0.0) continue;
        d.joint.space.decode(idx, outcome);
        vals.push_back(eval_outcome(d.g, outcome, d.items));
        probs.push_back(d.joint.p[idx]);
    }
    return detail::best_posted_price(detail::scalar_dist(vals, probs));
}

namespace detail {

inline std::vector<std::vector<double>> price_grids(const ValuationDistribution& d) {
    std::vector<std::vector<double>> grids(static_cast<std::size_t>(d.joint.n()));
    for (int i = 0; i < d.joint.n(); ++i) {
        if (!(d.items & (1u << i))) continue;
        auto mg = marginal(d.joint, i);
        std::vector<double> g;
        for (std::size_t w = 0; w < mg.size(); ++w) {
            double v = d.g.singleton[static_cast<std::size_t>(i)][w];
            if (mg[w] > 0.0 && v > 0.0) g.push_back(v);
        }
        std::sort(g.begin(), g.end());
        g.erase(std::unique(g.begin(), g.end()), g.end());
        g.push_back(kInf);
        grids[static_cast<std::size_t>(i)] = std::move(g);
    }
    return grids;
}

// revenue of a separate-pricing menu under demand-set buying
inline double separate_pricing_revenue(const detail::TypeList& tl, std::span<const double> prices) {
    double rev = 0.0;
    for (std::size_t t = 0; t < tl.prob.size(); ++t) {
        double best_u = 0.0, best_p = 0.0;
        for (std::size_t s = 0; s < tl.subsets.size(); ++s) {
            double price = 0.0;
            bool offered = true;
            for (int i = 0; i < 32 && offered; ++i)
                if (tl.subsets[s] & (1u << i)) {
                    double pi = prices[static_cast<std::size_t>(i)];
                    if (std::isinf(pi)) offered = false;
                    else price += pi;
                }
            if (!offered) continue;
            double u = tl.vals[t][s] - price;
            double tol = 1e-9 * std::max({1.0, std::abs(u), std::abs(best_u)});
            if (u > best_u + tol || (std::abs(u - best_u) <= tol && price > best_p + tol)) {
                best_u = u;
                best_p = price;
            }
        }
        rev += tl.prob[t] * best_p;
    }
    return rev;
}

}  // namespace detail

// Separate item pricing. Additive buyers decompose exactly into per-item
// posted prices; other classes search the support price grid and simulate
// demand-set buying.
inline SrevResult srev(const ValuationDistribution& d) {
    SrevResult out;
    out.prices.prices.assign(static_cast<std::size_t>(d.joint.n()), kInf);
    if (d.items == 0) return out;
    if (d.g.kind == ValuationKind::additive) {
        for (int i = 0; i < d.joint.n(); ++i) {
            if (!(d.items & (1u << i))) continue;
            auto r = rev_i(d, i);
            out.revenue += r.revenue;
            out.prices.prices[static_cast<std::size_t>(i)] = r.price;
        }
        return out;
    }
    out.grid_restricted = true;
    auto grids = detail::price_grids(d);
    auto tl = detail::build_types(d);
    std::vector<int> rad;
    std::vector<int> gitems;
    for (int i = 0; i < d.joint.n(); ++i)
        if (d.items & (1u << i)) {
            rad.push_back(static_cast<int>(grids[static_cast<std::size_t>(i)].size()));
            gitems.push_back(i);
        }
    ProductSpace pspace(rad);
    std::vector<int> digits(rad.size());
    std::vector<double> prices(static_cast<std::size_t>(d.joint.n()), kInf);
    for (std::size_t pi = 0; pi < pspace.count; ++pi) {
        pspace.decode(pi, digits);
        for (std::size_t k = 0; k < gitems.size(); ++k)
            prices[static_cast<std::size_t>(gitems[k])] = grids[static_cast<std::size_t>(gitems[k])][static_cast<std::size_t>(digits[k])];
        double rev = detail::separate_pricing_revenue(tl, prices);
        if (rev > out.revenue + 1e-12 * std::max(1.0, rev)) {
            out.revenue = rev;
            out.prices.prices = prices;
        }
    }
    return out;
}

// Separate pricing credited only when the buyer demands exactly one item.
inline SrevResult srev_prime(const ValuationDistribution& d) {
    SrevResult out;
    out.prices.prices.assign(static_cast<std::size_t>(d.joint.n()), kInf);
    out.grid_restricted = d.g.kind != ValuationKind::additive;
    if (d.items == 0) return out;
    auto grids = detail::price_grids(d);
    std::vector<int> rad;
    std::vector<int> gitems;
    for (int i = 0; i < d.joint.n(); ++i)
        if (d.items & (1u << i)) {
            rad.push_back(static_cast<int>(grids[static_cast<std::size_t>(i)].size()));
            gitems.push_back(i);
        }
    // per-outcome singleton values
    std::vector<double> probs;
    std::vector<std::vector<double>> single;  // [outcome][position in gitems]
    std::vector<int> outcome(static_cast<std::size_t>(d.joint.n()));
    for (std::size_t idx = 0; idx < d.joint.size(); ++idx) {
        if (d.joint.p[idx] <= 0.0) continue;
        d.joint.space.decode(idx, outcome);
        probs.push_back(d.joint.p[idx]);
        std::vector<double> sv(gitems.size());
        for (std::size_t k = 0; k < gitems.size(); ++k)
            sv[k] = eval_outcome(d.g, outcome, 1u << gitems[k]);
        single.push_back(std::move(sv));
    }
    ProductSpace pspace(rad);
    std::vector<int> digits(rad.size());
    for (std::size_t pi = 0; pi < pspace.count; ++pi) {
        pspace.decode(pi, digits);
        double rev = 0.0;
        for (std::size_t o = 0; o < probs.size(); ++o) {
            int winner = -1;
            bool lone = true;
            for (std::size_t k = 0; k < gitems.size() && lone; ++k) {
                double pk = grids[static_cast<std::size_t>(gitems[k])][static_cast<std::size_t>(digits[k])];
                if (single[o][k] >= pk) {
                    if (winner >= 0) lone = false;
                    else winner = static_cast<int>(k);
                }
            }
            if (lone && winner >= 0)
                rev += probs[o] * grids[static_cast<std::size_t>(gitems[static_cast<std::size_t>(winner)])]
                                       [static_cast<std::size_t>(digits[static_cast<std::size_t>(winner)])];
        }
        if (rev > out.revenue + 1e-12 * std::max(1.0, rev)) {
            out.revenue = rev;
            for (std::size_t k = 0; k < gitems.size(); ++k)
                out.prices.prices[static_cast<std::size_t>(gitems[k])] =
                    grids[static_cast<std::size_t>(gitems[k])][static_cast<std::size_t>(digits[k])];
        }
    }
    return out;
}

// Optimal single-buyer revenue via the direct-revelation LP: per type, a
// lottery over subsets and a payment; IR per type and IC between every
// ordered type pair. Additive buyers use the per-item allocation form.
inline OptRevResult optimal_rev(const ValuationDistribution& d) {
    auto tl = detail::build_types(d);
    const std::size_t T = tl.prob.size();
    const std::size_t S = tl.subsets.size();
    OptRevResult out;
    if (T == 0 || d.items == 0) {
        // degenerate: nothing to sell
        return out;
    }

    LpProblem p;
    std::vector<int> item_pos;
    for (int i = 0; i < 32; ++i)
        if (d.items & (1u << i)) item_pos.push_back(i);
    const bool additive = d.g.kind == ValuationKind::additive;
    const std::size_t per_type = additive ? item_pos.size() + 1 : S + 1;
    if (T * (S + 1) > detail::lp_var_cap())
        throw std::runtime_error("optimal_rev: LP variable cap exceeded (" + std::to_string(T * (S + 1)) + ")");
    p.num_vars = static_cast<int>(T * per_type);
    p.objective.assign(static_cast<std::size_t>(p.num_vars), 0.0);
    auto pay_var = [&](std::size_t t) { return t * per_type + per_type - 1; };
    for (std::size_t t = 0; t < T; ++t) p.objective[pay_var(t)] = tl.prob[t];

    // singleton values per type (additive form)
    std::vector<std::vector<double>> sv(T, std::vector<double>(item_pos.size(), 0.0));
    if (additive) {
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t k = 0; k < item_pos.size(); ++k) {
                // compact subset index of {item k}: bit k
                std::size_t sidx = 1ull << k;
                sv[t][k] = tl.vals[t][sidx];
            }
    }
    // value to type `a` of type `b`'s allocation variables
    auto add_alloc_value = [&](LinearConstraint& c, std::size_t a, std::size_t b, double sign) {
        if (additive) {
            for (std::size_t k = 0; k < item_pos.size(); ++k)
                c.coeffs[b * per_type + k] += sign * sv[a][k];
        } else {
            for (std::size_t s = 0; s < S; ++s) c.coeffs[b * per_type + s] += sign * tl.vals[a][s];
        }
    };

    for (std::size_t t = 0; t < T; ++t) {
        if (additive) {
            for (std::size_t k = 0; k < item_pos.size(); ++k) {  // y <= 1 box
                LinearConstraint c;
                c.coeffs.assign(static_cast<std::size_t>(p.num_vars), 0.0);
                c.coeffs[t * per_type + k] = 1.0;
                c.rel = Relation::le;
                c.rhs = 1.0;
                p.constraints.push_back(std::move(c));
            }
        } else {  // lottery weights sum to 1
            LinearConstraint c;
            c.coeffs.assign(static_cast<std::size_t>(p.num_vars), 0.0);
            for (std::size_t s = 0; s < S; ++s) c.coeffs[t * per_type + s] = 1.0;
            c.rel = Relation::eq;
            c.rhs = 1.0;
            p.constraints.push_back(std::move(c));
        }
        {  // IR
            LinearConstraint c;
            c.coeffs.assign(static_cast<std::size_t>(p.num_vars), 0.0);
            add_alloc_value(c, t, t, 1.0);
            c.coeffs[pay_var(t)] -= 1.0;
            c.rel = Relation::ge;
            c.rhs = 0.0;
            p.constraints.push_back(std::move(c));
        }
    }
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t u = 0; u < T; ++u) {
            if (t == u) continue;  // IC: type t prefers own option to u's
            LinearConstraint c;
            c.coeffs.assign(static_cast<std::size_t>(p.num_vars), 0.0);
            add_alloc_value(c, t, t, 1.0);
            c.coeffs[pay_var(t)] -= 1.0;
            add_alloc_value(c, t, u, -1.0);
            c.coeffs[pay_var(u)] += 1.0;
            c.rel = Relation::ge;
            c.rhs = 0.0;
            p.constraints.push_back(std::move(c));
        }

    auto sol = lp_solve(p);
    if (sol.status != LpStatus::optimal) {
        throw std::runtime_error(std::string("optimal_rev: LP not optimal (") +
                                 (sol.status == LpStatus::infeasible   ? "infeasible"
                                  : sol.status == LpStatus::unbounded ? "unbounded"
                                                                       : "iteration limit") +
                                 "), max violation " + format_double(sol.max_violation));
    }
    out.revenue = sol.objective;
    out.lp_iterations = sol.iterations;
    out.lp_max_violation = sol.max_violation;
    out.lp_duality_gap = sol.duality_gap;
    for (std::size_t t = 0; t < T; ++t) {
        MenuOption opt;
        opt.price = std::max(0.0, sol.x[pay_var(t)]);
        if (additive) {
            // independent-inclusion lottery with the solved marginals
            std::vector<std::pair<std::uint32_t, double>> lot = {{0u, 1.0}};
            for (std::size_t k = 0; k < item_pos.size(); ++k) {
                double y = std::clamp(sol.x[t * per_type + k], 0.0, 1.0);
                std::vector<std::pair<std::uint32_t, double>> next;
                for (auto [mask, pr] : lot) {
                    if (y > 0.0) next.emplace_back(mask | (1u << item_pos[k]), pr * y);
                    if (y < 1.0) next.emplace_back(mask, pr * (1.0 - y));
                }
                lot = std::move(next);
            }
            opt.lottery = std::move(lot);
        } else {
            double total = 0.0;
            for (std::size_t s = 0; s < S; ++s) {
                double w = sol.x[t * per_type + s];
                if (w > 1e-12) {
                    opt.lottery.emplace_back(tl.subsets[s], w);
                    total += w;
                }
            }
            if (opt.lottery.empty()) opt.lottery.emplace_back(0u, 1.0);
            else
                for (auto& [mask, w] : opt.lottery) w /= total;
        }
        out.menu.options.push_back(std::move(opt));
    }
    return out;
}

}  // namespace mrfmech

#pragma once

// Monotone set-function valuations over typed items and their distributions.
//
// A SetValuation evaluates sets of (item, type-label) pairs. Additive and
// unit-demand valuations derive from the singleton table; subadditive ones
// carry a dense table over all partial assignments (digit 0 = item absent),
// which keeps class validation exhaustive at desk scale. A label index equal
// to the item's support size denotes the dummy type and contributes nothing.

#include <cstdint>
#include <functional>
#include <utility>

#include "mrf.hpp"
#include "util.hpp"

namespace mrfmech {

enum class ValuationKind { additive, unit_demand, subadditive_table };

inline const char* to_string(ValuationKind k) {
    switch (k) {
        case ValuationKind::additive: return "additive";
        case ValuationKind::unit_demand: return "unit_demand";
        case ValuationKind::subadditive_table: return "subadditive";
    }
    return "?";
}

struct SetValuation {
    ValuationKind kind = ValuationKind::additive;
    std::vector<std::vector<double>> singleton;  // [item][label], >= 0
    std::vector<double> full_table;              // subadditive only; mixed-radix over (m_i+1), last item fastest

    int n_items() const { return static_cast<int>(singleton.size()); }

    std::size_t table_index(std::span<const int> digits) const {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < singleton.size(); ++i)
            idx = idx * (singleton[i].size() + 1) + static_cast<std::size_t>(digits[i]);
        return idx;
    }
    std::size_t table_size() const {
        std::size_t sz = 1;
        for (const auto& s : singleton) sz *= s.size() + 1;
        return sz;
    }
};

// Value of {(i, outcome[i]) : i in items}. Labels at or beyond the item's
// support size are dummies and are skipped.
inline double eval_outcome(const SetValuation& g, std::span<const int> outcome, std::uint32_t items) {
    switch (g.kind) {
        case ValuationKind::additive: {
            double s = 0.0;
            for (int i = 0; i < g.n_items(); ++i) {
                if (!(items & (1u << i))) continue;
                auto li = static_cast<std::size_t>(outcome[static_cast<std::size_t>(i)]);
                if (li >= g.singleton[static_cast<std::size_t>(i)].size()) continue;
                s += g.singleton[static_cast<std::size_t>(i)][li];
            }
            return s;
        }
        case ValuationKind::unit_demand: {
            double s = 0.0;
            for (int i = 0; i < g.n_items(); ++i) {
                if (!(items & (1u << i))) continue;
                auto li = static_cast<std::size_t>(outcome[static_cast<std::size_t>(i)]);
                if (li >= g.singleton[static_cast<std::size_t>(i)].size()) continue;
                s = std::max(s, g.singleton[static_cast<std::size_t>(i)][li]);
            }
            return s;
        }
        case ValuationKind::subadditive_table: {
            std::vector<int> digits(static_cast<std::size_t>(g.n_items()), 0);
            for (int i = 0; i < g.n_items(); ++i) {
                if (!(items & (1u << i))) continue;
                int li = outcome[static_cast<std::size_t>(i)];
                if (li < 0 || static_cast<std::size_t>(li) > g.singleton[static_cast<std::size_t>(i)].size())
                    throw std::out_of_range("eval: label out of range");
                if (static_cast<std::size_t>(li) == g.singleton[static_cast<std::size_t>(i)].size()) continue;
                digits[static_cast<std::size_t>(i)] = li + 1;
            }
            std::size_t idx = g.table_index(digits);
            if (idx >= g.full_table.size()) throw std::out_of_range("eval: missing table entry");
            return g.full_table[idx];
        }
    }
    return 0.0;
}

// Value of an explicit typed set; at most one pair per item.
inline double value(const SetValuation& g, std::span<const std::pair<int, int>> typed) {
    std::vector<int> outcome(static_cast<std::size_t>(g.n_items()), -1);
    std::uint32_t items = 0;
    for (auto [i, l] : typed) {
        if (i < 0 || i >= g.n_items()) throw std::out_of_range("value: item out of range");
        if (items & (1u << i)) throw std::invalid_argument("value: more than one type for an item");
        items |= 1u << i;
        outcome[static_cast<std::size_t>(i)] = l;
    }
    for (int i = 0; i < g.n_items(); ++i)
        if (!(items & (1u << i))) outcome[static_cast<std::size_t>(i)] = static_cast<int>(g.singleton[static_cast<std::size_t>(i)].size());
    return eval_outcome(g, outcome, (1u << g.n_items()) - 1);
}

struct ClassReport {
    bool pass = true;
    std::string violation;  // first violation found, empty when pass
};

// Exhaustive monotonicity + subadditivity check over all partial typed sets.
// Sets are partial assignments: digit 0 = absent, digit w+1 = label w.
inline ClassReport validate_class(const SetValuation& g) {
    ClassReport rep;
    auto fail = [&](std::string msg) {
        rep.pass = false;
        rep.violation = std::move(msg);
        return rep;
    };
    const int n = g.n_items();
    for (int i = 0; i < n; ++i)
        for (double v : g.singleton[static_cast<std::size_t>(i)])
            if (!(v >= 0.0) || !std::isfinite(v)) return fail("negative or non-finite singleton value");
    std::vector<int> rad(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) rad[static_cast<std::size_t>(i)] = static_cast<int>(g.singleton[static_cast<std::size_t>(i)].size()) + 1;
    ProductSpace sets(rad);
    auto set_value = [&](std::span<const int> digits) {
        // evaluate a partial assignment through the class evaluator
        std::vector<int> outcome(static_cast<std::size_t>(n), 0);
        std::uint32_t items = 0;
        for (int i = 0; i < n; ++i) {
            if (digits[static_cast<std::size_t>(i)] > 0) {
                outcome[static_cast<std::size_t>(i)] = digits[static_cast<std::size_t>(i)] - 1;
                items |= 1u << i;
            }
        }
        return eval_outcome(g, outcome, items);
    };
    if (g.kind == ValuationKind::subadditive_table) {
        if (g.full_table.size() != sets.count) return fail("full table not total over its domain");
        for (double v : g.full_table)
            if (!(v >= 0.0) || !std::isfinite(v)) return fail("negative or non-finite table entry");
        if (g.full_table[0] != 0.0) return fail("g(empty set) must be 0");
        // singleton consistency with the table
        std::vector<int> digits(static_cast<std::size_t>(n), 0);
        for (int i = 0; i < n; ++i) {
            for (std::size_t w = 0; w + 1 < static_cast<std::size_t>(rad[static_cast<std::size_t>(i)]); ++w) {
                std::fill(digits.begin(), digits.end(), 0);
                digits[static_cast<std::size_t>(i)] = static_cast<int>(w) + 1;
                if (g.full_table[sets.encode(digits)] != g.singleton[static_cast<std::size_t>(i)][w])
                    return fail("singleton table disagrees with full table");
            }
        }
    }
    std::vector<int> u(static_cast<std::size_t>(n));
    std::vector<int> v(static_cast<std::size_t>(n));
    // monotonicity: dropping any single present item never increases value
    for (std::size_t idx = 0; idx < sets.count; ++idx) {
        sets.decode(idx, u);
        double gu = set_value(u);
        for (int i = 0; i < n; ++i) {
            if (u[static_cast<std::size_t>(i)] == 0) continue;
            v = u;
            v[static_cast<std::size_t>(i)] = 0;
            if (set_value(v) > gu + 1e-12)
                return fail("monotonicity violated when removing item " + std::to_string(i));
        }
    }
    // subadditivity: g(S ∪ T) <= g(S) + g(T) over all compatible splits
    std::vector<int> s(static_cast<std::size_t>(n)), t(static_cast<std::size_t>(n));
    for (std::size_t idx = 0; idx < sets.count; ++idx) {
        sets.decode(idx, u);
        std::vector<int> present;
        for (int i = 0; i < n; ++i)
            if (u[static_cast<std::size_t>(i)] > 0) present.push_back(i);
        if (present.size() < 2) continue;
        double gu = set_value(u);
        const std::size_t ways = static_cast<std::size_t>(std::pow(3.0, static_cast<double>(present.size())) + 0.5);
        for (std::size_t code = 0; code < ways; ++code) {
            std::fill(s.begin(), s.end(), 0);
            std::fill(t.begin(), t.end(), 0);
            std::size_t c = code;
            for (int i : present) {
                int part = static_cast<int>(c % 3);  // 0: S only, 1: T only, 2: both
                c /= 3;
                if (part != 1) s[static_cast<std::size_t>(i)] = u[static_cast<std::size_t>(i)];
                if (part != 0) t[static_cast<std::size_t>(i)] = u[static_cast<std::size_t>(i)];
            }
            if (gu > set_value(s) + set_value(t) + 1e-12)
                return fail("subadditivity violated on a split of a " + std::to_string(present.size()) + "-item set");
        }
    }
    return rep;
}

// Zeroes out (item,label) entries not kept; for table valuations the result
// evaluates g on the kept sub-assignment, which preserves monotonicity and
// subadditivity.
inline SetValuation filter_by_singleton(const SetValuation& g, const std::function<bool(int, int)>& keep) {
    SetValuation out = g;
    for (int i = 0; i < g.n_items(); ++i)
        for (std::size_t w = 0; w < g.singleton[static_cast<std::size_t>(i)].size(); ++w)
            if (!keep(i, static_cast<int>(w))) out.singleton[static_cast<std::size_t>(i)][w] = 0.0;
    if (g.kind == ValuationKind::subadditive_table) {
        std::vector<int> rad(static_cast<std::size_t>(g.n_items()));
        for (int i = 0; i < g.n_items(); ++i)
            rad[static_cast<std::size_t>(i)] = static_cast<int>(g.singleton[static_cast<std::size_t>(i)].size()) + 1;
        ProductSpace sets(rad);
        std::vector<int> u(static_cast<std::size_t>(g.n_items()));
        for (std::size_t idx = 0; idx < sets.count; ++idx) {
            sets.decode(idx, u);
            auto filtered = u;
            for (int i = 0; i < g.n_items(); ++i)
                if (u[static_cast<std::size_t>(i)] > 0 && !keep(i, u[static_cast<std::size_t>(i)] - 1))
                    filtered[static_cast<std::size_t>(i)] = 0;
            out.full_table[idx] = g.full_table[g.table_index(filtered)];
        }
    }
    return out;
}

// Buyer valuation distribution: exact joint over types, a set valuation, and
// the set of items currently in play.
struct ValuationDistribution {
    JointTable joint;
    SetValuation g;
    std::uint32_t items = 0;

    int n_coords() const { return joint.n(); }
    std::uint32_t all_items() const { return (1u << joint.n()) - 1; }
};

inline ValuationDistribution make_distribution(const Mrf& m, SetValuation g, std::size_t cap = 1'000'000) {
    ValuationDistribution d;
    d.joint = joint_table(m, cap);
    d.g = std::move(g);
    d.items = (1u << d.joint.n()) - 1;
    return d;
}

inline ValuationDistribution restrict(const ValuationDistribution& d, std::uint32_t item_subset) {
    if ((item_subset & ~d.items) != 0) throw std::invalid_argument("restrict: subset exceeds items in play");
    ValuationDistribution out = d;
    out.items = item_subset;
    return out;
}

inline double val(const ValuationDistribution& d) {
    double s = 0.0;
    std::vector<int> outcome(static_cast<std::size_t>(d.joint.n()));
    for (std::size_t idx = 0; idx < d.joint.size(); ++idx) {
        if (d.joint.p[idx] == 0.0) continue;
        d.joint.space.decode(idx, outcome);
        s += d.joint.p[idx] * eval_outcome(d.g, outcome, d.items);
    }
    return s;
}

// Tail set under per-item thresholds: items in play whose singleton value
// meets the threshold (+inf threshold = never in the tail).
inline std::uint32_t tail_set(const ValuationDistribution& d, std::span<const double> thresholds,
                              std::span<const int> outcome) {
    std::uint32_t t = 0;
    for (int i = 0; i < d.joint.n(); ++i) {
        if (!(d.items & (1u << i))) continue;
        double vi = d.g.singleton[static_cast<std::size_t>(i)][static_cast<std::size_t>(outcome[static_cast<std::size_t>(i)])];
        if (vi >= thresholds[static_cast<std::size_t>(i)]) t |= 1u << i;
    }
    return t;
}

inline ValuationDistribution condition_on_tail(const ValuationDistribution& d, std::span<const double> thresholds,
                                               std::uint32_t tail_mask) {
    ValuationDistribution out = d;
    out.joint = conditional(d.joint, [&](std::span<const int> s) { return tail_set(d, thresholds, s) == tail_mask; });
    return out;
}

struct RhoReport {
    double rho = 0.0;
    std::uint32_t witness_j = 0;
    std::vector<int> witness_outcome;
    int skipped = 0;  // positive-probability outcomes with all-zero denominator
};

// rho = max over excluded item j and outcomes of
//   g(everything but j) / max_{i != j} g({t_i}).
inline RhoReport rho(const ValuationDistribution& d) {
    if (popcount32(d.items) < 2) throw std::invalid_argument("rho: needs at least two items in play");
    RhoReport rep;
    rep.rho = -kInf;
    std::vector<int> outcome(static_cast<std::size_t>(d.joint.n()));
    for (std::size_t idx = 0; idx < d.joint.size(); ++idx) {
        if (d.joint.p[idx] == 0.0) continue;
        d.joint.space.decode(idx, outcome);
        for (int j = 0; j < d.joint.n(); ++j) {
            if (!(d.items & (1u << j))) continue;
            double den = 0.0;
            for (int i = 0; i < d.joint.n(); ++i) {
                if (i == j || !(d.items & (1u << i))) continue;
                den = std::max(den, eval_outcome(d.g, outcome, 1u << i));
            }
            if (den <= 0.0) {
                rep.skipped += 1;
                continue;
            }
            double num = eval_outcome(d.g, outcome, d.items & ~(1u << j));
            double r = num / den;
            if (r > rep.rho) {
                rep.rho = r;
                rep.witness_j = static_cast<std::uint32_t>(j);
                rep.witness_outcome = outcome;
            }
        }
    }
    if (!std::isfinite(rep.rho) || rep.rho < 0.0)
        throw std::runtime_error("rho: undefined, all denominators zero");
    return rep;
}

}  // namespace mrfmech

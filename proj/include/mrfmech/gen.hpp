#pragma once

// Random instance generation for the experiment suites. Everything is
// deterministic in the seed: one mt19937_64 stream per instance, consumed in
// a fixed order.

#include <random>

#include "mrf.hpp"
#include "valuation.hpp"

namespace mrfmech::gen {

struct MrfGenConfig {
    int n_min = 2, n_max = 3;
    int support_min = 2, support_max = 3;
    double potential_cap = 1.0;
};

inline Mrf random_mrf(std::mt19937_64& rng, const MrfGenConfig& cfg) {
    const int n = uniform_int(rng, cfg.n_min, cfg.n_max);
    Mrf m;
    m.supports.resize(static_cast<std::size_t>(n));
    m.vertex_potentials.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        int sz = uniform_int(rng, cfg.support_min, cfg.support_max);
        auto& sup = m.supports[static_cast<std::size_t>(i)];
        for (int w = 0; w < sz; ++w) sup.push_back("t" + std::to_string(w));
        auto& pot = m.vertex_potentials[static_cast<std::size_t>(i)];
        for (int w = 0; w < sz; ++w) pot.push_back((2.0 * uniform01(rng) - 1.0) * cfg.potential_cap);
    }
    // random hyperedges of size 2-3, no duplicates
    int max_edges = n >= 2 ? n : 0;
    int want = uniform_int(rng, 0, max_edges);
    std::vector<std::vector<int>> used;
    for (int e = 0; e < want; ++e) {
        int k = (n >= 3 && uniform01(rng) < 0.35) ? 3 : 2;
        if (k > n) k = n;
        std::vector<int> mem;
        while (static_cast<int>(mem.size()) < k) {
            int v = uniform_int(rng, 0, n - 1);
            if (std::find(mem.begin(), mem.end(), v) == mem.end()) mem.push_back(v);
        }
        std::sort(mem.begin(), mem.end());
        if (std::find(used.begin(), used.end(), mem) != used.end()) continue;
        used.push_back(mem);
        std::size_t sz = 1;
        for (int v : mem) sz *= m.supports[static_cast<std::size_t>(v)].size();
        MrfEdge edge;
        edge.members = mem;
        edge.table.resize(sz);
        for (auto& t : edge.table) t = (2.0 * uniform01(rng) - 1.0) * cfg.potential_cap;
        m.edges.push_back(std::move(edge));
    }
    return m;
}

inline Mrf random_mrf(std::mt19937_64& rng, int n_min, int n_max, int support_min, int support_max,
                      double potential_cap) {
    return random_mrf(rng, MrfGenConfig{n_min, n_max, support_min, support_max, potential_cap});
}

// Singleton values drawn from a log-uniform grid of powers of two; the grid
// keeps generated files byte-stable and spans enough range for nonempty tails
// at small delta.
inline double grid_value(std::mt19937_64& rng, int lo_exp = -3, int hi_exp = 5) {
    return std::ldexp(1.0, uniform_int(rng, lo_exp, hi_exp));
}

inline SetValuation random_valuation(std::mt19937_64& rng, ValuationKind kind, const std::vector<int>& radices) {
    SetValuation g;
    g.kind = kind;
    g.singleton.resize(radices.size());
    for (std::size_t i = 0; i < radices.size(); ++i) {
        for (int w = 0; w < radices[i]; ++w) g.singleton[i].push_back(grid_value(rng));
    }
    if (kind == ValuationKind::subadditive_table) {
        // min of the additive sum and a unit-demand envelope alpha*max + beta.
        // With alpha <= 1 and beta >= (1-alpha)*v_max this is monotone and
        // subadditive and leaves singleton values intact.
        const double alphas[] = {0.0, 0.25, 0.5, 0.75, 1.0};
        double alpha = alphas[uniform_int(rng, 0, 4)];
        double vmax = 0.0;
        for (const auto& s : g.singleton)
            for (double v : s) vmax = std::max(vmax, v);
        double beta = (1.0 - alpha) * vmax * std::ldexp(1.0, uniform_int(rng, 0, 1));
        std::vector<int> rad(radices.size());
        for (std::size_t i = 0; i < radices.size(); ++i) rad[i] = radices[i] + 1;
        ProductSpace sets(rad);
        g.full_table.resize(sets.count);
        std::vector<int> u(rad.size());
        for (std::size_t idx = 0; idx < sets.count; ++idx) {
            sets.decode(idx, u);
            double add = 0.0, mx = 0.0;
            bool any = false;
            for (std::size_t i = 0; i < rad.size(); ++i) {
                if (u[i] == 0) continue;
                double v = g.singleton[i][static_cast<std::size_t>(u[i] - 1)];
                add += v;
                mx = std::max(mx, v);
                any = true;
            }
            g.full_table[idx] = any ? std::min(add, alpha * mx + beta) : 0.0;
        }
    }
    return g;
}

struct Instance {
    std::string id;
    Mrf mrf;
    SetValuation g;
};

struct InstanceGenConfig {
    MrfGenConfig mrf;
    ValuationKind kind = ValuationKind::additive;
    int value_lo_exp = -3, value_hi_exp = 5;
};

inline Instance random_instance(std::uint64_t seed, const InstanceGenConfig& cfg) {
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(attempt));
        Instance inst;
        inst.mrf = random_mrf(rng, cfg.mrf);
        inst.g = random_valuation(rng, cfg.kind, inst.mrf.radices());
        if (validate_class(inst.g).pass) return inst;
    }
    throw std::runtime_error("random_instance: valuation validation kept failing");
}

// Binary-support instance with rare actives, for contention resolution: the
// label-1 potentials are biased down and instances are retried until the
// exact activity marginals sum to at most 1.
inline Mrf random_sparse_binary_mrf(std::mt19937_64& rng, int n_min, int n_max, double potential_cap) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        const int n = uniform_int(rng, n_min, n_max);
        Mrf m;
        m.supports.assign(static_cast<std::size_t>(n), {"0", "1"});
        m.vertex_potentials.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            m.vertex_potentials[static_cast<std::size_t>(i)] = {0.0, -1.5 - 2.5 * uniform01(rng) - std::log(static_cast<double>(n))};
        int want = uniform_int(rng, 0, n - 1);
        std::vector<std::vector<int>> used;
        for (int e = 0; e < want; ++e) {
            std::vector<int> mem;
            while (static_cast<int>(mem.size()) < 2) {
                int v = uniform_int(rng, 0, n - 1);
                if (std::find(mem.begin(), mem.end(), v) == mem.end()) mem.push_back(v);
            }
            std::sort(mem.begin(), mem.end());
            if (std::find(used.begin(), used.end(), mem) != used.end()) continue;
            used.push_back(mem);
            MrfEdge edge;
            edge.members = mem;
            edge.table.resize(4);
            for (auto& t : edge.table) t = (2.0 * uniform01(rng) - 1.0) * potential_cap;
            m.edges.push_back(std::move(edge));
        }
        auto jt = joint_table(m);
        double sum = 0.0;
        for (int i = 0; i < n; ++i) sum += marginal(jt, i)[1];
        if (sum <= 1.0) return m;
    }
    throw std::runtime_error("random_sparse_binary_mrf: could not satisfy sum of marginals <= 1");
}

}  // namespace mrfmech::gen

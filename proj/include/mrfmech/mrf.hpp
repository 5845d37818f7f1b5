#pragma once

// Finite-support Markov random fields with exact joint inference.
//
// An Mrf stores label sets, vertex potentials and hyperedge potentials; the
// joint distribution is proportional to exp(sum of potentials) and is
// materialized as a flat table (JointTable) over the full product support.
// All downstream expectation, conditioning and revenue computations read
// from that single table.

#include <bit>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <string>

#include "util.hpp"

namespace mrfmech {

struct MrfEdge {
    std::vector<int> members;   // >= 2 distinct vertex indices
    std::vector<double> table;  // mixed-radix over member supports, last member fastest
};

struct Mrf {
    std::vector<std::vector<std::string>> supports;  // label names per vertex
    std::vector<std::vector<double>> vertex_potentials;
    std::vector<MrfEdge> edges;

    int n() const { return static_cast<int>(supports.size()); }
    std::vector<int> radices() const {
        std::vector<int> r(supports.size());
        for (std::size_t i = 0; i < supports.size(); ++i) r[i] = static_cast<int>(supports[i].size());
        return r;
    }
};

inline void validate_mrf(const Mrf& m) {
    if (m.supports.empty()) throw std::invalid_argument("mrf: needs at least one vertex");
    if (m.vertex_potentials.size() != m.supports.size())
        throw std::invalid_argument("mrf: vertex potential count mismatch");
    for (std::size_t i = 0; i < m.supports.size(); ++i) {
        if (m.supports[i].empty()) throw std::invalid_argument("mrf: empty support");
        if (m.vertex_potentials[i].size() != m.supports[i].size())
            throw std::invalid_argument("mrf: vertex potential table not total");
        for (double v : m.vertex_potentials[i])
            if (!std::isfinite(v)) throw std::invalid_argument("mrf: non-finite vertex potential");
    }
    for (const auto& e : m.edges) {
        if (e.members.size() < 2) throw std::invalid_argument("mrf: hyperedge smaller than 2");
        std::size_t want = 1;
        std::vector<int> seen;
        for (int v : e.members) {
            if (v < 0 || v >= m.n()) throw std::invalid_argument("mrf: edge member out of range");
            if (std::find(seen.begin(), seen.end(), v) != seen.end())
                throw std::invalid_argument("mrf: duplicate edge member");
            seen.push_back(v);
            want *= m.supports[static_cast<std::size_t>(v)].size();
        }
        if (e.table.size() != want) throw std::invalid_argument("mrf: edge potential table not total");
        for (double v : e.table)
            if (!std::isfinite(v)) throw std::invalid_argument("mrf: non-finite edge potential");
    }
}

// Exact probability table over the full product support.
struct JointTable {
    ProductSpace space;
    std::vector<double> p;

    int n() const { return static_cast<int>(space.dims()); }
    std::size_t size() const { return space.count; }
    double total() const { return std::accumulate(p.begin(), p.end(), 0.0); }
};

inline double edge_potential_at(const Mrf& m, const MrfEdge& e, std::span<const int> outcome) {
    std::size_t idx = 0;
    for (int v : e.members) {
        idx = idx * m.supports[static_cast<std::size_t>(v)].size() +
              static_cast<std::size_t>(outcome[static_cast<std::size_t>(v)]);
    }
    return e.table[idx];
}

inline JointTable joint_table(const Mrf& m, std::size_t cap = 1'000'000) {
    validate_mrf(m);
    ProductSpace space(m.radices());
    if (space.count > cap)
        throw std::runtime_error("joint_table: product support size " + std::to_string(space.count) +
                                 " exceeds cap " + std::to_string(cap));
    std::vector<double> logw(space.count, 0.0);
    std::vector<int> s(space.dims());
    for (std::size_t idx = 0; idx < space.count; ++idx) {
        space.decode(idx, s);
        double w = 0.0;
        for (std::size_t i = 0; i < space.dims(); ++i) w += m.vertex_potentials[i][static_cast<std::size_t>(s[i])];
        for (const auto& e : m.edges) w += edge_potential_at(m, e, s);
        logw[idx] = w;
    }
    // max-shifted normalization keeps |psi| up to ~30 per term safe
    double mx = *std::max_element(logw.begin(), logw.end());
    JointTable jt;
    jt.space = std::move(space);
    jt.p.resize(logw.size());
    double z = 0.0;
    for (std::size_t i = 0; i < logw.size(); ++i) {
        jt.p[i] = std::exp(logw[i] - mx);
        z += jt.p[i];
    }
    for (auto& v : jt.p) v /= z;
    return jt;
}

struct DeltaReport {
    double delta = 0.0;
    int witness_vertex = 0;
    std::vector<int> witness_outcome;
};

// Max over vertices i and outcomes s of |sum of incident edge potentials|.
// Only coordinates touched by incident edges matter, so the scan runs over
// that sub-product and pads the witness with zeros elsewhere.
inline DeltaReport max_weighted_degree(const Mrf& m) {
    validate_mrf(m);
    DeltaReport rep;
    rep.witness_outcome.assign(static_cast<std::size_t>(m.n()), 0);
    for (int i = 0; i < m.n(); ++i) {
        std::vector<int> incident;
        for (std::size_t k = 0; k < m.edges.size(); ++k) {
            const auto& e = m.edges[k];
            if (std::find(e.members.begin(), e.members.end(), i) != e.members.end())
                incident.push_back(static_cast<int>(k));
        }
        if (incident.empty()) continue;
        std::vector<int> touched;  // vertices feeding any incident edge
        for (int k : incident)
            for (int v : m.edges[static_cast<std::size_t>(k)].members)
                if (std::find(touched.begin(), touched.end(), v) == touched.end()) touched.push_back(v);
        std::sort(touched.begin(), touched.end());
        std::vector<int> radii(touched.size());
        for (std::size_t t = 0; t < touched.size(); ++t)
            radii[t] = static_cast<int>(m.supports[static_cast<std::size_t>(touched[t])].size());
        ProductSpace sub(radii);
        std::vector<int> digits(sub.dims());
        std::vector<int> full(static_cast<std::size_t>(m.n()), 0);
        for (std::size_t idx = 0; idx < sub.count; ++idx) {
            sub.decode(idx, digits);
            for (std::size_t t = 0; t < touched.size(); ++t) full[static_cast<std::size_t>(touched[t])] = digits[t];
            double s = 0.0;
            for (int k : incident) s += edge_potential_at(m, m.edges[static_cast<std::size_t>(k)], full);
            if (std::abs(s) > rep.delta) {
                rep.delta = std::abs(s);
                rep.witness_vertex = i;
                rep.witness_outcome = full;
            }
        }
    }
    return rep;
}

inline std::vector<double> marginal(const JointTable& jt, int i) {
    if (i < 0 || i >= jt.n()) throw std::invalid_argument("marginal: index out of range");
    std::vector<double> out(static_cast<std::size_t>(jt.space.radices[static_cast<std::size_t>(i)]), 0.0);
    for (std::size_t idx = 0; idx < jt.size(); ++idx)
        out[static_cast<std::size_t>(jt.space.digit(idx, static_cast<std::size_t>(i)))] += jt.p[idx];
    return out;
}

// Renormalized restriction to an event. The domain stays the full product
// support; excluded outcomes get probability zero.
inline JointTable conditional(const JointTable& jt, const std::function<bool(std::span<const int>)>& event) {
    JointTable out;
    out.space = jt.space;
    out.p.assign(jt.p.size(), 0.0);
    std::vector<int> s(jt.space.dims());
    double total = 0.0;
    for (std::size_t idx = 0; idx < jt.size(); ++idx) {
        if (jt.p[idx] == 0.0) continue;
        jt.space.decode(idx, s);
        if (event(s)) {
            out.p[idx] = jt.p[idx];
            total += jt.p[idx];
        }
    }
    if (total <= 0.0) throw std::runtime_error("conditional: event has zero probability");
    for (auto& v : out.p) v /= total;
    return out;
}

struct ConditioningReport {
    double max_ratio = 1.0;
    double min_ratio = 1.0;
    bool pass = true;
};

struct ConditioningOptions {
    std::size_t exhaustive_limit = 12;  // complement-outcome count for exhaustive subsets
    std::size_t sample_count = 10'000;
    std::uint64_t seed = 1;
    double rel_tol = 1e-9;
};

// Checks Pr[Ei ∧ E-i] / (Pr[Ei]·Pr[E-i]) ∈ [e^{-4Δ}, e^{4Δ}] over events on
// one coordinate vs the rest. Complement-side events are enumerated
// exhaustively when the complement outcome count is small, sampled otherwise.
inline ConditioningReport check_conditioning_bounds(const JointTable& jt, double delta,
                                                    const ConditioningOptions& opt = {}) {
    ConditioningReport rep;
    rep.max_ratio = -kInf;
    rep.min_ratio = kInf;
    const double lo = std::exp(-4.0 * delta), hi = std::exp(4.0 * delta);
    std::mt19937_64 rng(opt.seed);
    const int n = jt.n();
    bool any = false;
    for (int i = 0; i < n; ++i) {
        const std::size_t ri = static_cast<std::size_t>(jt.space.radices[static_cast<std::size_t>(i)]);
        // complement space: all coordinates but i
        std::vector<int> rad;
        for (int j = 0; j < n; ++j)
            if (j != i) rad.push_back(jt.space.radices[static_cast<std::size_t>(j)]);
        if (rad.empty()) continue;  // n == 1: no complement events
        ProductSpace comp(rad);
        const std::size_t M = comp.count;
        // per complement outcome: joint mass with t_i in Ei, and total mass
        std::vector<double> b(M, 0.0);
        std::vector<double> margin_i(ri, 0.0);
        std::vector<std::vector<double>> a_by_label(ri, std::vector<double>(M, 0.0));
        std::vector<int> s(static_cast<std::size_t>(n));
        std::vector<int> cdig(comp.dims());
        for (std::size_t idx = 0; idx < jt.size(); ++idx) {
            double pr = jt.p[idx];
            if (pr == 0.0) continue;
            jt.space.decode(idx, s);
            for (int j = 0, t = 0; j < n; ++j)
                if (j != i) cdig[static_cast<std::size_t>(t++)] = s[static_cast<std::size_t>(j)];
            std::size_t c = comp.encode(cdig);
            b[c] += pr;
            a_by_label[static_cast<std::size_t>(s[static_cast<std::size_t>(i)])][c] += pr;
            margin_i[static_cast<std::size_t>(s[static_cast<std::size_t>(i)])] += pr;
        }
        // all nonempty label subsets Ei
        for (std::uint32_t emask = 1; emask < (1u << ri); ++emask) {
            double pr_ei = 0.0;
            std::vector<double> a(M, 0.0);
            for (std::size_t l = 0; l < ri; ++l) {
                if (emask & (1u << l)) {
                    pr_ei += margin_i[l];
                    for (std::size_t c = 0; c < M; ++c) a[c] += a_by_label[l][c];
                }
            }
            if (pr_ei <= 0.0) continue;
            auto consider = [&](double pa, double pb) {
                if (pb <= 0.0) return;
                double ratio = pa / (pr_ei * pb);
                rep.max_ratio = std::max(rep.max_ratio, ratio);
                rep.min_ratio = std::min(rep.min_ratio, ratio);
                any = true;
            };
            if (M <= opt.exhaustive_limit) {
                // incremental subset sums via lowest-set-bit recurrence
                std::vector<double> sa(1ull << M, 0.0), sb(1ull << M, 0.0);
                for (std::size_t mask = 1; mask < (1ull << M); ++mask) {
                    std::size_t lb = mask & (~mask + 1);
                    std::size_t bit = static_cast<std::size_t>(std::countr_zero(mask));
                    sa[mask] = sa[mask ^ lb] + a[bit];
                    sb[mask] = sb[mask ^ lb] + b[bit];
                    consider(sa[mask], sb[mask]);
                }
            } else {
                for (std::size_t t = 0; t < opt.sample_count; ++t) {
                    double pa = 0.0, pb = 0.0;
                    bool nonempty = false;
                    std::uint64_t bits = 0;
                    int have = 0;
                    for (std::size_t c = 0; c < M; ++c) {
                        if (have == 0) {
                            bits = rng();
                            have = 64;
                        }
                        if (bits & 1) {
                            pa += a[c];
                            pb += b[c];
                            nonempty = true;
                        }
                        bits >>= 1;
                        --have;
                    }
                    if (nonempty) consider(pa, pb);
                }
            }
        }
    }
    if (!any) {
        rep.max_ratio = rep.min_ratio = 1.0;
        rep.pass = true;
        return rep;
    }
    rep.pass = rep.max_ratio <= hi * (1.0 + opt.rel_tol) && rep.min_ratio >= lo * (1.0 - opt.rel_tol);
    return rep;
}

// Target conditional for one path vertex: distribution over its labels,
// pinned at the given predecessor label.
struct AnchoredTarget {
    int anchor = 0;
    std::vector<double> probs;
};

// Builds a path MRF (edges {i-1,i} with the given potential tables) whose
// vertex potentials reproduce the requested conditionals: vertex 0 gets the
// root distribution, vertex i>=1 gets Pr[t_i = w | t_{i-1} = anchor_i] =
// target. Potentials are fixed in descending vertex order; the downstream
// partition weights are tracked in log domain.
inline Mrf build_path_mrf(std::vector<std::vector<std::string>> supports,
                          std::vector<std::vector<double>> edge_tables, std::vector<double> root_target,
                          std::vector<AnchoredTarget> anchored) {
    const std::size_t n = supports.size();
    if (n == 0) throw std::invalid_argument("build_path_mrf: no vertices");
    if (edge_tables.size() != n - 1 || anchored.size() != n - 1)
        throw std::invalid_argument("build_path_mrf: need one edge table and one anchored target per consecutive pair");
    auto check_target = [](const std::vector<double>& t, std::size_t support_size) {
        if (t.size() != support_size) throw std::invalid_argument("build_path_mrf: target size mismatch");
        double sum = 0.0;
        for (double v : t) {
            if (!(v > 0.0) || (support_size > 1 && v >= 1.0))
                throw std::runtime_error("build_path_mrf: target probabilities must lie strictly inside (0,1)");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw std::runtime_error("build_path_mrf: target probabilities must sum to 1");
    };
    check_target(root_target, supports[0].size());
    for (std::size_t i = 1; i < n; ++i) {
        check_target(anchored[i - 1].probs, supports[i].size());
        if (anchored[i - 1].anchor < 0 ||
            anchored[i - 1].anchor >= static_cast<int>(supports[i - 1].size()))
            throw std::invalid_argument("build_path_mrf: anchor label out of range");
    }

    Mrf m;
    m.supports = supports;
    m.vertex_potentials.assign(n, {});
    for (std::size_t i = 0; i + 1 < n; ++i) {
        MrfEdge e;
        e.members = {static_cast<int>(i), static_cast<int>(i + 1)};
        if (edge_tables[i].size() != supports[i].size() * supports[i + 1].size())
            throw std::invalid_argument("build_path_mrf: edge table size mismatch");
        e.table = edge_tables[i];
        m.edges.push_back(std::move(e));
    }
    auto edge_psi = [&](std::size_t i, int a, int b) {  // edge (i, i+1)
        return m.edges[i].table[static_cast<std::size_t>(a) * supports[i + 1].size() + static_cast<std::size_t>(b)];
    };

    // logZ[w]: downstream partition weight given t_i = w, potentials of
    // vertices > i already fixed
    std::vector<double> logZ(supports[n - 1].size(), 0.0);
    for (std::size_t i = n; i-- > 0;) {
        const std::size_t sz = supports[i].size();
        std::vector<double> psi(sz);
        if (i == 0) {
            for (std::size_t w = 0; w < sz; ++w) psi[w] = std::log(root_target[w]) - logZ[w];
        } else {
            const auto& tg = anchored[i - 1];
            for (std::size_t w = 0; w < sz; ++w) {
                double loglam = edge_psi(i - 1, tg.anchor, static_cast<int>(w)) + logZ[w];
                psi[w] = std::log(tg.probs[w]) - loglam;
            }
        }
        m.vertex_potentials[i].assign(psi.begin(), psi.end());
        if (i > 0) {
            std::vector<double> nz(supports[i - 1].size());
            std::vector<double> terms(sz);
            for (std::size_t x = 0; x < supports[i - 1].size(); ++x) {
                for (std::size_t w = 0; w < sz; ++w)
                    terms[w] = psi[w] + edge_psi(i - 1, static_cast<int>(x), static_cast<int>(w)) + logZ[w];
                nz[x] = log_sum_exp(terms);
            }
            logZ = std::move(nz);
        }
    }
    return m;
}

// Symmetric ±delta coupling table for a pair of label sets: +delta when the
// label names agree, -delta otherwise.
inline std::vector<double> agree_disagree_table(const std::vector<std::string>& a,
                                                const std::vector<std::string>& b, double delta) {
    std::vector<double> t;
    t.reserve(a.size() * b.size());
    for (const auto& x : a)
        for (const auto& y : b) t.push_back(x == y ? delta : -delta);
    return t;
}

// Independent lower envelope: per coordinate, the minimum conditional
// probability over all positive-probability assignments of the remaining
// coordinates; leftover mass goes to a trailing dummy label.
struct Envelope {
    std::vector<std::vector<double>> coord;  // size radix+1 per coordinate, last entry = dummy
    JointTable table;                        // product distribution over (support + dummy)
};

inline Envelope independent_envelope(const JointTable& jt) {
    const int n = jt.n();
    Envelope env;
    env.coord.resize(static_cast<std::size_t>(n));
    std::vector<int> new_rad(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const std::size_t ri = static_cast<std::size_t>(jt.space.radices[static_cast<std::size_t>(i)]);
        std::vector<int> rad;
        for (int j = 0; j < n; ++j)
            if (j != i) rad.push_back(jt.space.radices[static_cast<std::size_t>(j)]);
        std::vector<double> mins(ri, kInf);
        if (rad.empty()) {
            auto mg = marginal(jt, i);
            for (std::size_t w = 0; w < ri; ++w) mins[w] = mg[w];
        } else {
            ProductSpace comp(rad);
            std::vector<double> b(comp.count, 0.0);
            std::vector<std::vector<double>> a(ri, std::vector<double>(comp.count, 0.0));
            std::vector<int> s(static_cast<std::size_t>(n));
            std::vector<int> cdig(comp.dims());
            for (std::size_t idx = 0; idx < jt.size(); ++idx) {
                if (jt.p[idx] == 0.0) continue;
                jt.space.decode(idx, s);
                for (int j = 0, t = 0; j < n; ++j)
                    if (j != i) cdig[static_cast<std::size_t>(t++)] = s[static_cast<std::size_t>(j)];
                std::size_t c = comp.encode(cdig);
                b[c] += jt.p[idx];
                a[static_cast<std::size_t>(s[static_cast<std::size_t>(i)])][c] += jt.p[idx];
            }
            for (std::size_t w = 0; w < ri; ++w)
                for (std::size_t c = 0; c < comp.count; ++c)
                    if (b[c] > 0.0) mins[w] = std::min(mins[w], a[w][c] / b[c]);
        }
        auto& cv = env.coord[static_cast<std::size_t>(i)];
        cv.assign(ri + 1, 0.0);
        double sum = 0.0;
        for (std::size_t w = 0; w < ri; ++w) {
            cv[w] = std::isfinite(mins[w]) ? mins[w] : 0.0;
            sum += cv[w];
        }
        cv[ri] = std::max(0.0, 1.0 - sum);
        new_rad[static_cast<std::size_t>(i)] = static_cast<int>(ri) + 1;
    }
    env.table.space = ProductSpace(new_rad);
    env.table.p.resize(env.table.space.count);
    std::vector<int> s(static_cast<std::size_t>(n));
    for (std::size_t idx = 0; idx < env.table.space.count; ++idx) {
        env.table.space.decode(idx, s);
        double pr = 1.0;
        for (int i = 0; i < n; ++i) pr *= env.coord[static_cast<std::size_t>(i)][static_cast<std::size_t>(s[static_cast<std::size_t>(i)])];
        env.table.p[idx] = pr;
    }
    return env;
}

// Exact Markov-chain view of a path MRF (edges exactly {i-1,i}): initial
// distribution and per-step transition matrices, computed through backward
// log-partition sums. Works for paths far too long for the full joint.
struct PathChain {
    std::vector<double> initial;                          // over labels of vertex 0
    std::vector<std::vector<std::vector<double>>> trans;  // trans[i][a][b] = Pr[t_{i+1}=b | t_i=a]

    std::size_t length() const { return trans.size() + 1; }

    std::vector<std::vector<double>> marginals() const {
        std::vector<std::vector<double>> out;
        out.push_back(initial);
        for (const auto& tm : trans) {
            const auto& prev = out.back();
            std::vector<double> next(tm[0].size(), 0.0);
            for (std::size_t a = 0; a < tm.size(); ++a)
                for (std::size_t b = 0; b < tm[a].size(); ++b) next[b] += prev[a] * tm[a][b];
            out.push_back(std::move(next));
        }
        return out;
    }
};

inline PathChain path_chain(const Mrf& m) {
    validate_mrf(m);
    const std::size_t n = m.supports.size();
    std::vector<const MrfEdge*> step(n > 0 ? n - 1 : 0, nullptr);
    for (const auto& e : m.edges) {
        if (e.members.size() != 2 || e.members[1] != e.members[0] + 1)
            throw std::invalid_argument("path_chain: edges must be consecutive pairs {i, i+1}");
        auto idx = static_cast<std::size_t>(e.members[0]);
        if (step[idx]) throw std::invalid_argument("path_chain: duplicate edge");
        step[idx] = &e;
    }
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (!step[i]) throw std::invalid_argument("path_chain: missing edge on the path");

    auto edge_psi = [&](std::size_t i, std::size_t a, std::size_t b) {
        return step[i]->table[a * m.supports[i + 1].size() + b];
    };
    // logZ[i][b]: completion weight of vertices > i given t_i = b
    std::vector<std::vector<double>> logZ(n);
    logZ[n - 1].assign(m.supports[n - 1].size(), 0.0);
    for (std::size_t i = n - 1; i-- > 0;) {
        logZ[i].assign(m.supports[i].size(), 0.0);
        std::vector<double> terms(m.supports[i + 1].size());
        for (std::size_t a = 0; a < m.supports[i].size(); ++a) {
            for (std::size_t b = 0; b < m.supports[i + 1].size(); ++b)
                terms[b] = m.vertex_potentials[i + 1][b] + edge_psi(i, a, b) + logZ[i + 1][b];
            logZ[i][a] = log_sum_exp(terms);
        }
    }
    PathChain pc;
    {
        std::vector<double> t(m.supports[0].size());
        for (std::size_t a = 0; a < t.size(); ++a) t[a] = m.vertex_potentials[0][a] + logZ[0][a];
        double lz = log_sum_exp(t);
        pc.initial.resize(t.size());
        for (std::size_t a = 0; a < t.size(); ++a) pc.initial[a] = std::exp(t[a] - lz);
    }
    pc.trans.resize(n > 0 ? n - 1 : 0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        auto& tm = pc.trans[i];
        tm.assign(m.supports[i].size(), std::vector<double>(m.supports[i + 1].size(), 0.0));
        std::vector<double> t(m.supports[i + 1].size());
        for (std::size_t a = 0; a < m.supports[i].size(); ++a) {
            for (std::size_t b = 0; b < m.supports[i + 1].size(); ++b)
                t[b] = m.vertex_potentials[i + 1][b] + edge_psi(i, a, b) + logZ[i + 1][b];
            double lz = log_sum_exp(t);
            for (std::size_t b = 0; b < m.supports[i + 1].size(); ++b) tm[a][b] = std::exp(t[b] - lz);
        }
    }
    return pc;
}

// Inverse-CDF sample from the exact joint; deterministic for a given rng state.
inline std::vector<int> sample_outcome(const JointTable& jt, std::mt19937_64& rng) {
    double u = uniform01(rng);
    double acc = 0.0;
    std::size_t pick = jt.size() - 1;
    for (std::size_t idx = 0; idx < jt.size(); ++idx) {
        acc += jt.p[idx];
        if (u < acc) {
            pick = idx;
            break;
        }
    }
    return jt.space.decode(pick);
}

inline std::vector<int> sample_outcome(const Mrf& m, std::uint64_t seed) {
    auto jt = joint_table(m);
    std::mt19937_64 rng(seed);
    return sample_outcome(jt, rng);
}

}  // namespace mrfmech

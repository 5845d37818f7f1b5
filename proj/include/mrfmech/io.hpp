#pragma once

// Instance file format: a line-oriented text schema with an `mrf/1` section
// (supports, potentials, hyperedges) followed by a `val/1` section (valuation
// kind and tables). Numbers are written in shortest round-trip form, so a
// write/read cycle is value-exact. Lines starting with '#' are comments.

#include <fstream>
#include <sstream>

#include "valuation.hpp"

namespace mrfmech {

inline void write_instance(std::ostream& os, const Mrf& m, const SetValuation& g) {
    os << "mrf/1\n";
    os << "vertices " << m.n() << "\n";
    for (int i = 0; i < m.n(); ++i) {
        os << "support " << i << ' ' << m.supports[static_cast<std::size_t>(i)].size();
        for (const auto& lab : m.supports[static_cast<std::size_t>(i)]) {
            if (lab.empty() || lab.find_first_of(" \t\n#") != std::string::npos)
                throw std::invalid_argument("write_instance: label must be nonempty without whitespace");
            os << ' ' << lab;
        }
        os << "\n";
    }
    for (int i = 0; i < m.n(); ++i) {
        os << "psi " << i;
        for (double v : m.vertex_potentials[static_cast<std::size_t>(i)]) os << ' ' << format_double(v);
        os << "\n";
    }
    os << "edges " << m.edges.size() << "\n";
    for (const auto& e : m.edges) {
        os << "edge " << e.members.size();
        for (int v : e.members) os << ' ' << v;
        os << "\npsi_e";
        for (double v : e.table) os << ' ' << format_double(v);
        os << "\n";
    }
    os << "val/1\n";
    os << "kind " << to_string(g.kind) << "\n";
    for (int i = 0; i < g.n_items(); ++i) {
        os << "values " << i;
        for (double v : g.singleton[static_cast<std::size_t>(i)]) os << ' ' << format_double(v);
        os << "\n";
    }
    if (g.kind == ValuationKind::subadditive_table) {
        os << "full_table " << g.full_table.size();
        for (double v : g.full_table) os << ' ' << format_double(v);
        os << "\n";
    }
    os << "end\n";
}

namespace detail {

class TokenReader {
  public:
    explicit TokenReader(std::istream& is) : is_(is) {}

    std::string next() {
        std::string tok;
        while (true) {
            if (!(is_ >> tok)) throw std::runtime_error("instance file: unexpected end of input");
            if (tok[0] == '#') {
                std::string rest;
                std::getline(is_, rest);
                continue;
            }
            return tok;
        }
    }
    int next_int() {
        auto t = next();
        std::size_t pos = 0;
        int v = std::stoi(t, &pos);
        if (pos != t.size()) throw std::runtime_error("instance file: bad integer '" + t + "'");
        return v;
    }
    double next_double() { return parse_double(next()); }
    void expect(const std::string& kw) {
        auto t = next();
        if (t != kw) throw std::runtime_error("instance file: expected '" + kw + "', got '" + t + "'");
    }

  private:
    std::istream& is_;
};

}  // namespace detail

inline std::pair<Mrf, SetValuation> read_instance(std::istream& is) {
    detail::TokenReader tr(is);
    tr.expect("mrf/1");
    tr.expect("vertices");
    int n = tr.next_int();
    if (n <= 0) throw std::runtime_error("instance file: vertex count must be positive");
    Mrf m;
    m.supports.resize(static_cast<std::size_t>(n));
    m.vertex_potentials.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        tr.expect("support");
        int idx = tr.next_int();
        if (idx != i) throw std::runtime_error("instance file: supports out of order");
        int count = tr.next_int();
        if (count <= 0) throw std::runtime_error("instance file: empty support");
        auto& labs = m.supports[static_cast<std::size_t>(i)];
        for (int w = 0; w < count; ++w) labs.push_back(tr.next());
    }
    for (int i = 0; i < n; ++i) {
        tr.expect("psi");
        int idx = tr.next_int();
        if (idx != i) throw std::runtime_error("instance file: psi out of order");
        auto& pot = m.vertex_potentials[static_cast<std::size_t>(i)];
        for (std::size_t w = 0; w < m.supports[static_cast<std::size_t>(i)].size(); ++w) pot.push_back(tr.next_double());
    }
    tr.expect("edges");
    int ne = tr.next_int();
    for (int e = 0; e < ne; ++e) {
        tr.expect("edge");
        int k = tr.next_int();
        MrfEdge edge;
        std::size_t sz = 1;
        for (int j = 0; j < k; ++j) {
            int v = tr.next_int();
            if (v < 0 || v >= n) throw std::runtime_error("instance file: edge member out of range");
            edge.members.push_back(v);
            sz *= m.supports[static_cast<std::size_t>(v)].size();
        }
        tr.expect("psi_e");
        for (std::size_t j = 0; j < sz; ++j) edge.table.push_back(tr.next_double());
        m.edges.push_back(std::move(edge));
    }
    validate_mrf(m);

    tr.expect("val/1");
    tr.expect("kind");
    std::string kind = tr.next();
    SetValuation g;
    if (kind == "additive") g.kind = ValuationKind::additive;
    else if (kind == "unit_demand") g.kind = ValuationKind::unit_demand;
    else if (kind == "subadditive") g.kind = ValuationKind::subadditive_table;
    else throw std::runtime_error("instance file: unknown valuation kind '" + kind + "'");
    g.singleton.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        tr.expect("values");
        int idx = tr.next_int();
        if (idx != i) throw std::runtime_error("instance file: values out of order");
        for (std::size_t w = 0; w < m.supports[static_cast<std::size_t>(i)].size(); ++w)
            g.singleton[static_cast<std::size_t>(i)].push_back(tr.next_double());
    }
    if (g.kind == ValuationKind::subadditive_table) {
        tr.expect("full_table");
        int cnt = tr.next_int();
        if (static_cast<std::size_t>(cnt) != g.table_size())
            throw std::runtime_error("instance file: full table size mismatch");
        for (int j = 0; j < cnt; ++j) g.full_table.push_back(tr.next_double());
    }
    tr.expect("end");
    return {std::move(m), std::move(g)};
}

inline void write_instance_file(const std::string& path, const Mrf& m, const SetValuation& g) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_instance(os, m, g);
    if (!os) throw std::runtime_error("write failed: " + path);
}

inline std::pair<Mrf, SetValuation> read_instance_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    return read_instance(is);
}

}  // namespace mrfmech

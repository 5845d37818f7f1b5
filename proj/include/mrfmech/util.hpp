#pragma once

// Shared numeric and indexing helpers used across the library.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mrfmech {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Mixed-radix indexing over a finite product space. The last coordinate
// varies fastest, so index 0 is the all-zeros digit vector.
struct ProductSpace {
    std::vector<int> radices;
    std::vector<std::size_t> strides;
    std::size_t count = 1;

    ProductSpace() = default;
    explicit ProductSpace(std::vector<int> r) : radices(std::move(r)) {
        strides.assign(radices.size(), 1);
        for (int i = static_cast<int>(radices.size()) - 1; i >= 0; --i) {
            if (radices[static_cast<std::size_t>(i)] <= 0)
                throw std::invalid_argument("ProductSpace: radix must be positive");
            strides[static_cast<std::size_t>(i)] = count;
            count *= static_cast<std::size_t>(radices[static_cast<std::size_t>(i)]);
        }
    }

    std::size_t dims() const { return radices.size(); }

    std::size_t encode(std::span<const int> digits) const {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < radices.size(); ++i) idx += strides[i] * static_cast<std::size_t>(digits[i]);
        return idx;
    }

    void decode(std::size_t idx, std::span<int> out) const {
        for (std::size_t i = 0; i < radices.size(); ++i) {
            out[i] = static_cast<int>(idx / strides[i]);
            idx %= strides[i];
        }
    }

    std::vector<int> decode(std::size_t idx) const {
        std::vector<int> out(radices.size());
        decode(idx, out);
        return out;
    }

    int digit(std::size_t idx, std::size_t coord) const {
        return static_cast<int>((idx / strides[coord]) % static_cast<std::size_t>(radices[coord]));
    }
};

inline double log_sum_exp(std::span<const double> xs) {
    double m = -kInf;
    for (double x : xs) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

// Uniform double in [0,1) from the top 53 bits of a 64-bit draw. Keeps
// sampling independent of std::uniform_real_distribution's implementation.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {  // inclusive
    return lo + static_cast<int>(uniform01(rng) * static_cast<double>(hi - lo + 1));
}

// Shortest round-trip decimal formatting; parse is exact for what we emit.
inline std::string format_double(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& tok) {
    if (tok == "inf") return kInf;
    if (tok == "-inf") return -kInf;
    if (tok == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw std::runtime_error("bad numeric literal: '" + tok + "'");
    return v;
}

inline bool approx_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// lhs <= rhs up to a relative slack on the rhs scale.
inline bool leq_tol(double lhs, double rhs, double tol = 1e-7) {
    return lhs <= rhs + tol * std::max(1.0, std::abs(rhs));
}

inline int popcount32(std::uint32_t m) { return static_cast<int>(__builtin_popcount(m)); }

// Runs fn(i) for i in [0,count) over `jobs` threads. Falls back to a plain
// loop when jobs <= 1; work items must be independent.
inline void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) break;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    unsigned k = std::min<unsigned>(jobs, static_cast<unsigned>(count));
    pool.reserve(k);
    for (unsigned t = 0; t < k; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

inline unsigned default_jobs() {
    unsigned h = std::thread::hardware_concurrency();
    return h == 0 ? 1 : h;
}

}  // namespace mrfmech

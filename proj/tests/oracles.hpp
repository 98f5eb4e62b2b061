#pragma once

// Reference implementations written independently of the library, used as
// oracles by the unit and acceptance tests.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace oracle {

inline std::vector<std::string> words(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        if (c >= 0x80 || std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty())
        out.push_back(cur);
    return out;
}

/// Okapi BM25 evaluated term by term straight from its definition.
struct Bm25 {
    std::map<std::string, std::vector<std::string>> docs;
    double k1 = 1.2;
    double b = 0.75;

    double score(const std::vector<std::string>& query, const std::string& id) const {
        const double n = static_cast<double>(docs.size());
        double total_len = 0;
        for (const auto& [_, toks] : docs)
            total_len += static_cast<double>(toks.size());
        const double avgdl = total_len / n;
        const auto& d = docs.at(id);
        double s = 0;
        for (const auto& q : query) {
            double df = 0;
            for (const auto& [_, toks] : docs) {
                for (const auto& t : toks) {
                    if (t == q) {
                        df += 1;
                        break;
                    }
                }
            }
            double f = 0;
            for (const auto& t : d)
                f += (t == q);
            if (f == 0)
                continue;
            const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
            s += idf * (f * (k1 + 1)) / (f + k1 * (1 - b + b * static_cast<double>(d.size()) / avgdl));
        }
        return s;
    }
};

using Matrix = std::vector<std::vector<double>>;

/// Ridge weights from the normal equations: assemble G^T G + lambda I and
/// G^T u explicitly, then Gauss-Jordan with full row swaps.
inline std::vector<double> ridge(const std::vector<double>& u, const Matrix& donors, double lambda) {
    const std::size_t j = donors.size();
    const std::size_t d = u.size();
    Matrix aug(j, std::vector<double>(j + 1, 0.0));
    for (std::size_t r = 0; r < j; ++r) {
        for (std::size_t c = 0; c < j; ++c) {
            long double acc = 0;
            for (std::size_t k = 0; k < d; ++k)
                acc += static_cast<long double>(donors[r][k]) * donors[c][k];
            aug[r][c] = static_cast<double>(acc) + (r == c ? lambda : 0.0);
        }
        long double rhs = 0;
        for (std::size_t k = 0; k < d; ++k)
            rhs += static_cast<long double>(donors[r][k]) * u[k];
        aug[r][j] = static_cast<double>(rhs);
    }
    for (std::size_t col = 0; col < j; ++col) {
        std::size_t best = col;
        for (std::size_t r = col + 1; r < j; ++r)
            if (std::fabs(aug[r][col]) > std::fabs(aug[best][col]))
                best = r;
        std::swap(aug[col], aug[best]);
        const double p = aug[col][col];
        for (auto& x : aug[col])
            x /= p;
        for (std::size_t r = 0; r < j; ++r) {
            if (r == col)
                continue;
            const double f = aug[r][col];
            for (std::size_t c = 0; c <= j; ++c)
                aug[r][c] -= f * aug[col][c];
        }
    }
    std::vector<double> w(j);
    for (std::size_t r = 0; r < j; ++r)
        w[r] = aug[r][j];
    return w;
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

/// Mock token vector: splitmix64 seeded with fnv1a(token) ^ seed, each draw
/// mapped to [-1, 1) from its top 53 bits, then L2-normalized.
inline std::vector<double> mock_token_vector(const std::string& token, std::size_t dim,
                                             std::uint64_t seed = 0) {
    std::uint64_t x = fnv1a(token) ^ seed;
    std::vector<double> v;
    double sq = 0;
    for (std::size_t i = 0; i < dim; ++i) {
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        const double val = std::ldexp(static_cast<double>(z >> 11), -53) * 2.0 - 1.0;
        v.push_back(val);
        sq += val * val;
    }
    for (auto& e : v)
        e /= std::sqrt(sq);
    return v;
}

inline std::vector<double> mock_text_vector(const std::string& text, std::size_t dim,
                                            std::uint64_t seed = 0) {
    std::vector<double> sum(dim, 0.0);
    for (const auto& w : words(text)) {
        const auto t = mock_token_vector(w, dim, seed);
        for (std::size_t i = 0; i < dim; ++i)
            sum[i] += t[i];
    }
    double sq = 0;
    for (double e : sum)
        sq += e * e;
    for (auto& e : sum)
        e /= std::sqrt(sq);
    return sum;
}

/// Uniform draws for hand-rolled property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    std::size_t size(std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
    }
    std::vector<double> vec(std::size_t n, double lo = -3.0, double hi = 3.0) {
        std::vector<double> v(n);
        for (auto& x : v)
            x = real(lo, hi);
        return v;
    }
    template <typename T>
    void shuffle(std::vector<T>& v) { std::shuffle(v.begin(), v.end(), rng_); }
    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

} // namespace oracle

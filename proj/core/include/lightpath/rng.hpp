#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>
#include <vector>

namespace lightpath {

// Seeded random source. All floating draws are constructed explicitly from
// raw engine output so results are identical across standard libraries;
// std::*_distribution is never used. Child streams are derived from the base
// seed and a purpose label, so each consumer gets an independent,
// reproducible stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : base_(seed), gen_(mix(seed)) {}

    Rng fork(std::string_view purpose, std::uint64_t salt = 0) const {
        std::uint64_t h = 1469598103934665603ull; // FNV-1a
        for (char ch : purpose) {
            h ^= static_cast<unsigned char>(ch);
            h *= 1099511628211ull;
        }
        return Rng(mix(base_ ^ h ^ (salt * 0x9e3779b97f4a7c15ull)));
    }

    std::uint64_t u64() { return gen_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform index in [0, n). n must be positive.
    std::size_t uniform_index(std::size_t n) {
        std::size_t i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }

    // Standard normal via Box-Muller (no cached spare; two uniforms per draw).
    double normal() {
        double u1 = 1.0 - uniform(); // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double lognormal(double sigma) { return std::exp(sigma * normal()); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct values from {0, ..., n-1} via partial Fisher-Yates,
    // returned in draw order.
    std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t k) {
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        std::vector<std::size_t> out;
        out.reserve(k);
        for (std::size_t i = 0; i < k && i < n; ++i) {
            std::size_t j = i + uniform_index(n - i);
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
        }
        return out;
    }

private:
    static std::uint64_t mix(std::uint64_t x) {
        // splitmix64 finalizer
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    std::uint64_t base_;
    std::mt19937_64 gen_;
};

} // namespace lightpath

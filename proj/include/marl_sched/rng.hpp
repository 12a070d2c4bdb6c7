#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace marl_sched {

inline constexpr std::uint64_t kDefaultMasterSeed = 42;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace detail

/// A single-owner pseudo-random stream. Streams are never shared between
/// episodes or threads; derive a fresh one per purpose with derive_stream().
class RngStream {
public:
    RngStream(std::uint64_t seed, std::string label) : engine_(seed), label_(std::move(label)) {}

    /// Uniform draw in [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be positive.
    std::size_t index(std::size_t n) {
        if (n == 0) throw InputError("RngStream::index: empty range");
        return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
    }

    /// Standard normal via Box-Muller; consumes two uniforms per call.
    double standard_normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t next_u64() { return engine_(); }

    const std::string& label() const { return label_; }

private:
    std::mt19937_64 engine_;
    std::string label_;
};

/// Child stream keyed by (master_seed, label). Identical inputs give identical
/// sequences; distinct labels give unrelated seeds through splitmix64 mixing.
inline RngStream derive_stream(std::uint64_t master_seed, std::string_view label) {
    if (label.empty()) throw InputError("derive_stream: label must be nonempty");
    const std::uint64_t child =
        detail::splitmix64(detail::splitmix64(master_seed) ^ detail::fnv1a64(label));
    return RngStream(child, std::string(label));
}

// Inverse-CDF transforms. Exposed separately so boundary values are checkable
// without going through a generator.

inline double pareto_from_uniform(double u, double alpha, double t_min) {
    return t_min * std::pow(1.0 - u, -1.0 / alpha);
}

inline double exponential_from_uniform(double u, double rate) {
    return -std::log1p(-u) / rate;
}

inline double lognormal_from_normal(double z, double mu, double sigma) {
    return std::exp(mu + sigma * z);
}

inline double sample_pareto(RngStream& s, double alpha, double t_min) {
    if (!(alpha > 0.0) || !(t_min > 0.0)) throw InputError("sample_pareto: alpha and t_min must be positive");
    return pareto_from_uniform(s.uniform(), alpha, t_min);
}

inline double sample_lognormal(RngStream& s, double mu, double sigma) {
    if (!(sigma > 0.0)) throw InputError("sample_lognormal: sigma must be positive");
    return lognormal_from_normal(s.standard_normal(), mu, sigma);
}

inline double sample_exponential(RngStream& s, double rate) {
    if (!(rate > 0.0)) throw InputError("sample_exponential: rate must be positive");
    return exponential_from_uniform(s.uniform(), rate);
}

/// Index i whose cumulative-weight interval contains u.
inline std::size_t categorical_from_uniform(double u, std::span<const double> weights) {
    if (weights.empty()) throw InputError("categorical: empty weight vector");
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0 || !std::isfinite(w)) throw InputError("categorical: weights must be finite and nonnegative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InputError("categorical: weights must sum to 1");
    double cumulative = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        cumulative += weights[i];
        if (u < cumulative) return i;
    }
    // u landed in the roundoff gap above the last cumulative sum; return the
    // last index with nonzero weight.
    for (std::size_t i = weights.size(); i-- > 0;) {
        if (weights[i] > 0.0) return i;
    }
    return weights.size() - 1;
}

inline std::size_t sample_categorical(RngStream& s, std::span<const double> weights) {
    return categorical_from_uniform(s.uniform(), weights);
}

}  // namespace marl_sched

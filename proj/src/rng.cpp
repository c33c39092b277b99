#include "ccgen/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ccgen {

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

} // namespace

std::uint64_t Rng::mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

Rng Rng::stream(std::uint64_t seed, std::string_view tag, std::uint64_t index) {
    std::uint64_t key = mix64(seed + kGamma);
    key = mix64(key ^ fnv1a(tag));
    key = mix64(key + index * kGamma);
    return Rng(key);
}

double Rng::log_uniform(double lo, double hi) {
    if (!(lo > 0.0) || !(hi >= lo)) {
        throw std::invalid_argument("log_uniform requires 0 < lo <= hi");
    }
    return std::exp(uniform(std::log(lo), std::log(hi)));
}

long Rng::uniform_int(long lo, long hi) {
    if (hi < lo) throw std::invalid_argument("uniform_int: hi < lo");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1ull;
    if (span == 0) return static_cast<long>(next_u64()); // full 64-bit range
    // Rejection sampling over the largest multiple of span.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t r;
    do {
        r = next_u64();
    } while (r >= limit);
    return lo + static_cast<long>(r % span);
}

double Rng::normal() {
    // Box-Muller, cosine branch only. One draw consumes two uniforms.
    const double u1 = uniform01_open();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::laplace() {
    const double u = uniform01() - 0.5;
    const double a = std::abs(u);
    const double mag = -std::log(std::max(1.0 - 2.0 * a, 1e-300));
    return u < 0 ? -mag : mag;
}

double Rng::student_t3() {
    // Ratio construction: Z0 / sqrt((Z1^2+Z2^2+Z3^2)/3).
    const double z0 = normal();
    double s = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double z = normal();
        s += z * z;
    }
    return z0 / std::sqrt(std::max(s / 3.0, 1e-300));
}

double Rng::truncated_normal(double mean, double sd, double lower) {
    for (;;) {
        const double x = mean + sd * normal();
        if (x >= lower) return x;
    }
}

std::vector<int> Rng::sample_without_replacement(int n, int k) {
    if (k > n || k < 0) throw std::invalid_argument("sample_without_replacement: k out of range");
    // Partial Fisher-Yates over an index pool.
    std::vector<int> pool(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    std::vector<int> out(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        const long j = uniform_int(i, n - 1);
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        out[static_cast<std::size_t>(i)] = pool[static_cast<std::size_t>(i)];
    }
    return out;
}

} // namespace ccgen

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace ccgen {

// Counter-based pseudo-random generator. The i-th raw output is
// mix64(key + i * GAMMA) where mix64 is the SplitMix64 finalizer, so a
// stream is fully determined by its 64-bit key and draw index. Sub-streams
// are keyed by (seed, tag, index); every randomized component of the
// pipeline derives its own stream this way, which keeps generation
// reproducible and safe to parallelize across indices.
//
// Bit-exact reproducibility is guaranteed for a fixed build of this
// library, not across implementations or platforms with different libm.
class Rng {
public:
    explicit Rng(std::uint64_t key) : key_(key), counter_(0) {}

    static Rng stream(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0);

    std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGamma); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; safe to feed into log().
    double uniform01_open() { return 1.0 - uniform01(); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    double log_uniform(double lo, double hi);

    // Inclusive on both ends.
    long uniform_int(long lo, long hi);

    bool bernoulli(double p) { return uniform01() < p; }

    double normal();
    double laplace();
    double student_t3();

    // Normal(mean, sd) conditioned on the result being >= lower.
    double truncated_normal(double mean, double sd, double lower);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_int(0, static_cast<long>(i) - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct values from {0, ..., n-1}, in draw order.
    std::vector<int> sample_without_replacement(int n, int k);

private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
    static std::uint64_t mix64(std::uint64_t z);

    std::uint64_t key_;
    std::uint64_t counter_;
};

} // namespace ccgen

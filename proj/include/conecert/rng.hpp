#ifndef CONECERT_RNG_HPP
#define CONECERT_RNG_HPP

#include <cstdint>
#include <cmath>
#include <numbers>

namespace conecert {

// Counter-based random streams. Every draw is a pure function of
// (key, counter), so sharded generation is order-independent and
// reproducible bit-for-bit across thread counts.
namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derive a stream key from a seed and one or two stream identifiers.
inline std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
}
inline std::uint64_t derive_key(std::uint64_t seed, std::uint64_t s1, std::uint64_t s2) {
    return derive_key(derive_key(seed, s1), s2);
}

inline std::uint64_t bits_at(std::uint64_t key, std::uint64_t counter) {
    return splitmix64(key ^ (counter * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
}

// Uniform in [0,1), 53 mantissa bits.
inline double uniform_at(std::uint64_t key, std::uint64_t counter) {
    return static_cast<double>(bits_at(key, counter) >> 11) * 0x1.0p-53;
}

// Stateful view over a counter stream; cheap to copy.
class Stream {
public:
    explicit Stream(std::uint64_t key, std::uint64_t start = 0) : key_(key), ctr_(start) {}
    Stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t start)
        : key_(derive_key(seed, stream)), ctr_(start) {}

    std::uint64_t bits() { return bits_at(key_, ctr_++); }
    double uniform() { return uniform_at(key_, ctr_++); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; consumes two counters per pair.
    double normal() {
        if (have_spare_) { have_spare_ = false; return spare_; }
        double u1 = uniform(), u2 = uniform();
        if (u1 < 0x1.0p-100) u1 = 0x1.0p-100;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t key_;
    std::uint64_t ctr_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace rng
} // namespace conecert

#endif

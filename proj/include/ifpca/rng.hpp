#pragma once

#include <cstdint>
#include <random>

namespace ifpca {

// splitmix64 finalizer; used both to whiten seeds and to derive child seeds.
inline constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed split function: derives the seed of a child stream (repeat r, grid cell c,
// restart index, ...) from a base seed.  Children are pairwise distinct for distinct
// (a, b) because mix64 is a bijection applied to an injective combination.
inline constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                           std::uint64_t b = 0) {
    return mix64(mix64(base ^ 0x6a09e667f3bcc909ULL) + 0x9e3779b97f4a7c15ULL * (a + 1) +
                 0x3c6ef372fe94f82bULL * (b + 1));
}

// Seeded RNG with self-contained uniform/normal transforms so that draws are
// reproducible bit-for-bit regardless of the standard library in use.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(mix64(seed)) {}

    std::uint64_t next_u64() { return eng_(); }

    // uniform on [0,1) with 53-bit resolution
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // uniform on (0,1]; safe as a log() argument
    double uniform_pos() { return static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53; }

    // standard normal via Box-Muller (pairs cached)
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    // uniform integer in [lo, hi] inclusive
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(uniform() * (static_cast<double>(hi) - lo + 1));
    }

    int sign() { return uniform() < 0.5 ? 1 : -1; }

  private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace ifpca

/* rng.hpp */

#ifndef IMAGIMAP_RNG_HPP
#define IMAGIMAP_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace imagimap {

/* SplitMix64 finalizer, used to derive independent stream seeds */
constexpr std::uint64_t mixSeed(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/* Combine several integers into one seed; order matters */
inline std::uint64_t deriveSeed(std::initializer_list<std::uint64_t> parts) noexcept
{
    std::uint64_t h = 0x2545f4914f6cdd1dULL;
    for (const auto p : parts)
        h = mixSeed(h ^ mixSeed(p));
    return h;
}

/*
 * Random stream with platform-independent draws. The standard
 * distributions are implementation-defined, so uniform values are
 * computed directly from the 64-bit engine output.
 */
class Rng
{
public:
    explicit Rng(std::uint64_t seed) : mEngine(seed) { }

    /* Uniform in [0, 1) with 53 random bits */
    double Uniform01() { return static_cast<double>(mEngine() >> 11) * 0x1.0p-53; }

    /* Uniform in [lo, hi) */
    double Uniform(double lo, double hi) { return lo + (hi - lo) * this->Uniform01(); }

    /* Uniform integer in [0, n), n > 0 */
    std::uint64_t Index(std::uint64_t n)
    {
        /* Rejection sampling removes modulo bias */
        const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
        std::uint64_t v = mEngine();
        while (v >= limit)
            v = mEngine();
        return v % n;
    }

    /* Standard normal via Box-Muller */
    double Normal()
    {
        double u1 = this->Uniform01();
        while (u1 <= 0.0)
            u1 = this->Uniform01();
        const double u2 = this->Uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    std::mt19937_64& Engine() { return mEngine; }

private:
    std::mt19937_64 mEngine;
};

} // namespace imagimap

#endif // IMAGIMAP_RNG_HPP

#include "prefevo/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "prefevo/errors.hpp"

namespace prefevo {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::size_t Rng::below(std::size_t n) {
    const auto range = static_cast<std::uint64_t>(n);
    // Largest multiple of n that fits, to avoid modulo bias.
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % range);
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return static_cast<std::size_t>(x % range);
}

double Rng::normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string Rng::state() const {
    std::ostringstream out;
    out << engine_;
    return out.str();
}

Rng Rng::from_state(const std::string& state) {
    Rng rng;
    std::istringstream in(state);
    in >> rng.engine_;
    if (in.fail()) throw FormatError("rng state: not a valid engine state");
    return rng;
}

} // namespace prefevo

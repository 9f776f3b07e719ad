#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <utility>

namespace nlw {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
    return splitmix64(h ^ splitmix64(v + 0x632be59bd9b4e019ULL));
}

template <class... Ts>
constexpr std::uint64_t hash_key(std::uint64_t seed, Ts... parts) {
    std::uint64_t h = splitmix64(seed);
    ((h = hash_combine(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(parts)))), ...);
    return h;
}

inline std::uint64_t hash_string(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Per-job seed; independent of scheduling order.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view job_key) {
    return hash_combine(splitmix64(master), hash_string(job_key));
}

// Open interval (0,1), 53 bits.
inline double to_unit(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Two independent N(0,1) from one counter key.
inline std::pair<double, double> normal_pair(std::uint64_t key) {
    const double u1 = to_unit(splitmix64(key));
    const double u2 = to_unit(splitmix64(key ^ 0xd1b54a32d192ed03ULL));
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(a), r * std::sin(a)};
}

// Sequential stream for Monte Carlo loops that do not need per-mode coupling.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : state_(splitmix64(seed)) {}

    std::uint64_t next() { return splitmix64(state_ += 0x9e3779b97f4a7c15ULL); }
    double uniform() { return to_unit(next()); }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        auto [a, b] = normal_pair(next());
        spare_ = b;
        has_spare_ = true;
        return a;
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace nlw

#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace solid {

// 64-bit FNV-1a. Stable across platforms; used for mock outputs, ids and
// file digests.
class Fnv1a {
public:
    Fnv1a& update(std::string_view bytes) noexcept {
        for (unsigned char c : bytes) {
            state_ ^= c;
            state_ *= 0x100000001b3ULL;
        }
        return *this;
    }
    Fnv1a& update_u64(std::uint64_t v) noexcept {
        for (int i = 0; i < 8; ++i) {
            state_ ^= static_cast<unsigned char>(v >> (8 * i));
            state_ *= 0x100000001b3ULL;
        }
        return *this;
    }
    std::uint64_t digest() const noexcept { return state_; }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t fnv1a(std::string_view bytes) noexcept { return Fnv1a{}.update(bytes).digest(); }

std::string hex64(std::uint64_t v);

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// mt19937_64 with our own bounded-integer and shuffle routines so that
// draws are bit-identical across standard library implementations
// (std::uniform_int_distribution is implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Independent stream for work item `index`, derived from a root seed.
    static Rng split(std::uint64_t root, std::uint64_t index) {
        return Rng(splitmix64(root ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
    }

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace solid

// rng.hpp
// Counter-based random streams. A stream is identified by (seed, stream id);
// the n-th output depends only on (seed, stream id, n), so trajectories drawn
// from distinct stream ids are reproducible regardless of scheduling.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace bornlab {

// Philox4x32-10 block function (Salmon et al., Random123).
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter counter, Key key) noexcept;
};

class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

    std::uint32_t next_u32() noexcept;
    std::uint64_t next_u64() noexcept;
    // Uniform on the open interval (0, 1), 53-bit resolution.
    double next_uniform() noexcept;
    // Standard normal via Box-Muller; pairs are consumed in order.
    double next_gaussian() noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

private:
    void refill() noexcept;

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t block_index_ = 0;
    Philox4x32::Counter buffer_{};
    unsigned used_ = 4;
    double spare_gaussian_ = 0.0;
    bool has_spare_ = false;
};

// One Wiener increment per collapse operator.
struct NoiseIncrement {
    std::vector<double> values;
};

// `count` independent N(0, dt) draws.
NoiseIncrement generate_noise(std::size_t count, double dt, RandomStream& stream);

// Same as generate_noise, but each value is the sum of `substeps` draws of
// variance dt/substeps. Runs at dt and dt/2 that share a stream id and use
// substeps s and s/2 therefore see the same Brownian path.
NoiseIncrement generate_noise_refined(std::size_t count, double dt, std::size_t substeps,
                                      RandomStream& stream);

}  // namespace bornlab

#include "bornlab/rng.hpp"

#include <cmath>
#include <numbers>

#include "bornlab/error.hpp"

namespace bornlab {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
    : seed_(seed), stream_id_(stream_id) {}

void RandomStream::refill() noexcept {
    // counter = (block lo, block hi, stream lo, stream hi), key = seed
    const Philox4x32::Counter ctr = {
        static_cast<std::uint32_t>(block_index_), static_cast<std::uint32_t>(block_index_ >> 32),
        static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)};
    const Philox4x32::Key key = {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
    buffer_ = Philox4x32::block(ctr, key);
    ++block_index_;
    used_ = 0;
}

std::uint32_t RandomStream::next_u32() noexcept {
    if (used_ == 4) refill();
    return buffer_[used_++];
}

std::uint64_t RandomStream::next_u64() noexcept {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
}

double RandomStream::next_uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::next_gaussian() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_gaussian_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_gaussian_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

NoiseIncrement generate_noise(std::size_t count, double dt, RandomStream& stream) {
    return generate_noise_refined(count, dt, 1, stream);
}

NoiseIncrement generate_noise_refined(std::size_t count, double dt, std::size_t substeps,
                                      RandomStream& stream) {
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "noise step dt must be positive");
    if (substeps == 0) throw Error(ErrorCode::InvalidArgument, "noise substeps must be positive");
    NoiseIncrement noise;
    noise.values.assign(count, 0.0);
    const double scale = std::sqrt(dt / static_cast<double>(substeps));
    // Substep-major order keeps the fine path identical across refinements.
    for (std::size_t s = 0; s < substeps; ++s)
        for (std::size_t j = 0; j < count; ++j) noise.values[j] += scale * stream.next_gaussian();
    return noise;
}

}  // namespace bornlab

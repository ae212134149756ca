#include <doctest.h>

#include <cmath>
#include <set>

#include "bornlab/rng.hpp"
#include "test_support.hpp"

using namespace bornlab;

TEST_CASE("Philox4x32-10 known-answer vectors") {
    using C = Philox4x32::Counter;
    CHECK(Philox4x32::block({0, 0, 0, 0}, {0, 0}) == C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
    RandomStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    std::set<std::uint64_t> seen;
    bool differs_c = false, differs_d = false;
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t x = a.next_u64();
        CHECK(x == b.next_u64());
        differs_c = differs_c || x != c.next_u64();
        differs_d = differs_d || x != d.next_u64();
        seen.insert(x);
    }
    CHECK(differs_c);
    CHECK(differs_d);
    CHECK(seen.size() == 1000);
}

TEST_CASE("uniforms lie strictly inside (0, 1)") {
    RandomStream s(1, 0);
    double lo = 1.0, hi = 0.0, sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = s.next_uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += u;
    }
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
    CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("Wiener increments: mean and variance over 10^6 draws") {
    for (double dt : {1e-3, 0.25}) {
        RandomStream s(2024, 3);
        const std::size_t n = 1000000;
        double sum = 0.0, sq = 0.0, quartic = 0.0;
        for (std::size_t i = 0; i < n / 4; ++i) {
            for (double x : generate_noise(4, dt, s).values) {
                sum += x;
                sq += x * x;
                quartic += x * x * x * x;
            }
        }
        const double mean = sum / n;
        const double var = sq / n - mean * mean;
        CHECK(std::abs(mean) <= 4e-3 * std::sqrt(dt));
        CHECK(std::abs(var / dt - 1.0) <= 0.01);
        // Gaussian fourth moment 3 dt^2
        CHECK(quartic / n / (dt * dt) == doctest::Approx(3.0).epsilon(0.03));
    }
}

TEST_CASE("refined noise sums the fine path") {
    RandomStream coarse(9, 1), fine(9, 1);
    for (int step = 0; step < 100; ++step) {
        const NoiseIncrement c = generate_noise_refined(3, 0.02, 4, coarse);
        std::vector<double> sum(3, 0.0);
        for (int k = 0; k < 4; ++k) {
            const NoiseIncrement f = generate_noise(3, 0.005, fine);
            for (int j = 0; j < 3; ++j) sum[j] += f.values[j];
        }
        for (int j = 0; j < 3; ++j) CHECK(c.values[j] == doctest::Approx(sum[j]).epsilon(1e-13));
    }
}

TEST_CASE("invalid noise parameters") {
    RandomStream s(0, 0);
    CHECK(testing::error_code([&] { generate_noise(1, 0.0, s); }) == testing::code(ErrorCode::InvalidArgument));
    CHECK(testing::error_code([&] { generate_noise_refined(1, 1e-3, 0, s); }) ==
          testing::code(ErrorCode::InvalidArgument));
}

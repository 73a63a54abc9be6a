#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace gofmult {

/// Philox4x32-10 counter-based generator (Salmon et al., 2011).
///
/// The 128-bit counter is split into a 64-bit block index and a 64-bit
/// stream identifier, so independent streams are obtained by changing the
/// identifier rather than by advancing state. A stream can derive child
/// streams deterministically with substream(), which is how replicates
/// running on different threads get reproducible, non-overlapping draws.
class RngStream {
public:
    using result_type = std::uint32_t;

    explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream = 0) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Child stream keyed by (this stream, index). Does not touch this stream's state.
    [[nodiscard]] RngStream substream(std::uint64_t index) const noexcept;

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_; }

    std::uint64_t next_u64() noexcept;
    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform() noexcept;
    double normal() noexcept;
    double exponential() noexcept;
    /// Gamma(shape, 1) by Marsaglia-Tsang; shape > 0.
    double gamma(double shape) noexcept;
    double chi_square(double dof) noexcept { return 2.0 * gamma(0.5 * dof); }
    /// +1 or -1 with equal probability.
    double rademacher() noexcept { return (next_u64() >> 63) != 0 ? 1.0 : -1.0; }

private:
    void refill() noexcept;

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

/// Raw Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// SplitMix64 finalizer, used to derive stream identifiers.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace gofmult

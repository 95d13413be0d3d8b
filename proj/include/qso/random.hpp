#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace qso {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11). Pure function of a
/// 128-bit counter and a 64-bit key.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter apply(Counter ctr, Key key) noexcept;
};

/// Counter-based random stream. The master seed is the Philox key, the
/// stream id occupies the upper half of the counter and a block index the
/// lower half, so distinct ids never share a block.
///
/// Identical (seed, id) pairs reproduce identical draws. A stream is cheap
/// to create; per-item sub-streams are derived with substream().
class RandomStream {
public:
    using result_type = std::uint64_t;

    RandomStream() noexcept : RandomStream(0, 0) {}
    RandomStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept;

    std::uint64_t master_seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return id_; }

    /// Independent child stream keyed by (this stream id, index).
    RandomStream substream(std::uint64_t index) const noexcept;

    std::uint64_t operator()() noexcept { return next_u64(); }
    static constexpr std::uint64_t min() noexcept { return 0; }
    static constexpr std::uint64_t max() noexcept {
        return std::numeric_limits<std::uint64_t>::max();
    }

    std::uint64_t next_u64() noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Uniform on (0, 1).
    double uniform_open() noexcept;
    /// Uniform integer in [0, n); n > 0.
    std::uint64_t index(std::uint64_t n) noexcept;
    bool coin() noexcept { return (next_u64() >> 63) != 0; }

    double standard_normal() noexcept;
    double standard_exponential() noexcept;
    /// Gamma(shape, 1); shape > 0 (Marsaglia-Tsang).
    double gamma(double shape) noexcept;

private:
    void refill() noexcept;

    std::uint64_t seed_;
    std::uint64_t id_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;  // u32 words consumed from buffer_
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

/// SplitMix64 finalizer; used to derive stream ids.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace qso

#pragma once

#include <array>
#include <cstdint>

namespace heatlab {

// Counter-based generator (Philox 4x32-10). A stream is addressed by
// (seed, stream id): identical addresses replay identical draws and distinct
// ids give statistically independent streams. Monte Carlo code indexes
// streams by path (or grid point), which is what makes results independent
// of the worker count.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream_id) {}

    std::uint64_t next_u64() {
        if (pos_ >= 2) refill();
        return out_[pos_++];
    }

    // uniform in [0,1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in (0,1), never exactly 0 or 1
    double next_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double next_normal();  // inverse transform (see special.hpp quantile)

    int next_sign() { return (next_u64() & 1ull) ? 1 : -1; }

private:
    void refill();

    std::array<std::uint64_t, 2> out_{};
    std::uint32_t key_[2];
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    int pos_ = 2;
};

}  // namespace heatlab

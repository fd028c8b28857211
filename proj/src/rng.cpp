#include "heatlab/rng.hpp"

#include "heatlab/special.hpp"

namespace heatlab {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void round_once(std::uint32_t ctr[4], const std::uint32_t key[2]) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    ctr[0] = hi1 ^ ctr[1] ^ key[0];
    ctr[1] = lo1;
    ctr[2] = hi0 ^ ctr[3] ^ key[1];
    ctr[3] = lo0;
}

}  // namespace

void RngStream::refill() {
    std::uint32_t ctr[4] = {
        static_cast<std::uint32_t>(counter_),
        static_cast<std::uint32_t>(counter_ >> 32),
        static_cast<std::uint32_t>(stream_),
        static_cast<std::uint32_t>(stream_ >> 32),
    };
    std::uint32_t key[2] = {key_[0], key_[1]};
    for (int r = 0; r < 10; ++r) {
        round_once(ctr, key);
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    out_[0] = (static_cast<std::uint64_t>(ctr[1]) << 32) | ctr[0];
    out_[1] = (static_cast<std::uint64_t>(ctr[3]) << 32) | ctr[2];
    ++counter_;
    pos_ = 0;
}

double RngStream::next_normal() { return normal_quantile_fast(next_open()); }

}  // namespace heatlab

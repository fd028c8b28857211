#pragma once

#include <cstddef>

namespace heatlab::kernels::detail {

inline constexpr std::size_t kBlock = 1024;  // multiple of 4

bool avx2_available();

double sum_block_avx2(const double* x, std::size_t n);
double dot_block_avx2(const double* a, const double* b, std::size_t n);
void stencil_avx2(const double* src, double* dst, std::size_t m);

// Pairwise combiner for block sums (binary-counter scheme). Push order and
// the final low-to-high fold are fixed, so the result does not depend on how
// many blocks arrive or on the Isa that produced them.
struct PairwiseAcc {
    double slot[64];
    unsigned long long mask = 0;

    void push(double v) {
        unsigned level = 0;
        while ((mask >> level) & 1ull) {
            v = slot[level] + v;
            mask &= ~(1ull << level);
            ++level;
        }
        slot[level] = v;
        mask |= 1ull << level;
    }

    double finish() const {
        double s = 0.0;
        bool any = false;
        for (unsigned level = 0; level < 64; ++level) {
            if ((mask >> level) & 1ull) {
                s = any ? slot[level] + s : slot[level];
                any = true;
            }
        }
        return s;
    }
};

}  // namespace heatlab::kernels::detail

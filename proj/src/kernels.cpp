#include "heatlab/kernels.hpp"

#include <cassert>
#include <stdexcept>

#include "kernels_impl.hpp"

namespace heatlab::kernels {

using detail::kBlock;
using detail::PairwiseAcc;

namespace {

double sum_block_scalar(const double* x, std::size_t n) {
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc[0] += x[i];
        acc[1] += x[i + 1];
        acc[2] += x[i + 2];
        acc[3] += x[i + 3];
    }
    for (std::size_t l = 0; i < n; ++i, ++l) acc[l] += x[i];
    return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

double dot_block_scalar(const double* a, const double* b, std::size_t n) {
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    for (std::size_t l = 0; i < n; ++i, ++l) acc[l] += a[i] * b[i];
    return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

void stencil_scalar(const double* src, double* dst, std::size_t m) {
    for (std::size_t i = 0; i < m; ++i) {
        dst[i] = (0.25 * src[i] + 0.5 * src[i + 1]) + 0.25 * src[i + 2];
    }
}

}  // namespace

Isa selected_isa() {
    static const Isa isa = detail::avx2_available() ? Isa::avx2 : Isa::scalar;
    return isa;
}

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::avx2: return "avx2";
        default: return "scalar";
    }
}

double sum(std::span<const double> x, Isa isa) {
    PairwiseAcc acc;
    const double* p = x.data();
    std::size_t n = x.size();
    while (n > 0) {
        const std::size_t b = n < kBlock ? n : kBlock;
        acc.push(isa == Isa::avx2 ? detail::sum_block_avx2(p, b) : sum_block_scalar(p, b));
        p += b;
        n -= b;
    }
    return acc.finish();
}

double sum(std::span<const double> x) { return sum(x, selected_isa()); }

double dot(std::span<const double> a, std::span<const double> b, Isa isa) {
    if (a.size() != b.size()) throw std::invalid_argument("kernels::dot: size mismatch");
    PairwiseAcc acc;
    const double* pa = a.data();
    const double* pb = b.data();
    std::size_t n = a.size();
    while (n > 0) {
        const std::size_t blk = n < kBlock ? n : kBlock;
        acc.push(isa == Isa::avx2 ? detail::dot_block_avx2(pa, pb, blk)
                                  : dot_block_scalar(pa, pb, blk));
        pa += blk;
        pb += blk;
        n -= blk;
    }
    return acc.finish();
}

double dot(std::span<const double> a, std::span<const double> b) {
    return dot(a, b, selected_isa());
}

void stencil_quarter_half_quarter(std::span<const double> src, std::span<double> dst, Isa isa) {
    if (src.size() < 2 || dst.size() != src.size() - 2)
        throw std::invalid_argument("kernels::stencil: dst must have src.size()-2 elements");
    if (isa == Isa::avx2) {
        detail::stencil_avx2(src.data(), dst.data(), dst.size());
    } else {
        stencil_scalar(src.data(), dst.data(), dst.size());
    }
}

void stencil_quarter_half_quarter(std::span<const double> src, std::span<double> dst) {
    stencil_quarter_half_quarter(src, dst, selected_isa());
}

}  // namespace heatlab::kernels

#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace heatlab::kernels {

// Instruction set used by the dispatched kernels. The variant is picked once
// at startup from CPUID; every variant implements the same fixed accumulation
// order, so results are bit-identical across targets (equivalence-tested).
enum class Isa { scalar, avx2 };

Isa selected_isa();
std::string_view isa_name(Isa isa);

// dst[i] = 0.25*src[i] + 0.5*src[i+1] + 0.25*src[i+2] for i in [0, src.size()-2).
// dst may be the same buffer as src (left-aligned in-place shrink); any other
// overlap is undefined.
void stencil_quarter_half_quarter(std::span<const double> src, std::span<double> dst);
void stencil_quarter_half_quarter(std::span<const double> src, std::span<double> dst, Isa isa);

// Blocked reduction: within each 1024-element block four strided lane
// accumulators are folded as (l0+l2)+(l1+l3); block sums combine through a
// fixed pairwise tree. Deterministic and identical for every Isa.
double sum(std::span<const double> x);
double sum(std::span<const double> x, Isa isa);

double dot(std::span<const double> a, std::span<const double> b);
double dot(std::span<const double> a, std::span<const double> b, Isa isa);

}  // namespace heatlab::kernels

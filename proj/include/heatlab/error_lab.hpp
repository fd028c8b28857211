#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "heatlab/bridge.hpp"
#include "heatlab/exit_mc.hpp"
#include "heatlab/lattice.hpp"

namespace heatlab {

struct McBudget {
    std::int64_t glob_paths = 100000;
    std::int64_t q_paths = 2500;
    std::uint64_t seed = 12345;
    int workers = 0;          // 0 = HEATLAB_WORKERS / hardware
    bool fresh_tables = false;  // bypass the in-process q-table cache
};

// epsilon_n = total, split into adjustment + local + global; residual is the
// closure defect, to be judged against the combined uncertainty.
struct ErrorReport {
    double t = 0.0;
    double x = 0.0;
    std::int64_t n = 0;
    std::int64_t n_theta = 0;
    double theta_n = 0.0;
    bool on_lattice = false;
    double total = 0.0;
    double adj = 0.0;
    double loc = 0.0;
    double loc_unc = 0.0;
    double glob = 0.0;
    double glob_unc = 0.0;  // 3 standard errors
    double residual = 0.0;
    double quad_tol = 0.0;
    bool converged = true;

    double combined_unc() const { return loc_unc + glob_unc + quad_tol; }
};

ErrorReport decompose(const TerminalCondition& g, double t, double x, const LatticeParams& lp,
                      const McBudget& budget = {});

// Shares one walk population and one q-table across all terminal conditions.
std::vector<ErrorReport> decompose_batch(std::span<const TerminalCondition> gs, double t,
                                         double x, const LatticeParams& lp,
                                         const McBudget& budget = {});

struct RateFit {
    std::vector<std::int64_t> n;
    std::vector<double> abs_err;
    std::vector<bool> used;
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    bool degenerate = false;
    int points_used = 0;
};

// Least-squares slope of log|eps_n(t,x)| against log n; points at the
// numerical noise floor are excluded and sign changes flag the fit.
RateFit rate_study(const TerminalCondition& g, double t, double x, double T, double sigma,
                   std::span<const std::int64_t> n_list, const QuadratureSpec& quad = {});

struct SharpnessRow {
    std::int64_t n = 0;
    double eps = 0.0;
    double sqrt_n_eps = 0.0;
};

// Step-function benchmark at (t,x) = (0,0), T = sigma = 1; sqrt(n) eps_n
// approaches 1/sqrt(2 pi) from below.
std::vector<SharpnessRow> sharpness_run(std::span<const std::int64_t> n_list);

struct BlowupRow {
    double t = 0.0;
    std::int64_t n_theta = 0;
    bool on_lattice = false;
    double eps = 0.0;
    double envelope = 0.0;      // 1/sqrt(n (T - t_k)) on-lattice, 1/(sqrt(n)(T-t)) off
    double scaled_ratio = 0.0;  // |eps| / envelope
    double adj = 0.0;
    double adj_bound = 0.0;     // 8AT/(n(T-t)) e^{b|x| + b^2 sigma^2 T}, off-lattice
};

std::vector<BlowupRow> blowup_profile(const TerminalCondition& g, const LatticeParams& lp,
                                      std::span<const double> t_values, double x,
                                      const QuadratureSpec& quad = {});

struct HolderProbeRow {
    std::int64_t n = 0;
    double sup_eps = 0.0;
    double sup_scaled = 0.0;  // sup_t |eps_n(t,x)| n^{alpha/4}
};

std::vector<HolderProbeRow> holder_uniform_probe(const TerminalCondition& g, double T,
                                                 double sigma,
                                                 std::span<const std::int64_t> n_list, double x,
                                                 const QuadratureSpec& quad = {});

// Default experiment catalog; entries whose definition depends on the lattice
// (the off-lattice singularity at h/3) are materialized per n.
struct CatalogEntry {
    std::string name;
    TerminalCondition g;
};
std::vector<CatalogEntry> default_catalog(const LatticeParams& lp);

// Q-table reuse across decompositions with identical parameters.
std::shared_ptr<const QTable> qtable_for(double h, double theta, double sigma,
                                         std::int64_t paths, std::uint64_t seed, int workers,
                                         bool fresh = false);

}  // namespace heatlab

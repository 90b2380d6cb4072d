#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpkde/kernel.hpp"
#include "dpkde/selector.hpp"
#include "dpkde/testbed.hpp"
#include "dpkde/threshold.hpp"

namespace dpkde {

/// One bandwidth-selection method of the study: either least-squares
/// cross-validation or a discrepancy-principle variant (distance, threshold,
/// root rule).
struct MethodSpec {
    std::string label;
    bool is_lscv = false;
    DistanceSpec dist = DistanceSpec::kolmogorov();
    ThresholdSpec threshold = ThresholdSpec::power_law(1.0, 0.5);
    RootRule rule = RootRule::first;

    static MethodSpec lscv();
    static MethodSpec discrepancy(std::string label, DistanceSpec d, ThresholdSpec t,
                                  RootRule rule = RootRule::first);
    // "L2CV" or a preset label (V, ELR, KS50, KS95, KUIP50, KUIP95, L2NR);
    // the preset's conventional distance is used and L2NR is resolved
    // against `kernel`.
    static MethodSpec from_label(std::string_view label, const Kernel& kernel);
};

struct StudyConfig {
    std::vector<std::string> densities;             // registry ids
    std::vector<std::int64_t> sample_sizes = {100, 1000, 2500};
    int replicates = 250;
    std::vector<MethodSpec> methods;
    Kernel kernel = Kernel::epanechnikov();
    std::uint64_t master_seed = 1;
    int threads = 0;  // 0 => hardware concurrency
};

// The §-style default column set: L2CV, E-LR, V, KS .5, KS .95, Kuip .5,
// Kuip .95, L2NR, resolved against `kernel`.
std::vector<MethodSpec> default_methods(const Kernel& kernel);

struct StudyCell {
    std::string density_id;
    std::int64_t n = 0;
    std::string method_label;
    double mean_l1 = 0.0, se_l1 = 0.0;
    std::optional<double> mean_l2sq, se_l2sq;
    double mean_bandwidth = 0.0, se_bandwidth = 0.0;
    int failures = 0;
    int successes = 0;
};

/// Runs the full (density, n, replicate, method) grid. One sample is drawn
/// per replicate with seed derive_seed(master, density, n, replicate) and
/// shared by all methods (paired comparison). Results are independent of
/// thread count and of the order of the method and density lists up to the
/// declared ordering of the output. A cell whose selections all fail aborts
/// the run with a report.
std::vector<StudyCell> run_study(const StudyConfig& cfg, const DensityRegistry& reg);

enum class TableKind { l1, l2, bandwidth };

// CSV with header density,n,<method labels...>; one row per (density, n) in
// config order; entries rounded to 4 decimals like the reference tables.
// The L2 table omits densities that are not square-integrable.
void emit_table(std::span<const StudyCell> cells, const StudyConfig& cfg,
                TableKind kind, std::ostream& os);

// Full-precision per-cell dump (means, standard errors, failure counts).
void emit_cells_csv(std::span<const StudyCell> cells, std::ostream& os);

struct RateDiagnostic {
    std::vector<std::int64_t> n_grid;
    std::vector<double> mean_bandwidth;
    double slope = 0.0;  // least-squares slope of log mean h vs log n
    double gamma_over_ell = 0.0;
    // (c l! / (k_l d(f^(l-1), 0)))^(1/l) where d(f^(l-1), 0) is known
    // (analytic for the normal model, numeric where the pdf is smooth).
    std::optional<double> predicted_constant;
};

// Bandwidth-rate diagnostic for a power-law threshold: mean selected h on an
// n grid (>= 3 points) with `replicates` draws per n.
RateDiagnostic rate_diagnostic(const DensityModel& model, const Kernel& kernel,
                               const DistanceSpec& dist, const ThresholdSpec& thr,
                               std::span<const std::int64_t> n_grid, int replicates,
                               std::uint64_t master_seed, int threads = 0);

}  // namespace dpkde

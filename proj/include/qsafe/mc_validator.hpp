#pragma once

// Monte Carlo check of the composed bounds: simulate a world with known
// ground truth, run the statistical machinery on the simulated counts, and
// count how often the bound actually covers the true violation probability.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qsafe/budget.hpp"
#include "qsafe/evidence.hpp"
#include "qsafe/rng.hpp"

namespace qsafe::mc {

struct GroundTruth {
    double p_srf = 0.0;
    double p_oos = 0.0;
    double p_detect_srf = 0.0;
    double p_detect_oos = 0.0;
    double p_lf = 0.0;
};

/// Throws std::invalid_argument for values outside [0, 1] and, unless
/// `allow_preposition_violation`, when 1 - p_oos < p_detect_srf.
void validate(const GroundTruth& truth, bool allow_preposition_violation = false);

/// Factored: p_srf (1 - p_oos)(1 - p_detect_srf) + p_oos (1 - p_detect_oos).
/// Linearized: p_srf (1 - p_oos - p_detect_srf) + p_oos (1 - p_detect_oos).
enum class TruthForm { Factored, Linearized };

/// True violation probability, worst case for out-of-scope inputs.
[[nodiscard]] double true_violation_probability(const GroundTruth& truth, TruthForm form = TruthForm::Factored);

struct CampaignDesign {
    Count n_test = 100000;
    /// Size of the detection evaluation set; nullopt draws it from the
    /// simulated count of true failures.
    std::optional<Count> n_detect_eval;
    double cl = 0.99;
    ConfidenceMode mode = ConfidenceMode::PaperFaithful;
    CaseId case_id;
};

struct SimOutcome {
    Count k_test = 0;
    Count detected = 0;
    Count srf_count = 0;
    /// Size of the detection campaign the detected count refers to.
    Count detect_total = 0;

    friend bool operator==(const SimOutcome&, const SimOutcome&) = default;
};

/// Binomial(n, p) draw by inversion from one uniform. The lower tail below
/// mean - 20 sd (mass < 1e-43) is skipped.
[[nodiscard]] Count sample_binomial(Count n, double p, double uniform);

/// k_test ~ Bin(n_test, max(0, p_srf - p_lf)) (every label fault hides a
/// failure), srf_count ~ Bin(n_test, p_srf), detected ~ Bin(m, p_detect_srf)
/// with m = srf_count or n_detect_eval. Each draw has its own stream.
[[nodiscard]] SimOutcome simulate_campaign(const GroundTruth& truth, const CampaignDesign& design,
                                           std::uint64_t seed);

/// The bundle a simulated campaign would declare. Expert quantities come
/// from the truth; labels are declared iff the case is label-adjusted.
[[nodiscard]] CaseBundle simulated_bundle(const GroundTruth& truth, const CampaignDesign& design,
                                          const SimOutcome& outcome);

inline constexpr std::size_t kMaxRecordedViolations = 100;

struct CoverageReport {
    Count runs = 0;
    Count covered = 0;
    double coverage = 0.0;
    /// Mean of (bound - true value) over covered runs.
    double mean_slack = 0.0;
    /// Sample standard deviation of the same quantity.
    double slack_sd = 0.0;
    std::uint64_t seed = 0;
    /// First uncovered run indices, capped at kMaxRecordedViolations.
    std::vector<Count> violations;
    double p_true = 0.0;

    friend bool operator==(const CoverageReport&, const CoverageReport&) = default;
};

struct ExperimentOptions {
    /// Worker threads; results do not depend on it.
    unsigned workers = 1;
    TruthForm truth_form = TruthForm::Factored;
};

[[nodiscard]] CoverageReport coverage_experiment(const GroundTruth& truth, const CampaignDesign& design, Count runs,
                                                 std::uint64_t seed, const ExperimentOptions& options = {});

/// Lower acceptance limit cl - 3 sqrt(cl (1 - cl) / runs).
[[nodiscard]] double coverage_floor(double cl, Count runs);

struct GridPoint {
    GroundTruth truth;
    CaseId case_id;
    ConfidenceMode mode = ConfidenceMode::PaperFaithful;
    CoverageReport report;
    double floor = 0.0;

    [[nodiscard]] bool passes() const noexcept { return report.coverage >= floor; }
};

struct GridSpec {
    std::vector<double> p_srf = {0.0005, 0.0018, 0.01};
    std::vector<double> p_lf = {0.0, 0.001};
    std::vector<CaseBase> cases = {CaseBase::B, CaseBase::C, CaseBase::D};
    std::vector<ConfidenceMode> modes = {ConfidenceMode::PaperFaithful, ConfidenceMode::Bonferroni};
    /// Scope and detection truth used for cases that take them.
    double p_oos = 0.0005;
    double p_detect_srf = 0.30;
    double p_detect_oos = 0.495;
    Count n_test = 100000;
    double cl = 0.99;
    Count runs = 5000;
};

/// Every combination in the grid, each with the same seed so modes are
/// compared on identical simulated campaigns. Cases are label-adjusted
/// whenever p_lf > 0.
[[nodiscard]] std::vector<GridPoint> coverage_grid(const GridSpec& spec, std::uint64_t seed,
                                                   const ExperimentOptions& options = {});

[[nodiscard]] std::string grid_csv(const std::vector<GridPoint>& points);

} // namespace qsafe::mc

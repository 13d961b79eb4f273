#include "qsafe/mc_validator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "qsafe/case_dsl.hpp"
#include "qsafe/error.hpp"

namespace qsafe::mc {

namespace {

enum Stream : std::uint64_t { TestStream = 0, SrfStream = 1, DetectStream = 2 };

// The lower tail below mean - 20 sd has mass < exp(-200 q) <= 4e-44.
constexpr double kTailSds = 20.0;

void check_unit(double value, const char* name) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw std::invalid_argument(std::string("ground truth ") + name + " must lie in [0, 1]");
    }
}

struct RunResult {
    bool covered = false;
    double slack = 0.0;
};

} // namespace

void validate(const GroundTruth& truth, bool allow_preposition_violation) {
    check_unit(truth.p_srf, "p_srf");
    check_unit(truth.p_oos, "p_oos");
    check_unit(truth.p_detect_srf, "p_detect_srf");
    check_unit(truth.p_detect_oos, "p_detect_oos");
    check_unit(truth.p_lf, "p_lf");
    if (!allow_preposition_violation && 1.0 - truth.p_oos < truth.p_detect_srf) {
        throw std::invalid_argument("ground truth violates 1 - p_oos >= p_detect_srf");
    }
}

double true_violation_probability(const GroundTruth& truth, TruthForm form) {
    const double in_scope = form == TruthForm::Factored
                                ? truth.p_srf * (1.0 - truth.p_oos) * (1.0 - truth.p_detect_srf)
                                : truth.p_srf * (1.0 - truth.p_oos - truth.p_detect_srf);
    return in_scope + truth.p_oos * (1.0 - truth.p_detect_oos);
}

Count sample_binomial(Count n, double p, double uniform) {
    if (n == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    if (p > 0.5) return n - sample_binomial(n, 1.0 - p, 1.0 - uniform);

    const double q = 1.0 - p;
    const double size = static_cast<double>(n);
    const double mean = size * p;
    const double sd = std::sqrt(mean * q);
    const double start = std::floor(mean - kTailSds * sd);
    Count k = start > 0.0 ? static_cast<Count>(start) : 0;

    double pmf = std::exp(binom_log_pmf(k, n, p));
    double cumulative = 0.0;
    const double ratio = p / q;
    for (; k < n; ++k) {
        cumulative += pmf;
        if (uniform < cumulative) return k;
        pmf *= static_cast<double>(n - k) / static_cast<double>(k + 1) * ratio;
        // Past the mode with nothing left to add: rounding kept cumulative below uniform.
        if (static_cast<double>(k) > mean && pmf < 1e-17 * cumulative) return k + 1;
    }
    return n;
}

SimOutcome simulate_campaign(const GroundTruth& truth, const CampaignDesign& design, std::uint64_t seed) {
    SimOutcome out;
    const double observed_rate = std::max(0.0, truth.p_srf - truth.p_lf);
    out.k_test = sample_binomial(design.n_test, observed_rate, CounterRng(seed, TestStream).uniform());
    out.srf_count = sample_binomial(design.n_test, truth.p_srf, CounterRng(seed, SrfStream).uniform());
    out.detect_total = design.n_detect_eval.value_or(out.srf_count);
    out.detected = sample_binomial(out.detect_total, truth.p_detect_srf, CounterRng(seed, DetectStream).uniform());
    return out;
}

CaseBundle simulated_bundle(const GroundTruth& truth, const CampaignDesign& design, const SimOutcome& outcome) {
    CaseBundle b;
    b.id = "simulated";
    b.target = SafetyTarget{Probability(0.5), ConfidenceLevel(design.cl)};
    b.test = TestEvidence{design.n_test, outcome.k_test};
    const CaseBase base = design.case_id.base;
    if (base == CaseBase::B) {
        b.assumptions.emplace_back(kClosedScopeAssumption);
    } else {
        b.scope = ScopeEvidence{Probability(truth.p_oos), Provenance::Expert, "ground truth"};
    }
    if ((base == CaseBase::D || base == CaseBase::E) && outcome.detect_total > 0) {
        b.detect_srf = DetectionEvidence{DetectionKind::Srf, DetectionCampaign{outcome.detected, outcome.detect_total},
                                         Provenance::Data, "simulated campaign"};
    }
    if (base == CaseBase::E) {
        b.detect_oos = DetectionEvidence{DetectionKind::Oos, Probability(truth.p_detect_oos), Provenance::Expert,
                                         "ground truth"};
    }
    if (design.case_id.label_adjusted) b.labels = LabelQuality{Probability(truth.p_lf)};
    return b;
}

CoverageReport coverage_experiment(const GroundTruth& truth, const CampaignDesign& design, Count runs,
                                   std::uint64_t seed, const ExperimentOptions& options) {
    if (runs == 0) throw std::invalid_argument("coverage_experiment: runs must be >= 1");
    if (design.n_test == 0) throw std::invalid_argument("coverage_experiment: n_test must be >= 1");
    validate(truth);
    (void)ConfidenceLevel(design.cl);

    const double p_true = true_violation_probability(truth, options.truth_form);
    std::vector<RunResult> results(runs);

    const auto run_one = [&](Count index) {
        const SimOutcome outcome = simulate_campaign(truth, design, derive_run_seed(seed, index));
        const CaseBundle bundle = simulated_bundle(truth, design, outcome);
        const ResolvedEstimates r = resolve_estimates(bundle, design.mode);
        RunResult& result = results[index];
        try {
            const BoundReport report = evaluate_bound(r, applicable_case(bundle), *bundle.target);
            result.slack = report.p_safe_upper - p_true;
            result.covered = report.p_safe_upper >= p_true;
        } catch (const QsafeError&) {
            result.covered = false;
        }
    };

    const unsigned workers = std::max(1u, options.workers);
    if (workers == 1) {
        for (Count i = 0; i < runs; ++i) run_one(i);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (Count i = w; i < runs; i += workers) run_one(i);
            });
        }
        for (auto& t : pool) t.join();
    }

    CoverageReport report;
    report.runs = runs;
    report.seed = seed;
    report.p_true = p_true;
    double sum = 0.0;
    for (Count i = 0; i < runs; ++i) {
        if (results[i].covered) {
            ++report.covered;
            sum += results[i].slack;
        } else if (report.violations.size() < kMaxRecordedViolations) {
            report.violations.push_back(i);
        }
    }
    report.coverage = static_cast<double>(report.covered) / static_cast<double>(runs);
    if (report.covered > 0) report.mean_slack = sum / static_cast<double>(report.covered);
    if (report.covered > 1) {
        double squares = 0.0;
        for (const auto& r : results) {
            if (r.covered) squares += (r.slack - report.mean_slack) * (r.slack - report.mean_slack);
        }
        report.slack_sd = std::sqrt(squares / static_cast<double>(report.covered - 1));
    }
    return report;
}

double coverage_floor(double cl, Count runs) {
    return cl - 3.0 * std::sqrt(cl * (1.0 - cl) / static_cast<double>(runs));
}

std::vector<GridPoint> coverage_grid(const GridSpec& spec, std::uint64_t seed, const ExperimentOptions& options) {
    std::vector<GridPoint> points;
    for (const double p_srf : spec.p_srf) {
        for (const double p_lf : spec.p_lf) {
            for (const CaseBase base : spec.cases) {
                for (const ConfidenceMode mode : spec.modes) {
                    GridPoint point;
                    point.truth.p_srf = p_srf;
                    point.truth.p_lf = p_lf;
                    if (base != CaseBase::B) point.truth.p_oos = spec.p_oos;
                    if (base == CaseBase::D || base == CaseBase::E) point.truth.p_detect_srf = spec.p_detect_srf;
                    if (base == CaseBase::E) point.truth.p_detect_oos = spec.p_detect_oos;
                    point.case_id = CaseId{base, p_lf > 0.0};
                    point.mode = mode;
                    CampaignDesign design;
                    design.n_test = spec.n_test;
                    design.cl = spec.cl;
                    design.mode = mode;
                    design.case_id = point.case_id;
                    point.report = coverage_experiment(point.truth, design, spec.runs, seed, options);
                    point.floor = coverage_floor(spec.cl, spec.runs);
                    points.push_back(std::move(point));
                }
            }
        }
    }
    return points;
}

std::string grid_csv(const std::vector<GridPoint>& points) {
    std::ostringstream out;
    out << "p_srf,p_lf,case,mode,runs,covered,coverage,mean_slack,floor,pass\n";
    for (const auto& p : points) {
        out << dsl::format_number(p.truth.p_srf) << ',' << dsl::format_number(p.truth.p_lf) << ','
            << to_string(p.case_id) << ',' << to_string(p.mode) << ',' << p.report.runs << ',' << p.report.covered
            << ',' << dsl::format_number(p.report.coverage) << ',' << dsl::format_number(p.report.mean_slack) << ','
            << dsl::format_number(p.floor) << ',' << (p.passes() ? "true" : "false") << '\n';
    }
    return out.str();
}

} // namespace qsafe::mc

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "qsafe/argument_tree.hpp"
#include "qsafe/budget.hpp"
#include "qsafe/mc_validator.hpp"

namespace qsafe::cli {

struct Streams {
    std::ostream& out;
    std::ostream& err;
};

struct CaseOptions {
    std::string file;
    std::string mode = "paper";
    std::string interval = "cp";
    std::optional<double> at_time;
};

struct CheckOptions {
    CaseOptions input;
    std::string format = "text";
};

struct DeriveOptions {
    CaseOptions input;
    std::string format = "text";
    std::string solve_for = "failures";
    std::optional<double> expected_rate;
    Count sample_cap = kDefaultSampleCap;
};

struct SensitivityOptions {
    CaseOptions input;
    std::string vary;
    double from = 0.0;
    double to = 0.0;
    Count steps = 11;
    std::string out = "csv";
};

struct SimulateOptions {
    mc::GroundTruth truth;
    Count n = 100000;
    std::optional<Count> n_detect;
    double cl = 0.99;
    std::string case_id = "B";
    std::string mode = "paper";
    Count runs = 10000;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    std::string truth_form = "factored";
    bool grid = false;
};

struct RenderOptions {
    CaseOptions input;
    std::string format = "dot";
};

int cmd_check(const CheckOptions& options, Streams io);
int cmd_derive(const DeriveOptions& options, Streams io);
int cmd_sensitivity(const SensitivityOptions& options, Streams io);
int cmd_simulate(const SimulateOptions& options, Streams io);
int cmd_render(const RenderOptions& options, Streams io);

// Text and Markdown renderings (format.cpp).
struct CheckView {
    const CaseBundle& bundle;
    const ResolvedEstimates& estimates;
    const BoundReport& report;
    const ArgumentNode& tree;
    ConfidenceMode mode;
};

void print_check_text(const CheckView& view, std::ostream& out);
void print_check_markdown(const CheckView& view, std::ostream& out);
void print_derive_text(const CaseBundle& bundle, const DerivationResult& d, ConfidenceMode mode, std::ostream& out);
void print_derive_markdown(const CaseBundle& bundle, const DerivationResult& d, ConfidenceMode mode,
                           std::ostream& out);

} // namespace qsafe::cli

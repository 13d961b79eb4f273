#include <charconv>
#include <cmath>
#include <stdexcept>

#include "qsafe/case_dsl.hpp"

namespace qsafe::dsl {

std::string format_number(double value) {
    char buffer[64];
    const double magnitude = std::fabs(value);
    const bool fixed = magnitude == 0.0 || (magnitude >= 1e-7 && magnitude < 1e16);
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                         fixed ? std::chars_format::fixed : std::chars_format::scientific);
    if (ec != std::errc()) throw std::runtime_error("format_number: conversion failed");
    return std::string(buffer, ptr);
}

std::string quote(std::string_view text) {
    std::string out = "\"";
    for (const char c : text) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

namespace {

void write_source(std::string& out, Provenance provenance, const std::string& justification,
                  Provenance default_provenance) {
    if (provenance == default_provenance && justification.empty()) return;
    out += "    source = ";
    out += to_string(provenance);
    out += ' ';
    out += quote(justification);
    out += '\n';
}

void write_detection(std::string& out, const DetectionEvidence& det) {
    out += "  detection ";
    out += to_string(det.kind);
    out += " {\n";
    if (const auto* campaign = std::get_if<DetectionCampaign>(&det.form)) {
        out += "    observed = " + std::to_string(campaign->detected) + " of " + std::to_string(campaign->total) + "\n";
    } else {
        out += "    p_detect = " + format_number(std::get<Probability>(det.form).value()) + "\n";
    }
    write_source(out, det.provenance, det.justification, det.is_campaign() ? Provenance::Data : Provenance::Expert);
    out += "  }\n";
}

} // namespace

std::string serialize(const CaseBundle& bundle) {
    std::string out = "case " + quote(bundle.id) + " {\n";
    if (bundle.target) {
        out += "  target {\n";
        out += "    p_target = " + format_number(bundle.target->p_target.value()) + "\n";
        out += "    confidence = " + format_number(bundle.target->cl.value()) + "\n";
        out += "  }\n";
    }
    if (bundle.scope) {
        out += "  scope {\n";
        if (const auto* point = std::get_if<Probability>(&bundle.scope->form)) {
            out += "    p_oos = " + format_number(point->value()) + "\n";
        } else {
            out += "    profile {\n";
            for (const auto& pt : std::get<ScopeProfile>(bundle.scope->form)) {
                out += "      " + format_number(pt.hours) + " -> " + format_number(pt.p.value()) + "\n";
            }
            out += "    }\n";
        }
        write_source(out, bundle.scope->provenance, bundle.scope->justification, Provenance::Expert);
        out += "  }\n";
    }
    if (bundle.mission_time) {
        out += "  mission_time = " + format_number(*bundle.mission_time) + "\n";
    }
    if (bundle.test) {
        out += "  testing {\n";
        out += "    samples = " + std::to_string(bundle.test->samples) + "\n";
        out += "    failures = " + std::to_string(bundle.test->failures) + "\n";
        out += "  }\n";
    }
    if (bundle.detect_srf) write_detection(out, *bundle.detect_srf);
    if (bundle.detect_oos) write_detection(out, *bundle.detect_oos);
    if (bundle.labels) {
        out += "  labels {\n";
        if (const auto* rate = std::get_if<Probability>(&bundle.labels->form)) {
            out += "    rate = " + format_number(rate->value()) + "\n";
        } else {
            const auto& audit = std::get<LabelAudit>(bundle.labels->form);
            out += "    audit = " + std::to_string(audit.disagreements) + " of " + std::to_string(audit.audited) + "\n";
        }
        out += "  }\n";
    }
    for (const auto& assumption : bundle.assumptions) {
        out += "  assume " + quote(assumption) + "\n";
    }
    out += "}\n";
    return out;
}

} // namespace qsafe::dsl

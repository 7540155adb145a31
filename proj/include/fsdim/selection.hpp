#pragma once

#include "fsdim/dimension.hpp"
#include "fsdim/machine.hpp"

#include "json.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fsdim {

struct Selection {
    Bits selected;
    Bits complement;
    std::vector<std::uint64_t> positions;  // indices of x that were selected
};

// Outputs x_i whenever the state before reading x_i is selecting; the rest goes
// to the complement.
Selection apply_selector(const Machine& s, std::span<const std::uint8_t> x);

// Total stationary mass of the selecting states.
double lambda_of(const Machine& s);

// d-state cycle selecting at residue j, extracting x_j x_{j+d} x_{j+2d} ...
Machine ap_selector(unsigned period, unsigned residue);

// Product bettor on (selector, g1, g2) states: bets like g1 while the selector is
// in a selecting state and like g2 otherwise; only the bettor that placed the bet
// advances.
Machine combine_selector_martingale(const Machine& selector, const Machine& g1, const Machine& g2);

struct AgafonovOptions {
    EstimatorOptions estimator;
    double tight_tol = 0.05;  // |lhs - dim_input| within this is "tight"
    double epsilon = 0.1;     // shortfalls up to this are "holds_within"
};

enum class Verdict { holds_within, fails_by, tight, strict };
std::string to_string(Verdict v);

struct AgafonovReport {
    double lambda = 0.0;
    double dim_selected = 0.0;
    double strong_dim_complement = 0.0;
    double lhs = 0.0;
    double dim_input = 0.0;
    Verdict verdict = Verdict::tight;
    double gap = 0.0;  // lhs - dim_input
    double tight_tol = 0.05;
    double epsilon = 0.1;
    std::uint64_t n = 0;
    std::uint64_t selected_length = 0;
    std::uint64_t complement_length = 0;
    double state_gap = 0.0;
    DimensionReport input;
    DimensionReport selected;
    DimensionReport complement;
};

Verdict classify(double lhs, double dim_input, double tight_tol, double epsilon);

// Selected and complement subsequences are estimated on their own lengths.
AgafonovReport agafonov_report(const Machine& s, std::span<const std::uint8_t> x, std::size_t n,
                               const ChainFamily& family, const AgafonovOptions& options = {});

nlohmann::ordered_json report_to_json(const AgafonovReport& r);

struct LowerBoundReport {
    double lambda = 0.0;
    double dim_input = 0.0;
    double bound = 0.0;     // (dim_input - (1 - lambda)) / lambda
    double measured = 0.0;  // dim estimate of the selected subsequence
    double state_gap = 0.0;
    double gap_threshold = 0.05;
    bool hypothesis_met = false;  // state_gap <= gap_threshold
    std::uint64_t selected_length = 0;
};

LowerBoundReport selection_lower_bound(const Machine& s, std::span<const std::uint8_t> x, std::size_t n,
                                       const ChainFamily& family, const EstimatorOptions& options = {},
                                       double gap_threshold = 0.05);

nlohmann::ordered_json report_to_json(const LowerBoundReport& r);

}  // namespace fsdim

#include "fsdim/selection.hpp"

#include "fsdim/error.hpp"
#include "fsdim/markov.hpp"

#include <cmath>
#include <future>

namespace fsdim {

Selection apply_selector(const Machine& s, std::span<const std::uint8_t> x) {
    if (!s.has_selecting()) throw Error("apply_selector: machine has no selecting states");
    Selection out;
    StateId q = s.start();
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (s.selects(q)) {
            out.selected.push_back(x[i]);
            out.positions.push_back(i);
        } else {
            out.complement.push_back(x[i]);
        }
        q = s.next(q, x[i]);
    }
    return out;
}

double lambda_of(const Machine& s) {
    if (!s.has_selecting()) throw Error("lambda_of: machine has no selecting states");
    auto pi = stationary(induce_chain(s));
    double lambda = 0.0;
    for (StateId q = 0; q < s.size(); ++q)
        if (s.selects(q)) lambda += pi[q];
    return lambda;
}

Machine ap_selector(unsigned period, unsigned residue) {
    if (period == 0 || residue >= period)
        throw Error("ap_selector needs d >= 1 and 0 <= j < d (got d=" + std::to_string(period) +
                    ", j=" + std::to_string(residue) + ")");
    std::vector<bool> sel(period, false);
    sel[residue] = true;
    return cycle_machine(period).with_selecting(std::move(sel));
}

Machine combine_selector_martingale(const Machine& selector, const Machine& g1, const Machine& g2) {
    if (!selector.has_selecting()) throw Error("combine: selector has no selecting states");
    if (!g1.has_betting() || !g2.has_betting()) throw Error("combine: both gamblers need betting functions");
    const std::size_t n1 = g1.size(), n2 = g2.size();
    auto id = [&](StateId s, StateId a, StateId b) { return static_cast<StateId>((s * n1 + a) * n2 + b); };

    const std::size_t total = selector.size() * n1 * n2;
    std::vector<std::string> names;
    std::vector<std::array<StateId, 2>> delta;
    std::vector<double> beta;
    names.reserve(total);
    delta.reserve(total);
    beta.reserve(total);
    for (StateId s = 0; s < selector.size(); ++s)
        for (StateId a = 0; a < n1; ++a)
            for (StateId b = 0; b < n2; ++b) {
                bool sel = selector.selects(s);
                names.push_back(selector.name(s) + "," + g1.name(a) + "," + g2.name(b));
                std::array<StateId, 2> next{};
                for (std::uint8_t bit = 0; bit < 2; ++bit)
                    next[bit] = sel ? id(selector.next(s, bit), g1.next(a, bit), b)
                                    : id(selector.next(s, bit), a, g2.next(b, bit));
                delta.push_back(next);
                beta.push_back(sel ? g1.bet(a) : g2.bet(b));
            }
    Machine m(std::move(names), id(selector.start(), g1.start(), g2.start()), std::move(delta));
    return m.with_betting(std::move(beta));
}

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::holds_within: return "holds_within";
    case Verdict::fails_by: return "fails_by";
    case Verdict::tight: return "tight";
    case Verdict::strict: return "strict";
    }
    return "unknown";
}

Verdict classify(double lhs, double dim_input, double tight_tol, double epsilon) {
    double gap = lhs - dim_input;
    if (std::abs(gap) <= tight_tol) return Verdict::tight;
    if (gap > 0.0) return Verdict::strict;
    return -gap <= epsilon ? Verdict::holds_within : Verdict::fails_by;
}

namespace {

void require_nondegenerate(double lambda) {
    // lambda is a sum of solved probabilities; treat roundoff-level values as the endpoints
    if (lambda <= 1e-12 || lambda >= 1.0 - 1e-12)
        throw PreconditionError("degenerate selector: lambda = " + std::to_string(lambda) +
                                "; some but not all of its ergodic states must select");
}

double selector_state_gap(const Machine& s, std::span<const std::uint8_t> x, std::size_t n) {
    FairChain c = with_stationary(induce_chain(s));
    std::uint64_t checkpoint = n;
    auto trace = run_trace(c.automaton, x, std::span<const std::uint64_t>(&checkpoint, 1));
    return state_gap(c, trace);
}

DimensionReport estimate_subsequence(const Bits& bits, const ChainFamily& family, const EstimatorOptions& options,
                                     const char* what) {
    if (bits.empty()) throw PreconditionError(std::string(what) + " subsequence is empty; increase n");
    return family_dimension(bits, bits.size(), family, options);
}

}  // namespace

AgafonovReport agafonov_report(const Machine& s, std::span<const std::uint8_t> x, std::size_t n,
                               const ChainFamily& family, const AgafonovOptions& options) {
    if (n > x.size()) throw Error("prefix length exceeds sequence length");
    AgafonovReport r;
    r.lambda = lambda_of(s);
    require_nondegenerate(r.lambda);
    auto prefix = x.first(n);
    Selection sel = apply_selector(s, prefix);
    r.n = n;
    r.selected_length = sel.selected.size();
    r.complement_length = sel.complement.size();
    r.tight_tol = options.tight_tol;
    r.epsilon = options.epsilon;

    auto input = std::async(std::launch::async, [&] { return family_dimension(prefix, n, family, options.estimator); });
    auto selected = std::async(std::launch::async,
                               [&] { return estimate_subsequence(sel.selected, family, options.estimator, "selected"); });
    auto complement = std::async(std::launch::async, [&] {
        return estimate_subsequence(sel.complement, family, options.estimator, "complement");
    });
    r.input = input.get();
    r.selected = selected.get();
    r.complement = complement.get();
    r.state_gap = selector_state_gap(s, prefix, n);

    r.dim_input = r.input.dim_est;
    r.dim_selected = r.selected.dim_est;
    r.strong_dim_complement = r.complement.strong_dim_est;
    r.lhs = r.lambda * r.dim_selected + (1.0 - r.lambda) * r.strong_dim_complement;
    r.gap = r.lhs - r.dim_input;
    r.verdict = classify(r.lhs, r.dim_input, r.tight_tol, r.epsilon);
    return r;
}

nlohmann::ordered_json report_to_json(const AgafonovReport& r) {
    nlohmann::ordered_json j;
    j["lambda"] = r.lambda;
    j["dim_selected"] = r.dim_selected;
    j["strong_dim_complement"] = r.strong_dim_complement;
    j["lhs"] = r.lhs;
    j["dim_input"] = r.dim_input;
    j["gap"] = r.gap;
    nlohmann::ordered_json v;
    v["kind"] = to_string(r.verdict);
    if (r.verdict == Verdict::fails_by) v["by"] = -r.gap;
    if (r.verdict == Verdict::holds_within) v["epsilon"] = r.epsilon;
    v["tight_tol"] = r.tight_tol;
    j["verdict"] = std::move(v);
    j["n"] = r.n;
    j["selected_length"] = r.selected_length;
    j["complement_length"] = r.complement_length;
    j["state_gap"] = r.state_gap;
    j["input"] = report_to_json(r.input);
    j["selected"] = report_to_json(r.selected);
    j["complement"] = report_to_json(r.complement);
    return j;
}

LowerBoundReport selection_lower_bound(const Machine& s, std::span<const std::uint8_t> x, std::size_t n,
                                       const ChainFamily& family, const EstimatorOptions& options,
                                       double gap_threshold) {
    if (n > x.size()) throw Error("prefix length exceeds sequence length");
    LowerBoundReport r;
    r.lambda = lambda_of(s);
    if (r.lambda <= 0.0) throw PreconditionError("selector has lambda = 0");
    auto prefix = x.first(n);
    Selection sel = apply_selector(s, prefix);
    r.selected_length = sel.selected.size();
    auto input = std::async(std::launch::async, [&] { return family_dimension(prefix, n, family, options); });
    auto selected = estimate_subsequence(sel.selected, family, options, "selected");
    r.dim_input = input.get().dim_est;
    r.measured = selected.dim_est;
    r.bound = (r.dim_input - (1.0 - r.lambda)) / r.lambda;
    r.state_gap = selector_state_gap(s, prefix, n);
    r.gap_threshold = gap_threshold;
    r.hypothesis_met = r.state_gap <= gap_threshold;
    return r;
}

nlohmann::ordered_json report_to_json(const LowerBoundReport& r) {
    nlohmann::ordered_json j;
    j["lambda"] = r.lambda;
    j["dim_input"] = r.dim_input;
    j["bound"] = r.bound;
    j["measured"] = r.measured;
    j["state_gap"] = r.state_gap;
    j["gap_threshold"] = r.gap_threshold;
    j["hypothesis_met"] = r.hypothesis_met;
    j["selected_length"] = r.selected_length;
    return j;
}

}  // namespace fsdim

#pragma once

#include "fsdim/sequence.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fsdim {

using StateId = std::uint32_t;

// Deterministic automaton over {0,1}, optionally carrying a selecting-state set
// (selector) and/or a betting function (finite-state martingale). beta(q) is the
// fraction of capital bet on the next bit being 0.
class Machine {
public:
    Machine() = default;
    Machine(std::vector<std::string> names, StateId start, std::vector<std::array<StateId, 2>> delta);

    std::size_t size() const noexcept { return delta_.size(); }
    StateId start() const noexcept { return start_; }
    StateId next(StateId q, std::uint8_t bit) const { return delta_[q][bit]; }
    const std::vector<std::array<StateId, 2>>& delta() const noexcept { return delta_; }
    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::string& name(StateId q) const { return names_[q]; }
    std::optional<StateId> find(std::string_view name) const;

    bool has_selecting() const noexcept { return selecting_.has_value(); }
    bool selects(StateId q) const { return selecting_ && (*selecting_)[q]; }
    const std::optional<std::vector<bool>>& selecting() const noexcept { return selecting_; }

    bool has_betting() const noexcept { return betting_.has_value(); }
    double bet(StateId q) const { return (*betting_)[q]; }
    const std::optional<std::vector<double>>& betting() const noexcept { return betting_; }

    Machine with_selecting(std::vector<bool> selecting) const;
    Machine with_selecting_names(std::span<const std::string> names) const;
    Machine with_betting(std::vector<double> betting) const;
    Machine without_decorations() const;

    // Selector with the complementary selecting set Q \ S.
    Machine complement() const;

    // Final state after reading `w` from the start state.
    StateId run(std::span<const std::uint8_t> w) const;

private:
    std::vector<std::string> names_;
    StateId start_ = 0;
    std::vector<std::array<StateId, 2>> delta_;
    std::optional<std::vector<bool>> selecting_;
    std::optional<std::vector<double>> betting_;
};

// Text format, one declaration per line, '#' starts a comment:
//   states: a b c d
//   start: a
//   trans: a 0 b
//   select: a c
//   bet: a 0.5        (or an exact rational such as 1/3)
Machine parse_machine(std::string_view text);
Machine load_machine(const std::filesystem::path& path);
std::string format_machine(const Machine& m);

struct ErgodicAnalysis {
    // Communication classes, each listed in ascending state order, ordered by
    // their smallest state.
    std::vector<std::vector<StateId>> classes;
    std::vector<std::size_t> class_of;
    std::vector<std::vector<StateId>> ergodic_sets;
    // Exactly one ergodic set, reachable from every state. Transient states are allowed.
    bool irreducible = false;

    bool in_ergodic_set(StateId q) const;
    // The unique ergodic set; throws ReducibleChain when there is none or several.
    const std::vector<StateId>& ergodic_set() const;
};

ErgodicAnalysis ergodic_analysis(const Machine& m);

// Strongly connected components of a directed graph given by adjacency lists.
// Components are returned in reverse topological order (sinks first).
std::vector<std::vector<StateId>> strongly_connected_components(
    const std::vector<std::vector<StateId>>& graph);

// Irreducible machine behaving like `m` on every sequence extending `w`: a fresh
// transient path reading w, followed by m restricted to the ergodic set in which
// the run on w ends. Off-prefix bits on the path advance along the path anyway.
Machine irreducible_completion(const Machine& m, std::span<const std::uint8_t> w);

// Shortest input driving m from its start state into an ergodic set.
Bits absorption_prefix(const Machine& m);

// Standard automata used as chains throughout.
Machine block_machine(unsigned depth);                  // state = last `depth` bits
Machine phase_machine(unsigned period, unsigned depth); // state = (i mod period, last `depth` bits)
Machine cycle_machine(unsigned period);                 // i -> i+1 mod period on both bits
Machine figure1_machine();                              // four-state base automaton a,b,c,d

}  // namespace fsdim

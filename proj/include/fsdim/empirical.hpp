#pragma once

#include "fsdim/machine.hpp"
#include "fsdim/markov.hpp"

#include "json.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fsdim {

// Probability mass over (state, outgoing edge) pairs; edge b of state q is the
// transition taken on bit b, stored at index 2q + b. Mass can only sit on edges
// leaving their state.
class JointDistribution {
public:
    JointDistribution() = default;
    explicit JointDistribution(std::vector<double> mass);
    static JointDistribution from_counts(std::span<const std::uint64_t> counts, std::uint64_t n);

    std::size_t states() const noexcept { return mass_.size() / 2; }
    double at(StateId q, std::uint8_t bit) const { return mass_[2 * q + bit]; }
    const std::vector<double>& mass() const noexcept { return mass_; }

    double marginal(StateId q) const { return mass_[2 * q] + mass_[2 * q + 1]; }
    std::vector<double> marginals() const;
    // Conditional edge distribution given q; nullopt when q has zero mass.
    std::optional<double> conditional(StateId q, std::uint8_t bit) const;

private:
    std::vector<double> mass_;
};

double l1_distance(const JointDistribution& a, const JointDistribution& b);

// Exact visit counts over the first n steps of a run.
struct Snapshot {
    std::uint64_t n = 0;
    std::vector<std::uint64_t> counts;  // counts[2q + b]

    JointDistribution joint() const { return JointDistribution::from_counts(counts, n); }
};

struct CheckpointTrace {
    std::vector<std::uint64_t> checkpoints;
    std::vector<Snapshot> snapshots;
    std::uint64_t steps = 0;
};

// Prefix lengths at which snapshots are taken.
class CheckpointSchedule {
public:
    static CheckpointSchedule geometric(unsigned points = 24);
    static CheckpointSchedule list(std::vector<std::uint64_t> lengths);
    // "geometric:K" or "list:N1,N2,..."
    static CheckpointSchedule parse(std::string_view spec);

    // Geometric: ceil(n * (2/3)^(K - i)) for i = 1..K, duplicates dropped, so the
    // last checkpoint is n itself. List: the given lengths, which must be <= n.
    std::vector<std::uint64_t> resolve(std::uint64_t n) const;
    std::string describe() const;

private:
    bool geometric_ = true;
    unsigned points_ = 24;
    std::vector<std::uint64_t> list_;
};

inline constexpr double kDefaultClusterTolerance = 0.02;

CheckpointTrace run_trace(const Machine& m, std::span<const std::uint8_t> x,
                          std::span<const std::uint64_t> checkpoints);

struct Cluster {
    Snapshot snapshot;  // checkpoint that founded the representative
    JointDistribution joint;
};

// Finite-n surrogate for the set of limiting distributions: the tail half of the
// snapshots, greedily reduced to representatives pairwise >= tol apart in L1.
std::vector<Cluster> cluster_set(const CheckpointTrace& t, double tol = kDefaultClusterTolerance);

// L1 distance between the empirical state distribution at the final checkpoint
// and the chain's stationary distribution.
double state_gap(const FairChain& c, const CheckpointTrace& t);

// Sliding-window counts of every length-N word over positions 0..n-N, indexed by
// the word read most-significant-bit first.
std::vector<std::uint64_t> word_counts(std::span<const std::uint8_t> x, std::size_t n, unsigned word_length);

inline constexpr unsigned kMaxWordLength = 16;

double word_min_frequency(std::span<const std::uint8_t> x, std::size_t n, unsigned word_length);

nlohmann::ordered_json snapshot_to_json(const Machine& m, const Snapshot& s);
void write_trace_jsonl(std::ostream& out, const Machine& m, const CheckpointTrace& t);
void write_trace_csv(std::ostream& out, const Machine& m, const CheckpointTrace& t);

}  // namespace fsdim

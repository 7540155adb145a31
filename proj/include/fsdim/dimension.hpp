#pragma once

#include "fsdim/empirical.hpp"
#include "fsdim/machine.hpp"
#include "fsdim/markov.hpp"

#include "json.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fsdim {

struct EstimatorOptions {
    CheckpointSchedule schedule = CheckpointSchedule::geometric();
    double cluster_tol = kDefaultClusterTolerance;
};

struct ChainDimension {
    // 1 - max KL to the fair chain over the clusters, i.e. the lowest conditional entropy.
    double dim_upper = 1.0;
    // 1 - min KL over the clusters, i.e. the highest conditional entropy.
    double strong_dim_upper = 1.0;
    std::vector<Cluster> clusters;
    std::vector<double> cluster_entropy;
    std::size_t dim_cluster = 0;
    std::size_t strong_dim_cluster = 0;
};

// Upper estimates of dim_FS / Dim_FS witnessed by a single irreducible chain,
// from the empirical joints of the chain's run on the first n bits of x.
ChainDimension chain_dimension(const FairChain& c, std::span<const std::uint8_t> x, std::size_t n,
                               const EstimatorOptions& options = {});

struct FamilyMember {
    std::string id;
    Machine machine;
};

// Finite family of chains standing in for the supremum over all finite-state
// chains. Spec grammar: terms joined by '+', each one of
//   blocks:K        depth-k block chains (state = last k bits), k = 0..K
//   phase:D[,K']    (i mod d, last k bits), d = 2..D, k = 0..K' (K' defaults to 2)
//   file:PATH       a machine file
class ChainFamily {
public:
    static ChainFamily parse(std::string_view spec);
    static ChainFamily of(std::vector<FamilyMember> members, std::string spec = "custom");

    const std::vector<FamilyMember>& members() const noexcept { return members_; }
    const std::string& spec() const noexcept { return spec_; }

private:
    std::vector<FamilyMember> members_;
    std::string spec_;
};

inline constexpr unsigned kDefaultPhaseDepth = 2;

struct ChainResult {
    std::string id;
    std::size_t states;
    ChainDimension estimate;
};

struct DimensionReport {
    double dim_est = 1.0;
    double strong_dim_est = 1.0;
    std::string witness_chain;
    std::string strong_witness_chain;
    Machine witness_machine;
    Cluster witness_cluster;
    std::vector<ChainResult> chains;
    // diagnostics
    std::string family;
    std::string schedule;
    std::vector<std::uint64_t> checkpoints;
    double cluster_tol = kDefaultClusterTolerance;
    std::uint64_t n = 0;
};

// Minimum over the family of the per-chain estimates. Members are evaluated
// concurrently and folded in family order, so ties go to the earliest member.
DimensionReport family_dimension(std::span<const std::uint8_t> x, std::size_t n, const ChainFamily& family,
                                 const EstimatorOptions& options = {});

nlohmann::ordered_json report_to_json(const DimensionReport& r);

struct BlockEntropyEstimate {
    double dim_est = 1.0;
    double strong_dim_est = 1.0;
    std::vector<double> rate_at_n;     // entropy of the k-blocks / k at n, index k-1
    std::vector<double> rate_tail_max; // max of the same over the checkpoint tail
};

// Independent cross-check: normalized sliding-window block entropies.
BlockEntropyEstimate block_entropy_dimension(std::span<const std::uint8_t> x, std::size_t n, unsigned max_block,
                                             const CheckpointSchedule& schedule = CheckpointSchedule::geometric());

// log2 of the capital after each prefix; entry 0 is the log2 of the initial
// capital. A lost all-in bet leaves -infinity, which then stays put.
struct CapitalTrace {
    std::vector<double> log2_capital;

    double final() const { return log2_capital.back(); }
};

// Bets mu(edge 0 | q) in every state q with positive mass and 1/2 elsewhere, on
// the chain's own transition structure.
Machine witness_martingale(const FairChain& c, const JointDistribution& mu);

CapitalTrace run_martingale(const Machine& m, std::span<const std::uint8_t> x, double initial_log2 = 0.0);

struct MultiAccountResult {
    std::vector<CapitalTrace> accounts;  // each started with capital 1/N
    CapitalTrace best;                   // pointwise maximum over the accounts
    CapitalTrace total;                  // log2 of the summed capital
    std::size_t best_index = 0;          // account with the highest final capital
};

MultiAccountResult multi_account_run(std::span<const Machine> accounts, std::span<const std::uint8_t> x);

}  // namespace fsdim

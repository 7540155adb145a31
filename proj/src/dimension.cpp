#include "fsdim/dimension.hpp"

#include "fsdim/error.hpp"
#include "fsdim/infotheory.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <future>
#include <limits>

namespace fsdim {

ChainDimension chain_dimension(const FairChain& c, std::span<const std::uint8_t> x, std::size_t n,
                               const EstimatorOptions& options) {
    if (!c.irreducible())
        throw ReducibleChain("chain has " + std::to_string(c.ergodic.ergodic_sets.size()) +
                             " ergodic sets; dimension estimates need an irreducible chain");
    if (n > x.size()) throw Error("prefix length " + std::to_string(n) + " exceeds sequence length " +
                                  std::to_string(x.size()));
    auto checkpoints = options.schedule.resolve(n);
    auto trace = run_trace(c.automaton, x, checkpoints);

    ChainDimension out;
    out.clusters = cluster_set(trace, options.cluster_tol);
    // Against the fair chain, conditional KL = 1 - conditional entropy, so the
    // extremes over clusters are read off the entropies directly.
    for (const auto& cl : out.clusters) out.cluster_entropy.push_back(conditional_entropy(cl.joint));
    auto lo = std::min_element(out.cluster_entropy.begin(), out.cluster_entropy.end());
    auto hi = std::max_element(out.cluster_entropy.begin(), out.cluster_entropy.end());
    out.dim_cluster = static_cast<std::size_t>(lo - out.cluster_entropy.begin());
    out.strong_dim_cluster = static_cast<std::size_t>(hi - out.cluster_entropy.begin());
    out.dim_upper = std::clamp(*lo, 0.0, 1.0);
    out.strong_dim_upper = std::clamp(*hi, 0.0, 1.0);
    return out;
}

// ---------------------------------------------------------------------------

namespace {

unsigned parse_uint(std::string_view tok, std::string_view spec) {
    unsigned v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size())
        throw Error("bad chain family term in '" + std::string(spec) + "'");
    return v;
}

}  // namespace

ChainFamily ChainFamily::parse(std::string_view spec) {
    ChainFamily f;
    f.spec_ = std::string(spec);
    std::string_view rest = spec;
    while (true) {
        auto plus = rest.find('+');
        std::string_view term = rest.substr(0, plus);
        if (term.starts_with("blocks:")) {
            unsigned k_max = parse_uint(term.substr(7), spec);
            if (k_max > kMaxWordLength) throw Error("block depth above " + std::to_string(kMaxWordLength));
            for (unsigned k = 0; k <= k_max; ++k)
                f.members_.push_back({"block:" + std::to_string(k), block_machine(k)});
        } else if (term.starts_with("phase:")) {
            std::string_view args = term.substr(6);
            auto comma = args.find(',');
            unsigned d_max = parse_uint(args.substr(0, comma), spec);
            unsigned k_max = comma == std::string_view::npos ? kDefaultPhaseDepth
                                                             : parse_uint(args.substr(comma + 1), spec);
            if (k_max > kMaxWordLength) throw Error("phase depth above " + std::to_string(kMaxWordLength));
            for (unsigned d = 2; d <= d_max; ++d)
                for (unsigned k = 0; k <= k_max; ++k)
                    f.members_.push_back(
                        {"phase:" + std::to_string(d) + "," + std::to_string(k), phase_machine(d, k)});
        } else if (term.starts_with("file:") && term.size() > 5) {
            std::string path(term.substr(5));
            f.members_.push_back({"file:" + path, load_machine(path).without_decorations()});
        } else {
            throw Error("bad chain family term '" + std::string(term) +
                        "' (expected blocks:K, phase:D[,K'], file:PATH)");
        }
        if (plus == std::string_view::npos) break;
        rest.remove_prefix(plus + 1);
    }
    if (f.members_.empty()) throw Error("chain family '" + f.spec_ + "' is empty");
    return f;
}

ChainFamily ChainFamily::of(std::vector<FamilyMember> members, std::string spec) {
    if (members.empty()) throw Error("chain family is empty");
    ChainFamily f;
    f.members_ = std::move(members);
    f.spec_ = std::move(spec);
    return f;
}

DimensionReport family_dimension(std::span<const std::uint8_t> x, std::size_t n, const ChainFamily& family,
                                 const EstimatorOptions& options) {
    std::vector<FairChain> chains;
    chains.reserve(family.members().size());
    for (const auto& member : family.members()) {
        chains.push_back(induce_chain(member.machine));
        if (!chains.back().irreducible())
            throw ReducibleChain("family member '" + member.id + "' is reducible (" +
                                 std::to_string(chains.back().ergodic.ergodic_sets.size()) + " ergodic sets)");
    }

    std::vector<std::future<ChainDimension>> jobs;
    for (const auto& c : chains)
        jobs.push_back(std::async(std::launch::async, [&, chain = &c] { return chain_dimension(*chain, x, n, options); }));

    DimensionReport r;
    r.family = family.spec();
    r.schedule = options.schedule.describe();
    r.checkpoints = options.schedule.resolve(n);
    r.cluster_tol = options.cluster_tol;
    r.n = n;
    std::size_t witness = 0;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        ChainResult res{family.members()[i].id, chains[i].size(), jobs[i].get()};
        if (i == 0 || res.estimate.dim_upper < r.dim_est) {
            r.dim_est = res.estimate.dim_upper;
            r.witness_chain = res.id;
            witness = i;
        }
        if (i == 0 || res.estimate.strong_dim_upper < r.strong_dim_est) {
            r.strong_dim_est = res.estimate.strong_dim_upper;
            r.strong_witness_chain = res.id;
        }
        r.chains.push_back(std::move(res));
    }
    r.witness_machine = family.members()[witness].machine;
    const auto& est = r.chains[witness].estimate;
    r.witness_cluster = est.clusters[est.dim_cluster];
    return r;
}

nlohmann::ordered_json report_to_json(const DimensionReport& r) {
    nlohmann::ordered_json j;
    j["dim_est"] = r.dim_est;
    j["strong_dim_est"] = r.strong_dim_est;
    j["estimate_kind"] = "dim_upper_bound";
    j["witness_chain"] = r.witness_chain;
    j["strong_witness_chain"] = r.strong_witness_chain;

    j["witness_cluster"] = snapshot_to_json(r.witness_machine, r.witness_cluster.snapshot);

    auto chains = nlohmann::ordered_json::array();
    for (const auto& c : r.chains) {
        nlohmann::ordered_json cj;
        cj["id"] = c.id;
        cj["states"] = c.states;
        cj["dim_upper"] = c.estimate.dim_upper;
        cj["strong_dim_upper"] = c.estimate.strong_dim_upper;
        auto clusters = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < c.estimate.clusters.size(); ++i)
            clusters.push_back({{"n", c.estimate.clusters[i].snapshot.n}, {"conditional_entropy", c.estimate.cluster_entropy[i]}});
        cj["clusters"] = std::move(clusters);
        chains.push_back(std::move(cj));
    }
    j["chains"] = std::move(chains);
    j["diagnostics"] = {{"n", r.n},
                        {"family", r.family},
                        {"checkpoint_schedule", r.schedule},
                        {"checkpoints", r.checkpoints},
                        {"cluster_tol", r.cluster_tol},
                        {"cluster_source", "tail half of checkpoints"}};
    return j;
}

// ---------------------------------------------------------------------------

BlockEntropyEstimate block_entropy_dimension(std::span<const std::uint8_t> x, std::size_t n, unsigned max_block,
                                             const CheckpointSchedule& schedule) {
    if (max_block == 0 || max_block > kMaxWordLength)
        throw Error("block length " + std::to_string(max_block) + " outside 1.." + std::to_string(kMaxWordLength));
    if (n > x.size()) throw Error("prefix length exceeds sequence length");
    if (n < max_block) throw Error("prefix shorter than the largest block");
    auto checkpoints = schedule.resolve(n);
    std::vector<std::uint64_t> tail(checkpoints.begin() + checkpoints.size() / 2, checkpoints.end());

    BlockEntropyEstimate est;
    for (unsigned k = 1; k <= max_block; ++k) {
        const std::uint32_t mask = (1u << k) - 1;
        std::vector<std::uint64_t> counts(std::size_t(1) << k, 0);
        auto rate = [&](std::uint64_t len) {
            double windows = double(len - k + 1);
            double h = 0.0;
            for (auto c : counts)
                if (c > 0) {
                    double p = double(c) / windows;
                    h -= p * std::log2(p);
                }
            return h / double(k);
        };
        double tail_max = -1.0;
        std::size_t next = 0;
        std::uint32_t w = 0;
        for (std::uint64_t i = 0; i < n; ++i) {
            w = ((w << 1) | x[i]) & mask;
            if (i + 1 >= k) ++counts[w];
            while (next < tail.size() && tail[next] == i + 1) {
                if (i + 1 >= k) tail_max = std::max(tail_max, rate(i + 1));
                ++next;
            }
        }
        double at_n = rate(n);
        est.rate_at_n.push_back(at_n);
        est.rate_tail_max.push_back(std::max(tail_max, at_n));
    }
    est.dim_est = std::clamp(*std::min_element(est.rate_at_n.begin(), est.rate_at_n.end()), 0.0, 1.0);
    est.strong_dim_est = std::clamp(*std::min_element(est.rate_tail_max.begin(), est.rate_tail_max.end()), 0.0, 1.0);
    return est;
}

// ---------------------------------------------------------------------------

Machine witness_martingale(const FairChain& c, const JointDistribution& mu) {
    if (mu.states() != c.size()) throw Error("witness_martingale: joint is over a different chain");
    std::vector<double> beta(c.size(), 0.5);
    for (StateId q = 0; q < c.size(); ++q)
        if (auto p0 = mu.conditional(q, 0)) beta[q] = std::clamp(*p0, 0.0, 1.0);
    return c.automaton.with_betting(std::move(beta));
}

CapitalTrace run_martingale(const Machine& m, std::span<const std::uint8_t> x, double initial_log2) {
    if (!m.has_betting()) throw Error("run_martingale: machine has no betting function");
    const auto& beta = *m.betting();
    // per-state increments, computed once
    std::vector<std::array<double, 2>> gain(m.size());
    for (std::size_t q = 0; q < m.size(); ++q)
        gain[q] = {std::log2(2.0 * beta[q]), std::log2(2.0 * (1.0 - beta[q]))};

    CapitalTrace t;
    t.log2_capital.reserve(x.size() + 1);
    t.log2_capital.push_back(initial_log2);
    double acc = initial_log2;
    StateId q = m.start();
    for (auto b : x) {
        acc += gain[q][b];
        t.log2_capital.push_back(acc);
        q = m.next(q, b);
    }
    return t;
}

MultiAccountResult multi_account_run(std::span<const Machine> accounts, std::span<const std::uint8_t> x) {
    if (accounts.empty()) throw Error("multi_account_run needs at least one account");
    const double offset = -std::log2(double(accounts.size()));
    MultiAccountResult r;
    for (const auto& m : accounts) r.accounts.push_back(run_martingale(m, x, offset));

    const std::size_t len = x.size() + 1;
    r.best.log2_capital.assign(len, -std::numeric_limits<double>::infinity());
    r.total.log2_capital.assign(len, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < len; ++i) {
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& a : r.accounts) hi = std::max(hi, a.log2_capital[i]);
        r.best.log2_capital[i] = hi;
        if (std::isinf(hi)) continue;
        double sum = 0.0;
        for (const auto& a : r.accounts) sum += std::exp2(a.log2_capital[i] - hi);
        r.total.log2_capital[i] = hi + std::log2(sum);
    }
    for (std::size_t k = 1; k < r.accounts.size(); ++k)
        if (r.accounts[k].final() > r.accounts[r.best_index].final()) r.best_index = k;
    return r;
}

}  // namespace fsdim

#include "fsdim/cli.hpp"

#include "fsdim/dimension.hpp"
#include "fsdim/empirical.hpp"
#include "fsdim/error.hpp"
#include "fsdim/infotheory.hpp"
#include "fsdim/machine.hpp"
#include "fsdim/markov.hpp"
#include "fsdim/selection.hpp"
#include "fsdim/sequence.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace fsdim::cli {

namespace {

using json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    std::string gen;
    std::string file;
    std::optional<std::uint64_t> n;
    std::vector<std::string> machines;
    std::string select;
    std::string family = "blocks:4+phase:2";
    std::string checkpoints = "geometric:24";
    double cluster_tol = kDefaultClusterTolerance;
    std::string format = "json";
    bool oracle = false;
    // command-specific
    std::string method = "linear_solve";
    unsigned block_k = 8;
    double tight_tol = 0.05;
    double epsilon = 0.1;
    bool witness = false;
    std::string out_path;
    std::string complement_out_path;
    std::string trace_out_path;

    json to_json() const {
        json j;
        j["command"] = command;
        j["source"] = gen.empty() ? (file.empty() ? json(nullptr) : json("file:" + file)) : json(gen);
        j["n"] = n ? json(*n) : json(nullptr);
        j["machines"] = machines;
        j["select"] = select.empty() ? json(nullptr) : json(select);
        j["family"] = family;
        j["checkpoints"] = checkpoints;
        j["cluster_tol"] = cluster_tol;
        j["format"] = format;
        j["oracle"] = oracle;
        if (command == "stationary") j["method"] = method;
        if (command == "dim") j["block_k"] = block_k;
        if (command == "agafonov") {
            j["tight_tol"] = tight_tol;
            j["epsilon"] = epsilon;
        }
        if (command == "martingale") j["witness"] = witness;
        return j;
    }

    EstimatorOptions estimator() const {
        return EstimatorOptions{CheckpointSchedule::parse(checkpoints), cluster_tol};
    }
};

json log2_value(double v) {
    if (std::isinf(v)) return v < 0 ? json("-inf") : json("inf");
    return json(v);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string tok;
    std::istringstream in(s);
    while (std::getline(in, tok, ',')) {
        tok.erase(std::remove_if(tok.begin(), tok.end(), [](unsigned char c) { return std::isspace(c); }), tok.end());
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

// ---------------------------------------------------------------------------

struct Sequence {
    Bits bits;
    std::string description;
};

Sequence load_sequence(RunConfig& cfg) {
    if (cfg.gen.empty() == cfg.file.empty()) throw UsageError("exactly one of --gen or --file is required");
    BitSource source = cfg.gen.empty() ? BitSource::file(cfg.file) : BitSource::parse(cfg.gen);
    if (!cfg.n) {
        auto hint = source.length_hint();
        if (!hint) throw UsageError("-n is required for generated sources");
        cfg.n = *hint;
    }
    return Sequence{generate(source, *cfg.n), source.describe()};
}

Machine load_selector(const RunConfig& cfg) {
    if (cfg.machines.empty()) throw UsageError("--machine is required");
    Machine m = load_machine(cfg.machines.front());
    if (!cfg.select.empty()) {
        auto names = split_list(cfg.select);
        m = m.with_selecting_names(names);
    }
    if (!m.has_selecting()) throw UsageError("machine has no selecting states; pass --select");
    return m;
}

json names_json(const Machine& m, const std::vector<StateId>& states) {
    json a = json::array();
    for (StateId q : states) a.push_back(m.name(q));
    return a;
}

void emit(std::ostream& out, const RunConfig& cfg, json report, const std::vector<std::pair<std::string, std::string>>& text) {
    if (cfg.format == "text") {
        std::size_t width = 0;
        for (const auto& [k, v] : text) width = std::max(width, k.size());
        for (const auto& [k, v] : text) out << std::left << std::setw(int(width) + 2) << k << v << '\n';
        return;
    }
    json full;
    full["config"] = cfg.to_json();
    for (auto& [k, v] : report.items()) full[k] = v;
    out << full.dump(2) << '\n';
}

std::string fmt(double v) {
    if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
    std::ostringstream s;
    s << std::setprecision(6) << v;
    return s.str();
}

// ---------------------------------------------------------------------------

int cmd_gen(RunConfig& cfg, std::ostream& out) {
    auto seq = load_sequence(cfg);
    if (!cfg.out_path.empty()) write_bits_file(cfg.out_path, seq.bits);
    if (cfg.format == "text") {
        if (cfg.out_path.empty()) out << bits_to_string(seq.bits) << '\n';
        return kExitOk;
    }
    json r;
    r["source"] = seq.description;
    r["length"] = seq.bits.size();
    if (cfg.out_path.empty()) r["bits"] = bits_to_string(seq.bits);
    else r["written_to"] = cfg.out_path;
    emit(out, cfg, std::move(r), {});
    return kExitOk;
}

int cmd_stationary(RunConfig& cfg, std::ostream& out) {
    if (cfg.machines.empty()) throw UsageError("--machine is required");
    auto method = cfg.method == "power_iteration" ? StationaryMethod::power_iteration : StationaryMethod::linear_solve;
    Machine m = load_machine(cfg.machines.front());
    FairChain c = induce_chain(m);
    auto pi = stationary(c, method);
    json r;
    r["states"] = m.names();
    r["stationary"] = pi;
    std::vector<std::pair<std::string, std::string>> text;
    for (StateId q = 0; q < m.size(); ++q) text.emplace_back("pi(" + m.name(q) + ")", fmt(pi[q]));
    if (cfg.oracle) {
        auto other_method = method == StationaryMethod::linear_solve ? StationaryMethod::power_iteration
                                                                     : StationaryMethod::linear_solve;
        auto other = stationary(c, other_method);
        double l1 = 0.0;
        for (std::size_t i = 0; i < pi.size(); ++i) l1 += std::abs(pi[i] - other[i]);
        r["oracle"] = {{"method", other_method == StationaryMethod::linear_solve ? "linear_solve" : "power_iteration"},
                       {"stationary", other},
                       {"l1_gap", l1}};
        text.emplace_back("oracle l1 gap", fmt(l1));
    }
    emit(out, cfg, std::move(r), text);
    return kExitOk;
}

int cmd_analyze(RunConfig& cfg, std::ostream& out) {
    if (cfg.machines.empty()) throw UsageError("--machine is required");
    Machine m = load_machine(cfg.machines.front());
    auto seq = load_sequence(cfg);
    auto checkpoints = CheckpointSchedule::parse(cfg.checkpoints).resolve(*cfg.n);
    auto trace = run_trace(m, seq.bits, checkpoints);
    if (!cfg.trace_out_path.empty()) {
        std::ofstream f(cfg.trace_out_path);
        if (!f) throw Error("cannot write '" + cfg.trace_out_path + "'");
        write_trace_jsonl(f, m, trace);
    }
    if (cfg.format == "csv") {
        write_trace_csv(out, m, trace);
        return kExitOk;
    }
    FairChain c = induce_chain(m);
    json r;
    json erg;
    json classes = json::array(), ergodic = json::array();
    for (const auto& cls : c.ergodic.classes) classes.push_back(names_json(m, cls));
    for (const auto& e : c.ergodic.ergodic_sets) ergodic.push_back(names_json(m, e));
    erg["classes"] = std::move(classes);
    erg["ergodic_sets"] = std::move(ergodic);
    erg["irreducible"] = c.irreducible();
    r["ergodic"] = std::move(erg);
    std::vector<std::pair<std::string, std::string>> text{
        {"states", std::to_string(m.size())},
        {"irreducible", c.irreducible() ? "yes" : "no"},
        {"ergodic sets", std::to_string(c.ergodic.ergodic_sets.size())}};

    auto clusters = cluster_set(trace, cfg.cluster_tol);
    json cj = json::array();
    for (const auto& cl : clusters) {
        double h = conditional_entropy(cl.joint);
        cj.push_back({{"n", cl.snapshot.n}, {"conditional_entropy", h}, {"kl_to_fair", 1.0 - h}});
    }
    r["clusters"] = std::move(cj);
    text.emplace_back("clusters", std::to_string(clusters.size()));
    if (c.irreducible()) {
        c = with_stationary(std::move(c));
        double gap = state_gap(c, trace);
        r["stationary"] = *c.stationary;
        r["state_gap"] = gap;
        text.emplace_back("state gap", fmt(gap));
    } else {
        r["stationary"] = nullptr;
        r["state_gap"] = nullptr;
    }
    json tj = json::array();
    for (const auto& s : trace.snapshots) tj.push_back(snapshot_to_json(m, s));
    r["trace"] = std::move(tj);
    emit(out, cfg, std::move(r), text);
    return kExitOk;
}

int cmd_dim(RunConfig& cfg, std::ostream& out) {
    auto seq = load_sequence(cfg);
    auto family = ChainFamily::parse(cfg.family);
    auto report = family_dimension(seq.bits, *cfg.n, family, cfg.estimator());
    json r = report_to_json(report);
    std::vector<std::pair<std::string, std::string>> text{{"dim_est", fmt(report.dim_est)},
                                                          {"strong_dim_est", fmt(report.strong_dim_est)},
                                                          {"witness chain", report.witness_chain},
                                                          {"n", std::to_string(report.n)}};
    if (cfg.oracle) {
        auto block = block_entropy_dimension(seq.bits, *cfg.n, cfg.block_k, CheckpointSchedule::parse(cfg.checkpoints));
        r["oracle"] = {{"block_entropy_dim_est", block.dim_est},
                       {"block_entropy_strong_dim_est", block.strong_dim_est},
                       {"max_block", cfg.block_k},
                       {"agreement", std::abs(block.dim_est - report.dim_est)}};
        text.emplace_back("block entropy dim", fmt(block.dim_est));
    }
    emit(out, cfg, std::move(r), text);
    return kExitOk;
}

int cmd_select(RunConfig& cfg, std::ostream& out) {
    Machine s = load_selector(cfg);
    auto seq = load_sequence(cfg);
    auto sel = apply_selector(s, seq.bits);
    if (!cfg.out_path.empty()) write_bits_file(cfg.out_path, sel.selected);
    if (!cfg.complement_out_path.empty()) write_bits_file(cfg.complement_out_path, sel.complement);
    json r;
    FairChain c = induce_chain(s);
    std::optional<double> lambda;
    if (c.irreducible()) lambda = lambda_of(s);
    r["lambda"] = lambda ? json(*lambda) : json(nullptr);
    r["selected_length"] = sel.selected.size();
    r["complement_length"] = sel.complement.size();
    if (cfg.out_path.empty()) r["selected"] = bits_to_string(sel.selected);
    if (cfg.complement_out_path.empty()) r["complement"] = bits_to_string(sel.complement);
    if (cfg.oracle) {
        Bits rebuilt(seq.bits.size());
        std::size_t si = 0, ci = 0;
        std::vector<bool> chosen(seq.bits.size(), false);
        for (auto p : sel.positions) chosen[p] = true;
        for (std::size_t i = 0; i < rebuilt.size(); ++i) rebuilt[i] = chosen[i] ? sel.selected[si++] : sel.complement[ci++];
        r["oracle"] = {{"reconstructs_input", rebuilt == seq.bits}};
    }
    emit(out, cfg, std::move(r),
         {{"lambda", lambda ? fmt(*lambda) : "n/a (reducible)"},
          {"selected", std::to_string(sel.selected.size()) + " bits"},
          {"complement", std::to_string(sel.complement.size()) + " bits"}});
    return kExitOk;
}

int cmd_agafonov(RunConfig& cfg, std::ostream& out) {
    Machine s = load_selector(cfg);
    auto seq = load_sequence(cfg);
    auto family = ChainFamily::parse(cfg.family);
    AgafonovOptions opts{cfg.estimator(), cfg.tight_tol, cfg.epsilon};
    auto report = agafonov_report(s, seq.bits, *cfg.n, family, opts);
    emit(out, cfg, report_to_json(report),
         {{"lambda", fmt(report.lambda)},
          {"dim(selected)", fmt(report.dim_selected)},
          {"Dim(complement)", fmt(report.strong_dim_complement)},
          {"lhs", fmt(report.lhs)},
          {"dim(input)", fmt(report.dim_input)},
          {"verdict", to_string(report.verdict)}});
    return kExitOk;
}

int cmd_martingale(RunConfig& cfg, std::ostream& out) {
    if (cfg.machines.empty()) throw UsageError("--machine is required");
    auto seq = load_sequence(cfg);
    std::vector<Machine> accounts;
    for (const auto& path : cfg.machines) {
        Machine m = load_machine(path);
        if (cfg.witness) {
            FairChain c = induce_chain(m);
            std::uint64_t n = *cfg.n;
            auto trace = run_trace(m, seq.bits, std::span<const std::uint64_t>(&n, 1));
            m = witness_martingale(c, trace.snapshots.back().joint());
        }
        if (!m.has_betting()) throw UsageError("machine '" + path + "' has no bet lines; pass --witness");
        accounts.push_back(std::move(m));
    }
    auto result = multi_account_run(accounts, seq.bits);
    auto checkpoints = CheckpointSchedule::parse(cfg.checkpoints).resolve(*cfg.n);

    json r;
    json acc = json::array();
    for (std::size_t i = 0; i < accounts.size(); ++i) {
        json a;
        a["machine"] = cfg.machines[i];
        a["final_log2_capital"] = log2_value(result.accounts[i].final());
        json cps = json::array();
        for (auto c : checkpoints) cps.push_back({{"n", c}, {"log2_capital", log2_value(result.accounts[i].log2_capital[c])}});
        a["checkpoints"] = std::move(cps);
        if (cfg.witness) {
            json bets = json::object();
            for (StateId q = 0; q < accounts[i].size(); ++q) bets[accounts[i].name(q)] = accounts[i].bet(q);
            a["bets"] = std::move(bets);
        }
        acc.push_back(std::move(a));
    }
    r["accounts"] = std::move(acc);
    r["best_index"] = result.best_index;
    r["best_final_log2_capital"] = log2_value(result.best.final());
    r["total_final_log2_capital"] = log2_value(result.total.final());
    if (cfg.oracle) {
        // direct product recursion in plain arithmetic; only meaningful while 2^n fits a double
        constexpr std::size_t kOracleLimit = 1000;
        std::size_t len = std::min<std::size_t>(seq.bits.size(), kOracleLimit);
        double worst = 0.0;
        for (std::size_t i = 0; i < accounts.size(); ++i) {
            double capital = 1.0 / double(accounts.size());
            StateId q = accounts[i].start();
            for (std::size_t k = 0; k < len; ++k) {
                double beta = accounts[i].bet(q);
                capital *= seq.bits[k] ? 2.0 * (1.0 - beta) : 2.0 * beta;
                q = accounts[i].next(q, seq.bits[k]);
                double traced = result.accounts[i].log2_capital[k + 1];
                double direct = std::log2(capital);
                if (std::isinf(traced) || std::isinf(direct)) {
                    if (traced != direct) worst = INFINITY;
                } else {
                    worst = std::max(worst, std::abs(traced - direct));
                }
            }
        }
        r["oracle"] = {{"checked_prefix", len}, {"max_log2_gap", log2_value(worst)}};
    }
    emit(out, cfg, std::move(r),
         {{"accounts", std::to_string(accounts.size())},
          {"best account", std::to_string(result.best_index)},
          {"best log2 capital", fmt(result.best.final())}});
    return kExitOk;
}

void add_source_options(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--gen", cfg.gen, "Generated source: champernowne, zeros, periodic:BITS, diluted[:INNER]");
    sub->add_option("--file", cfg.file, "Bit file: ASCII 0/1, or packed MSB-first when named *.bits");
    sub->add_option("-n,--bits", cfg.n, "Prefix length in bits");
}

void add_common_options(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--format", cfg.format, "Output format")
        ->check(CLI::IsMember({"json", "csv", "text"}));
    sub->add_flag("--oracle", cfg.oracle, "Enable brute-force cross-checks");
}

void add_estimator_options(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--family", cfg.family, "Chain family: blocks:K, phase:D[,K'], file:PATH joined by '+'");
    sub->add_option("--checkpoints", cfg.checkpoints, "geometric:K or list:N1,N2,...");
    sub->add_option("--cluster-tol", cfg.cluster_tol, "L1 radius for merging tail snapshots")
        ->check(CLI::PositiveNumber);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Finite-state dimension toolkit: fair Markov chains, selectors and martingales on binary sequences",
                 "fsdim"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen", "Emit a prefix of a bit source");
    add_source_options(gen, cfg);
    add_common_options(gen, cfg);
    gen->add_option("--out", cfg.out_path, "Write the bits to a file instead of the report");

    auto* analyze = app.add_subcommand("analyze", "Ergodic structure, checkpoint trace and clusters of a machine run");
    add_source_options(analyze, cfg);
    add_common_options(analyze, cfg);
    analyze->add_option("--machine", cfg.machines, "Machine spec file")->expected(1);
    add_estimator_options(analyze, cfg);
    analyze->add_option("--trace-out", cfg.trace_out_path, "Write the trace as JSON lines");

    auto* dim = app.add_subcommand("dim", "Estimate finite-state dimension over a chain family");
    add_source_options(dim, cfg);
    add_common_options(dim, cfg);
    add_estimator_options(dim, cfg);
    dim->add_option("--block-k", cfg.block_k, "Largest block for the block-entropy cross-check")
        ->check(CLI::Range(1u, kMaxWordLength));

    auto* select = app.add_subcommand("select", "Apply a selector and its complement");
    add_source_options(select, cfg);
    add_common_options(select, cfg);
    select->add_option("--machine", cfg.machines, "Selector spec file")->expected(1);
    select->add_option("--select", cfg.select, "Comma-separated selecting states (overrides the file)");
    select->add_option("--out", cfg.out_path, "Write the selected bits to a file");
    select->add_option("--complement-out", cfg.complement_out_path, "Write the complement bits to a file");

    auto* agafonov = app.add_subcommand("agafonov", "Evaluate the weighted selection inequality");
    add_source_options(agafonov, cfg);
    add_common_options(agafonov, cfg);
    agafonov->add_option("--machine", cfg.machines, "Selector spec file")->expected(1);
    agafonov->add_option("--select", cfg.select, "Comma-separated selecting states (overrides the file)");
    add_estimator_options(agafonov, cfg);
    agafonov->add_option("--tight-tol", cfg.tight_tol, "|lhs - dim| within this is reported as tight")
        ->check(CLI::NonNegativeNumber);
    agafonov->add_option("--epsilon", cfg.epsilon, "Shortfall still reported as holds_within")
        ->check(CLI::NonNegativeNumber);

    auto* stat = app.add_subcommand("stationary", "Stationary distribution of a machine's fair chain");
    add_common_options(stat, cfg);
    stat->add_option("--machine", cfg.machines, "Machine spec file")->expected(1);
    stat->add_option("--method", cfg.method, "linear_solve or power_iteration")
        ->check(CLI::IsMember({"linear_solve", "power_iteration"}));

    auto* mart = app.add_subcommand("martingale", "Run finite-state martingales (one account per --machine)");
    add_source_options(mart, cfg);
    add_common_options(mart, cfg);
    mart->add_option("--machine", cfg.machines, "Martingale spec file (repeatable)");
    mart->add_flag("--witness", cfg.witness, "Bet the empirical conditionals of the machine's own run");
    mart->add_option("--checkpoints", cfg.checkpoints, "geometric:K or list:N1,N2,...");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::Success&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "fsdim: " << e.what() << '\n';
        return kExitUsage;
    }

    CLI::App* chosen = app.get_subcommands().front();
    cfg.command = chosen->get_name();
    if (cfg.format == "csv" && cfg.command != "analyze") {
        err << "fsdim: --format csv exports checkpoint traces and is only available for 'analyze'\n";
        return kExitUsage;
    }

    try {
        if (cfg.command == "gen") return cmd_gen(cfg, out);
        if (cfg.command == "analyze") return cmd_analyze(cfg, out);
        if (cfg.command == "dim") return cmd_dim(cfg, out);
        if (cfg.command == "select") return cmd_select(cfg, out);
        if (cfg.command == "agafonov") return cmd_agafonov(cfg, out);
        if (cfg.command == "stationary") return cmd_stationary(cfg, out);
        if (cfg.command == "martingale") return cmd_martingale(cfg, out);
    } catch (const UsageError& e) {
        err << "fsdim: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "fsdim: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace fsdim::cli

#include "fsdim/empirical.hpp"

#include "fsdim/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

namespace fsdim {

JointDistribution::JointDistribution(std::vector<double> mass) : mass_(std::move(mass)) {
    if (mass_.size() % 2 != 0) throw Error("joint distribution needs two edges per state");
}

JointDistribution JointDistribution::from_counts(std::span<const std::uint64_t> counts, std::uint64_t n) {
    if (n == 0) throw Error("empirical distribution of an empty prefix");
    std::vector<double> mass(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) mass[i] = double(counts[i]) / double(n);
    return JointDistribution(std::move(mass));
}

std::vector<double> JointDistribution::marginals() const {
    std::vector<double> q(states());
    for (StateId s = 0; s < q.size(); ++s) q[s] = marginal(s);
    return q;
}

std::optional<double> JointDistribution::conditional(StateId q, std::uint8_t bit) const {
    double m = marginal(q);
    if (m <= 0.0) return std::nullopt;
    return mass_[2 * q + bit] / m;
}

double l1_distance(const JointDistribution& a, const JointDistribution& b) {
    if (a.mass().size() != b.mass().size()) throw Error("joint distributions over different chains");
    double d = 0.0;
    for (std::size_t i = 0; i < a.mass().size(); ++i) d += std::abs(a.mass()[i] - b.mass()[i]);
    return d;
}

// ---------------------------------------------------------------------------

CheckpointSchedule CheckpointSchedule::geometric(unsigned points) {
    if (points == 0) throw Error("geometric schedule needs at least one point");
    CheckpointSchedule s;
    s.points_ = points;
    return s;
}

CheckpointSchedule CheckpointSchedule::list(std::vector<std::uint64_t> lengths) {
    if (lengths.empty()) throw Error("checkpoint list is empty");
    std::sort(lengths.begin(), lengths.end());
    lengths.erase(std::unique(lengths.begin(), lengths.end()), lengths.end());
    if (lengths.front() == 0) throw Error("checkpoint lengths must be positive");
    CheckpointSchedule s;
    s.geometric_ = false;
    s.list_ = std::move(lengths);
    return s;
}

CheckpointSchedule CheckpointSchedule::parse(std::string_view spec) {
    auto to_u64 = [&](std::string_view tok) {
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size())
            throw Error("bad checkpoint schedule '" + std::string(spec) + "'");
        return v;
    };
    if (spec.starts_with("geometric:")) return geometric(static_cast<unsigned>(to_u64(spec.substr(10))));
    if (spec == "geometric") return geometric();
    if (spec.starts_with("list:")) {
        std::vector<std::uint64_t> out;
        std::string_view rest = spec.substr(5);
        while (!rest.empty()) {
            auto comma = rest.find(',');
            out.push_back(to_u64(rest.substr(0, comma)));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        return list(std::move(out));
    }
    throw Error("bad checkpoint schedule '" + std::string(spec) + "' (expected geometric:K or list:N1,N2,...)");
}

std::vector<std::uint64_t> CheckpointSchedule::resolve(std::uint64_t n) const {
    if (n == 0) throw Error("checkpoint schedule for an empty prefix");
    std::vector<std::uint64_t> out;
    if (geometric_) {
        for (unsigned i = 1; i <= points_; ++i) {
            double v = std::ceil(double(n) * std::pow(2.0 / 3.0, double(points_ - i)));
            auto c = std::clamp<std::uint64_t>(static_cast<std::uint64_t>(v), 1, n);
            if (out.empty() || c > out.back()) out.push_back(c);
        }
        return out;
    }
    for (auto c : list_) {
        if (c > n) throw Error("checkpoint " + std::to_string(c) + " exceeds prefix length " + std::to_string(n));
        out.push_back(c);
    }
    return out;
}

std::string CheckpointSchedule::describe() const {
    if (geometric_) return "geometric:" + std::to_string(points_);
    std::string s = "list:";
    for (std::size_t i = 0; i < list_.size(); ++i) s += (i ? "," : "") + std::to_string(list_[i]);
    return s;
}

// ---------------------------------------------------------------------------

CheckpointTrace run_trace(const Machine& m, std::span<const std::uint8_t> x,
                          std::span<const std::uint64_t> checkpoints) {
    if (checkpoints.empty()) throw Error("run_trace needs at least one checkpoint");
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        if (checkpoints[i] == 0) throw Error("checkpoint 0 has no empirical distribution");
        if (i > 0 && checkpoints[i] <= checkpoints[i - 1]) throw Error("checkpoints must be strictly increasing");
    }
    if (checkpoints.back() > x.size())
        throw Error("checkpoint " + std::to_string(checkpoints.back()) + " exceeds sequence length " +
                    std::to_string(x.size()));

    CheckpointTrace t;
    t.checkpoints.assign(checkpoints.begin(), checkpoints.end());
    t.steps = checkpoints.back();
    std::vector<std::uint64_t> counts(2 * m.size(), 0);
    const auto& delta = m.delta();
    StateId q = m.start();
    std::size_t next_cp = 0;
    for (std::uint64_t i = 0; i < t.steps; ++i) {
        std::uint8_t b = x[i];
        ++counts[2 * q + b];
        q = delta[q][b];
        if (i + 1 == checkpoints[next_cp]) {
            t.snapshots.push_back(Snapshot{i + 1, counts});
            ++next_cp;
        }
    }
    return t;
}

std::vector<Cluster> cluster_set(const CheckpointTrace& t, double tol) {
    if (t.snapshots.empty()) throw Error("cluster_set of an empty trace");
    if (!(tol > 0.0)) throw Error("cluster tolerance must be positive");
    std::vector<Cluster> reps;
    for (std::size_t i = t.snapshots.size() / 2; i < t.snapshots.size(); ++i) {
        JointDistribution j = t.snapshots[i].joint();
        bool merged = std::any_of(reps.begin(), reps.end(),
                                  [&](const Cluster& r) { return l1_distance(r.joint, j) < tol; });
        if (!merged) reps.push_back(Cluster{t.snapshots[i], std::move(j)});
    }
    return reps;
}

double state_gap(const FairChain& c, const CheckpointTrace& t) {
    if (t.snapshots.empty()) throw Error("state_gap of an empty trace");
    std::vector<double> pi = c.stationary ? *c.stationary : stationary(c);
    auto q = t.snapshots.back().joint().marginals();
    if (q.size() != pi.size()) throw Error("trace and chain have different state counts");
    double gap = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) gap += std::abs(q[i] - pi[i]);
    return gap;
}

std::vector<std::uint64_t> word_counts(std::span<const std::uint8_t> x, std::size_t n, unsigned word_length) {
    if (word_length == 0 || word_length > kMaxWordLength)
        throw Error("word length " + std::to_string(word_length) + " outside 1.." + std::to_string(kMaxWordLength));
    if (n < word_length) throw Error("prefix shorter than the word length");
    if (n > x.size()) throw Error("prefix length exceeds sequence length");
    const std::uint32_t mask = (1u << word_length) - 1;
    std::vector<std::uint64_t> counts(std::size_t(1) << word_length, 0);
    std::uint32_t w = 0;
    for (std::size_t i = 0; i < n; ++i) {
        w = ((w << 1) | x[i]) & mask;
        if (i + 1 >= word_length) ++counts[w];
    }
    return counts;
}

double word_min_frequency(std::span<const std::uint8_t> x, std::size_t n, unsigned word_length) {
    auto counts = word_counts(x, n, word_length);
    auto lowest = *std::min_element(counts.begin(), counts.end());
    return double(lowest) / double(n - word_length + 1);
}

// ---------------------------------------------------------------------------

nlohmann::ordered_json snapshot_to_json(const Machine& m, const Snapshot& s) {
    nlohmann::ordered_json joint = nlohmann::ordered_json::object();
    nlohmann::ordered_json marginal = nlohmann::ordered_json::object();
    nlohmann::ordered_json conditional = nlohmann::ordered_json::object();
    for (StateId q = 0; q < m.size(); ++q) {
        std::uint64_t total = s.counts[2 * q] + s.counts[2 * q + 1];
        for (std::uint8_t b = 0; b < 2; ++b)
            if (s.counts[2 * q + b] > 0)
                joint[m.name(q) + ":" + char('0' + b) + "→" + m.name(m.next(q, b))] = s.counts[2 * q + b];
        if (total == 0) continue;
        marginal[m.name(q)] = double(total) / double(s.n);
        conditional[m.name(q)] = {{"0", double(s.counts[2 * q]) / double(total)},
                                  {"1", double(s.counts[2 * q + 1]) / double(total)}};
    }
    nlohmann::ordered_json j;
    j["n"] = s.n;
    j["joint"] = std::move(joint);
    j["marginal"] = std::move(marginal);
    j["conditional"] = std::move(conditional);
    return j;
}

void write_trace_jsonl(std::ostream& out, const Machine& m, const CheckpointTrace& t) {
    for (const auto& s : t.snapshots) out << snapshot_to_json(m, s).dump() << '\n';
}

void write_trace_csv(std::ostream& out, const Machine& m, const CheckpointTrace& t) {
    out << "n,state,bit,next,count,probability\n";
    for (const auto& s : t.snapshots)
        for (StateId q = 0; q < m.size(); ++q)
            for (std::uint8_t b = 0; b < 2; ++b) {
                auto c = s.counts[2 * q + b];
                if (c == 0) continue;
                out << s.n << ',' << m.name(q) << ',' << int(b) << ',' << m.name(m.next(q, b)) << ',' << c << ','
                    << nlohmann::json(double(c) / double(s.n)).dump() << '\n';
            }
}

}  // namespace fsdim

#include "fsdim/machine.hpp"

#include "fsdim/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

namespace fsdim {

Machine::Machine(std::vector<std::string> names, StateId start, std::vector<std::array<StateId, 2>> delta)
    : names_(std::move(names)), start_(start), delta_(std::move(delta)) {
    if (names_.size() != delta_.size()) throw Error("machine: name and transition tables differ in size");
    if (delta_.empty()) throw Error("machine: no states");
    if (start_ >= delta_.size()) throw Error("machine: start state out of range");
    for (const auto& row : delta_)
        for (StateId t : row)
            if (t >= delta_.size()) throw Error("machine: transition target out of range");
}

std::optional<StateId> Machine::find(std::string_view name) const {
    for (std::size_t q = 0; q < names_.size(); ++q)
        if (names_[q] == name) return static_cast<StateId>(q);
    return std::nullopt;
}

Machine Machine::with_selecting(std::vector<bool> selecting) const {
    if (selecting.size() != size()) throw Error("selecting set has wrong size");
    Machine m = *this;
    m.selecting_ = std::move(selecting);
    return m;
}

Machine Machine::with_selecting_names(std::span<const std::string> names) const {
    std::vector<bool> sel(size(), false);
    for (const auto& n : names) {
        auto q = find(n);
        if (!q) throw Error("unknown state '" + n + "' in selecting set");
        sel[*q] = true;
    }
    return with_selecting(std::move(sel));
}

Machine Machine::with_betting(std::vector<double> betting) const {
    if (betting.size() != size()) throw Error("betting function has wrong size");
    for (std::size_t q = 0; q < betting.size(); ++q)
        if (!(betting[q] >= 0.0 && betting[q] <= 1.0))
            throw Error("bet for state '" + names_[q] + "' outside [0,1]");
    Machine m = *this;
    m.betting_ = std::move(betting);
    return m;
}

Machine Machine::without_decorations() const {
    Machine m = *this;
    m.selecting_.reset();
    m.betting_.reset();
    return m;
}

Machine Machine::complement() const {
    if (!selecting_) throw Error("complement of a machine without selecting states");
    std::vector<bool> sel(size());
    for (std::size_t q = 0; q < size(); ++q) sel[q] = !(*selecting_)[q];
    return with_selecting(std::move(sel));
}

StateId Machine::run(std::span<const std::uint8_t> w) const {
    StateId q = start_;
    for (auto b : w) q = delta_[q][b];
    return q;
}

// ---------------------------------------------------------------------------
// parsing

namespace {

std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

std::optional<double> parse_probability(const std::string& tok) {
    auto slash = tok.find('/');
    auto parse_num = [](std::string_view s) -> std::optional<double> {
        if (s.empty()) return std::nullopt;
        double v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
        return v;
    };
    if (slash == std::string::npos) return parse_num(tok);
    auto num = parse_num(std::string_view(tok).substr(0, slash));
    auto den = parse_num(std::string_view(tok).substr(slash + 1));
    if (!num || !den || *den == 0.0) return std::nullopt;
    return *num / *den;
}

}  // namespace

Machine parse_machine(std::string_view text) {
    std::vector<std::string> names;
    std::unordered_map<std::string, StateId> index;
    std::size_t states_line = 0;
    std::optional<std::pair<std::string, std::size_t>> start;
    std::vector<std::array<std::optional<StateId>, 2>> delta;
    std::optional<std::vector<bool>> selecting;
    std::vector<std::optional<double>> bets;
    bool any_bet = false;

    auto lookup = [&](const std::string& name, std::size_t line) {
        auto it = index.find(name);
        if (it == index.end()) throw ParseError(line, "unknown state '" + name + "'");
        return it->second;
    };
    auto require_states = [&](std::size_t line) {
        if (states_line == 0) throw ParseError(line, "'states:' must be declared first");
    };

    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto eol = text.find('\n', pos);
        std::string_view raw = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++lineno;

        if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        auto colon = raw.find(':');
        auto toks = split_ws(raw.substr(0, colon == std::string_view::npos ? raw.size() : colon));
        if (colon == std::string_view::npos) {
            if (toks.empty()) continue;
            throw ParseError(lineno, "expected 'keyword: ...'");
        }
        if (toks.size() != 1) throw ParseError(lineno, "expected a single keyword before ':'");
        const std::string& key = toks[0];
        auto args = split_ws(raw.substr(colon + 1));

        if (key == "states") {
            if (states_line != 0) throw ParseError(lineno, "states declared twice");
            if (args.empty()) throw ParseError(lineno, "no states declared");
            states_line = lineno;
            for (const auto& a : args) {
                if (index.count(a)) throw ParseError(lineno, "duplicate state '" + a + "'");
                index.emplace(a, static_cast<StateId>(names.size()));
                names.push_back(a);
            }
            delta.assign(names.size(), {});
            bets.assign(names.size(), std::nullopt);
        } else if (key == "start") {
            require_states(lineno);
            if (args.size() != 1) throw ParseError(lineno, "start takes one state");
            if (start) throw ParseError(lineno, "start declared twice");
            lookup(args[0], lineno);
            start = std::make_pair(args[0], lineno);
        } else if (key == "trans") {
            require_states(lineno);
            if (args.size() != 3) throw ParseError(lineno, "trans takes: FROM BIT TO");
            StateId from = lookup(args[0], lineno);
            if (args[1] != "0" && args[1] != "1") throw ParseError(lineno, "transition bit must be 0 or 1");
            int bit = args[1][0] - '0';
            StateId to = lookup(args[2], lineno);
            if (delta[from][bit]) throw ParseError(lineno, "duplicate transition for (" + args[0] + ", " + args[1] + ")");
            delta[from][bit] = to;
        } else if (key == "select") {
            require_states(lineno);
            if (!selecting) selecting.emplace(names.size(), false);
            for (const auto& a : args) (*selecting)[lookup(a, lineno)] = true;
        } else if (key == "bet") {
            require_states(lineno);
            if (args.size() != 2) throw ParseError(lineno, "bet takes: STATE PROBABILITY");
            StateId q = lookup(args[0], lineno);
            auto p = parse_probability(args[1]);
            if (!p) throw ParseError(lineno, "malformed bet '" + args[1] + "'");
            if (!(*p >= 0.0 && *p <= 1.0)) throw ParseError(lineno, "bet " + args[1] + " outside [0,1]");
            if (bets[q]) throw ParseError(lineno, "duplicate bet for state '" + args[0] + "'");
            bets[q] = *p;
            any_bet = true;
        } else {
            throw ParseError(lineno, "unknown keyword '" + key + "'");
        }
    }

    if (states_line == 0) throw ParseError(lineno, "no 'states:' declaration");
    std::vector<std::array<StateId, 2>> table(names.size());
    for (std::size_t q = 0; q < names.size(); ++q) {
        for (int b = 0; b < 2; ++b) {
            if (!delta[q][b])
                throw ParseError(states_line, "missing transition for (" + names[q] + ", " + std::to_string(b) + ")");
            table[q][b] = *delta[q][b];
        }
    }
    StateId q0 = start ? index.at(start->first) : 0;
    Machine m(std::move(names), q0, std::move(table));
    if (selecting) m = m.with_selecting(std::move(*selecting));
    if (any_bet) {
        std::vector<double> beta(m.size());
        for (std::size_t q = 0; q < m.size(); ++q) {
            if (!bets[q]) throw ParseError(states_line, "missing bet for state '" + m.name(q) + "'");
            beta[q] = *bets[q];
        }
        m = m.with_betting(std::move(beta));
    }
    return m;
}

Machine load_machine(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read machine file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_machine(ss.str());
    } catch (const ParseError& e) {
        throw ParseError(e.line(), e.detail(), path.string());
    }
}

std::string format_machine(const Machine& m) {
    std::ostringstream out;
    out << "states:";
    for (const auto& n : m.names()) out << ' ' << n;
    out << "\nstart: " << m.name(m.start()) << '\n';
    for (std::size_t q = 0; q < m.size(); ++q)
        for (int b = 0; b < 2; ++b)
            out << "trans: " << m.name(q) << ' ' << b << ' ' << m.name(m.next(q, b)) << '\n';
    if (m.has_selecting()) {
        out << "select:";
        for (std::size_t q = 0; q < m.size(); ++q)
            if (m.selects(q)) out << ' ' << m.name(q);
        out << '\n';
    }
    if (m.has_betting()) {
        out.precision(17);
        for (std::size_t q = 0; q < m.size(); ++q) out << "bet: " << m.name(q) << ' ' << m.bet(q) << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// structure

std::vector<std::vector<StateId>> strongly_connected_components(const std::vector<std::vector<StateId>>& graph) {
    // Iterative Tarjan; machines with 2^16 states would overflow a recursive version.
    const std::size_t n = graph.size();
    constexpr std::size_t unvisited = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> number(n, unvisited), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<StateId> stack;
    std::vector<std::vector<StateId>> components;
    std::vector<std::pair<StateId, std::size_t>> work;
    std::size_t counter = 0;

    for (std::size_t root = 0; root < n; ++root) {
        if (number[root] != unvisited) continue;
        work.emplace_back(static_cast<StateId>(root), 0);
        while (!work.empty()) {
            auto& [v, edge] = work.back();
            if (edge == 0) {
                number[v] = low[v] = counter++;
                stack.push_back(v);
                on_stack[v] = true;
            }
            if (edge < graph[v].size()) {
                StateId w = graph[v][edge++];
                if (number[w] == unvisited) {
                    work.emplace_back(w, 0);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], number[w]);
                }
                continue;
            }
            StateId done = v;
            work.pop_back();
            if (!work.empty()) low[work.back().first] = std::min(low[work.back().first], low[done]);
            if (low[done] == number[done]) {
                std::vector<StateId> comp;
                StateId w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp.push_back(w);
                } while (w != done);
                std::sort(comp.begin(), comp.end());
                components.push_back(std::move(comp));
            }
        }
    }
    return components;
}

bool ErgodicAnalysis::in_ergodic_set(StateId q) const {
    for (const auto& e : ergodic_sets)
        if (std::binary_search(e.begin(), e.end(), q)) return true;
    return false;
}

const std::vector<StateId>& ErgodicAnalysis::ergodic_set() const {
    if (ergodic_sets.size() != 1)
        throw ReducibleChain("chain has " + std::to_string(ergodic_sets.size()) + " ergodic sets; expected exactly one");
    return ergodic_sets.front();
}

ErgodicAnalysis ergodic_analysis(const Machine& m) {
    std::vector<std::vector<StateId>> graph(m.size());
    for (std::size_t q = 0; q < m.size(); ++q) {
        graph[q] = {m.next(q, 0), m.next(q, 1)};
        if (graph[q][0] == graph[q][1]) graph[q].pop_back();
    }
    ErgodicAnalysis a;
    a.classes = strongly_connected_components(graph);
    std::sort(a.classes.begin(), a.classes.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });
    a.class_of.assign(m.size(), 0);
    for (std::size_t c = 0; c < a.classes.size(); ++c)
        for (StateId q : a.classes[c]) a.class_of[q] = c;
    for (std::size_t c = 0; c < a.classes.size(); ++c) {
        bool closed = true;
        for (StateId q : a.classes[c])
            for (StateId t : graph[q])
                if (a.class_of[t] != c) closed = false;
        if (closed) a.ergodic_sets.push_back(a.classes[c]);
    }
    // In a finite graph every state reaches some closed class, so a unique
    // closed class is reachable from everywhere.
    a.irreducible = a.ergodic_sets.size() == 1;
    return a;
}

Machine irreducible_completion(const Machine& m, std::span<const std::uint8_t> w) {
    auto analysis = ergodic_analysis(m);
    std::vector<StateId> path{m.start()};
    for (auto b : w) path.push_back(m.next(path.back(), b));
    StateId target = path.back();
    const std::vector<StateId>* home = nullptr;
    for (const auto& e : analysis.ergodic_sets)
        if (std::binary_search(e.begin(), e.end(), target)) home = &e;
    if (!home)
        throw PreconditionError("run on the prefix ends in transient state '" + m.name(target) +
                                "', not inside an ergodic set");

    const std::size_t len = w.size();
    std::vector<StateId> remap(m.size(), 0);
    for (std::size_t i = 0; i < home->size(); ++i) remap[(*home)[i]] = static_cast<StateId>(len + i);

    std::vector<std::string> names;
    std::vector<std::array<StateId, 2>> delta;
    std::vector<bool> sel;
    std::vector<double> beta;
    auto add = [&](StateId original, std::string name, std::array<StateId, 2> next) {
        names.push_back(std::move(name));
        delta.push_back(next);
        if (m.has_selecting()) sel.push_back(m.selects(original));
        if (m.has_betting()) beta.push_back(m.bet(original));
    };
    for (std::size_t i = 0; i < len; ++i) {
        StateId succ = i + 1 < len ? static_cast<StateId>(i + 1) : remap[target];
        add(path[i], "w" + std::to_string(i) + "." + m.name(path[i]), {succ, succ});
    }
    for (StateId q : *home) add(q, m.name(q), {remap[m.next(q, 0)], remap[m.next(q, 1)]});

    Machine out(std::move(names), len > 0 ? 0 : remap[target], std::move(delta));
    if (m.has_selecting()) out = out.with_selecting(std::move(sel));
    if (m.has_betting()) out = out.with_betting(std::move(beta));
    return out;
}

Bits absorption_prefix(const Machine& m) {
    auto analysis = ergodic_analysis(m);
    std::vector<std::optional<std::pair<StateId, std::uint8_t>>> parent(m.size());
    std::vector<bool> seen(m.size(), false);
    std::deque<StateId> queue{m.start()};
    seen[m.start()] = true;
    while (!queue.empty()) {
        StateId q = queue.front();
        queue.pop_front();
        if (analysis.in_ergodic_set(q)) {
            Bits w;
            for (StateId v = q; parent[v]; v = parent[v]->first) w.push_back(parent[v]->second);
            std::reverse(w.begin(), w.end());
            return w;
        }
        for (std::uint8_t b = 0; b < 2; ++b) {
            StateId t = m.next(q, b);
            if (!seen[t]) {
                seen[t] = true;
                parent[t] = std::make_pair(q, b);
                queue.push_back(t);
            }
        }
    }
    throw Error("no ergodic set reachable from the start state");
}

// ---------------------------------------------------------------------------
// standard automata

namespace {

std::string history_name(std::uint32_t h, unsigned depth) {
    if (depth == 0) return "e";
    std::string s(depth, '0');
    // oldest bit first; the newest bit sits in the low-order position of h
    for (unsigned i = 0; i < depth; ++i)
        if ((h >> i) & 1u) s[depth - 1 - i] = '1';
    return s;
}

}  // namespace

Machine block_machine(unsigned depth) { return phase_machine(1, depth); }

Machine phase_machine(unsigned period, unsigned depth) {
    if (period == 0) throw Error("phase period must be at least 1");
    if (depth > 20) throw Error("block depth " + std::to_string(depth) + " too large (max 20)");
    const std::uint32_t histories = 1u << depth;
    const std::uint32_t mask = histories - 1;
    std::vector<std::string> names;
    std::vector<std::array<StateId, 2>> delta;
    names.reserve(std::size_t(period) * histories);
    delta.reserve(std::size_t(period) * histories);
    for (std::uint32_t i = 0; i < period; ++i) {
        std::uint32_t ni = (i + 1) % period;
        for (std::uint32_t h = 0; h < histories; ++h) {
            names.push_back(period == 1 ? history_name(h, depth)
                                        : std::to_string(i) + "|" + history_name(h, depth));
            delta.push_back({ni * histories + ((h << 1) & mask), ni * histories + (((h << 1) | 1u) & mask)});
        }
    }
    return Machine(std::move(names), 0, std::move(delta));
}

Machine cycle_machine(unsigned period) {
    if (period == 0) throw Error("cycle period must be at least 1");
    std::vector<std::string> names;
    std::vector<std::array<StateId, 2>> delta;
    for (StateId i = 0; i < period; ++i) {
        names.push_back("c" + std::to_string(i));
        StateId n = (i + 1) % period;
        delta.push_back({n, n});
    }
    return Machine(std::move(names), 0, std::move(delta));
}

Machine figure1_machine() {
    return parse_machine(
        "states: a b c d\n"
        "start: a\n"
        "trans: a 0 b\ntrans: a 1 b\n"
        "trans: b 0 a\ntrans: b 1 c\n"
        "trans: c 0 d\ntrans: c 1 d\n"
        "trans: d 0 a\ntrans: d 1 c\n");
}

}  // namespace fsdim

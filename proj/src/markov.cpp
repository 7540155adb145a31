#include "fsdim/markov.hpp"

#include "fsdim/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iostream>
#include <numeric>

namespace fsdim {

namespace {

constexpr std::size_t kMaxDenseStates = 4096;
constexpr std::size_t kMaxPowerSteps = std::size_t(1) << 24;

std::vector<std::vector<StateId>> support_graph(const Matrix& p) {
    std::vector<std::vector<StateId>> g(p.rows());
    for (std::size_t i = 0; i < p.rows(); ++i)
        for (std::size_t j = 0; j < p.cols(); ++j)
            if (p(i, j) > 0.0) g[i].push_back(static_cast<StateId>(j));
    return g;
}

void check_stochastic(const Matrix& p) {
    if (p.rows() == 0 || p.rows() != p.cols()) throw Error("transition matrix must be square and nonempty");
    for (std::size_t i = 0; i < p.rows(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < p.cols(); ++j) {
            if (p(i, j) < 0.0) throw Error("transition matrix has a negative entry");
            sum += p(i, j);
        }
        if (std::abs(sum - 1.0) > 1e-9) throw Error("transition matrix row " + std::to_string(i) + " does not sum to 1");
    }
}

// The unique closed class of p, ascending.
std::vector<StateId> closed_class(const Matrix& p) {
    auto g = support_graph(p);
    auto comps = strongly_connected_components(g);
    std::vector<std::size_t> comp_of(p.rows());
    for (std::size_t c = 0; c < comps.size(); ++c)
        for (StateId q : comps[c]) comp_of[q] = c;
    std::vector<std::vector<StateId>> closed;
    for (std::size_t c = 0; c < comps.size(); ++c) {
        bool is_closed = true;
        for (StateId q : comps[c])
            for (StateId t : g[q])
                if (comp_of[t] != c) is_closed = false;
        if (is_closed) closed.push_back(comps[c]);
    }
    if (closed.size() != 1)
        throw ReducibleChain("chain has " + std::to_string(closed.size()) +
                             " ergodic sets; a stationary distribution needs exactly one");
    return closed.front();
}

std::size_t period_of(const Matrix& p, const std::vector<StateId>& cls) {
    std::vector<long> level(p.rows(), -1);
    std::vector<bool> member(p.rows(), false);
    for (StateId q : cls) member[q] = true;
    std::deque<StateId> queue{cls.front()};
    level[cls.front()] = 0;
    std::size_t g = 0;
    while (!queue.empty()) {
        StateId u = queue.front();
        queue.pop_front();
        for (std::size_t v = 0; v < p.cols(); ++v) {
            if (!(p(u, v) > 0.0) || !member[v]) continue;
            if (level[v] < 0) {
                level[v] = level[u] + 1;
                queue.push_back(static_cast<StateId>(v));
            } else {
                g = std::gcd(g, static_cast<std::size_t>(std::labs(level[u] + 1 - level[v])));
            }
        }
    }
    return g == 0 ? 1 : g;
}

StationarySolution linear_solve(const Matrix& p, const std::vector<StateId>& cls) {
    const std::size_t m = cls.size();
    if (m > kMaxDenseStates)
        throw Error("ergodic set of " + std::to_string(m) + " states is too large for the dense solver");
    // Rows of (I - P)^T restricted to the closed class; the last row becomes the
    // normalization sum(pi) = 1.
    Matrix a(m, m + 1, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) a(i, j) = (i == j ? 1.0 : 0.0) - p(cls[j], cls[i]);
    for (std::size_t j = 0; j < m; ++j) a(m - 1, j) = 1.0;
    a(m - 1, m) = 1.0;

    double max_pivot = 0.0, min_pivot = INFINITY;
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t best = col;
        for (std::size_t r = col + 1; r < m; ++r)
            if (std::abs(a(r, col)) > std::abs(a(best, col))) best = r;
        if (best != col)
            for (std::size_t j = 0; j <= m; ++j) std::swap(a(col, j), a(best, j));
        double piv = a(col, col);
        if (piv == 0.0) throw ReducibleChain("singular stationary system");
        max_pivot = std::max(max_pivot, std::abs(piv));
        min_pivot = std::min(min_pivot, std::abs(piv));
        for (std::size_t r = col + 1; r < m; ++r) {
            double f = a(r, col) / piv;
            if (f == 0.0) continue;
            for (std::size_t j = col; j <= m; ++j) a(r, j) -= f * a(col, j);
        }
    }
    std::vector<double> x(m);
    for (std::size_t i = m; i-- > 0;) {
        double s = a(i, m);
        for (std::size_t j = i + 1; j < m; ++j) s -= a(i, j) * x[j];
        x[i] = s / a(i, i);
    }

    StationarySolution sol;
    sol.pi.assign(p.rows(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double v = std::max(0.0, x[i]);
        sol.pi[cls[i]] = v;
        total += v;
    }
    for (double& v : sol.pi) v /= total;
    sol.condition_estimate = max_pivot / min_pivot;
    if (sol.condition_estimate > kConditionWarning)
        std::clog << "warning: stationary system is ill-conditioned (pivot ratio " << sol.condition_estimate << ")\n";
    return sol;
}

// Power iteration with Cesaro averaging over the last tenth of the steps. The
// window is rounded up to a multiple of the period, so periodic chains average
// over whole orbits instead of oscillating.
StationarySolution power_iteration(const Matrix& p, const std::vector<StateId>& cls) {
    const std::size_t m = cls.size();
    const std::size_t period = period_of(p, cls);
    std::vector<std::vector<std::pair<std::size_t, double>>> cols(m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (double w = p(cls[i], cls[j]); w > 0.0) cols[j].emplace_back(i, w);

    std::vector<double> x(m, 1.0 / double(m)), next(m), avg(m), prev_avg;
    std::size_t t = 0;
    std::size_t horizon = 64;
    for (;;) {
        std::size_t window = std::max<std::size_t>(1, horizon / 10);
        window = (window + period - 1) / period * period;
        std::fill(avg.begin(), avg.end(), 0.0);
        for (; t < horizon; ++t) {
            for (std::size_t j = 0; j < m; ++j) {
                double s = 0.0;
                for (auto [i, w] : cols[j]) s += x[i] * w;
                next[j] = s;
            }
            x.swap(next);
            if (t + window >= horizon)
                for (std::size_t j = 0; j < m; ++j) avg[j] += x[j];
        }
        for (double& v : avg) v /= double(window);
        if (!prev_avg.empty()) {
            double diff = 0.0;
            for (std::size_t j = 0; j < m; ++j) diff += std::abs(avg[j] - prev_avg[j]);
            if (diff < 1e-14 || horizon >= kMaxPowerSteps) break;
        }
        prev_avg = avg;
        horizon *= 2;
    }

    StationarySolution sol;
    sol.pi.assign(p.rows(), 0.0);
    double total = std::accumulate(avg.begin(), avg.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) sol.pi[cls[i]] = avg[i] / total;
    sol.iterations = horizon;
    return sol;
}

}  // namespace

FairChain induce_chain(const Machine& m) {
    FairChain c{m.without_decorations(), {}, ergodic_analysis(m), std::nullopt};
    c.edges.reserve(2 * m.size());
    for (StateId q = 0; q < m.size(); ++q)
        for (std::uint8_t b = 0; b < 2; ++b) c.edges.push_back(Edge{q, b, m.next(q, b)});
    return c;
}

Matrix transition_matrix(const FairChain& c) {
    if (c.size() > kMaxDenseStates)
        throw Error("chain of " + std::to_string(c.size()) + " states is too large for a dense matrix");
    Matrix p(c.size(), c.size(), 0.0);
    for (const Edge& e : c.edges) p(e.from, e.to) += 0.5;
    return p;
}

StationarySolution solve_stationary(const Matrix& p, StationaryMethod method) {
    check_stochastic(p);
    auto cls = closed_class(p);
    return method == StationaryMethod::linear_solve ? linear_solve(p, cls) : power_iteration(p, cls);
}

std::vector<double> stationary(const FairChain& c, StationaryMethod method) {
    if (!c.irreducible())
        throw ReducibleChain("chain has " + std::to_string(c.ergodic.ergodic_sets.size()) +
                             " ergodic sets; a stationary distribution needs exactly one");
    // Restricting to the ergodic set first keeps large transient-free machines small.
    const auto& cls = c.ergodic.ergodic_set();
    std::vector<StateId> local(c.size(), 0);
    for (std::size_t i = 0; i < cls.size(); ++i) local[cls[i]] = static_cast<StateId>(i);
    if (cls.size() > kMaxDenseStates)
        throw Error("ergodic set of " + std::to_string(cls.size()) + " states is too large for the dense solver");
    Matrix p(cls.size(), cls.size(), 0.0);
    for (StateId q : cls)
        for (std::uint8_t b = 0; b < 2; ++b) p(local[q], local[c.automaton.next(q, b)]) += 0.5;
    auto sol = solve_stationary(p, method);
    std::vector<double> pi(c.size(), 0.0);
    for (std::size_t i = 0; i < cls.size(); ++i) pi[cls[i]] = sol.pi[i];
    return pi;
}

FairChain with_stationary(FairChain c) {
    c.stationary = stationary(c);
    return c;
}

SensitivityGap stationary_sensitivity(const Matrix& p, const Matrix& p_prime) {
    if (p.rows() != p_prime.rows() || p.cols() != p_prime.cols())
        throw Error("stationary_sensitivity: dimension mismatch (" + std::to_string(p.rows()) + " vs " +
                    std::to_string(p_prime.rows()) + " states)");
    SensitivityGap gap{0.0, 0.0};
    for (std::size_t i = 0; i < p.rows(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < p.cols(); ++j) row += std::abs(p(i, j) - p_prime(i, j));
        gap.transition_gap = std::max(gap.transition_gap, row);
    }
    auto pi = solve_stationary(p).pi;
    auto pi_prime = solve_stationary(p_prime).pi;
    for (std::size_t i = 0; i < pi.size(); ++i) gap.stationary_gap += std::abs(pi[i] - pi_prime[i]);
    return gap;
}

std::size_t chain_period(const Matrix& p) {
    check_stochastic(p);
    return period_of(p, closed_class(p));
}

}  // namespace fsdim

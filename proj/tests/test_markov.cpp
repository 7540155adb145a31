#include "doctest.h"

#include "fsdim/error.hpp"
#include "fsdim/infotheory.hpp"
#include "fsdim/markov.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace fsdim;

namespace {

double linf_residual(const Matrix& p, const std::vector<double>& pi) {
    double worst = 0.0;
    for (std::size_t j = 0; j < p.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < p.rows(); ++i) s += pi[i] * p(i, j);
        worst = std::max(worst, std::abs(s - pi[j]));
    }
    return worst;
}

double l1(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
    return d;
}

}  // namespace

TEST_CASE("induced chain of the base automaton") {
    FairChain c = induce_chain(figure1_machine());
    CHECK(c.edges.size() == 8);
    CHECK(c.edges[0].to == 1);  // a --0--> b
    CHECK(c.edges[1].to == 1);  // a --1--> b
    Matrix p = transition_matrix(c);
    CHECK(p(0, 1) == 1.0);
    CHECK(p(1, 0) == 0.5);
    CHECK(p(1, 2) == 0.5);
}

TEST_CASE("row sums are one for every machine") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 50; ++t) {
        Matrix p = transition_matrix(induce_chain(testing::random_machine(rng, 1 + t % 10)));
        for (std::size_t i = 0; i < p.rows(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < p.cols(); ++j) s += p(i, j);
            CHECK(s == 1.0);
        }
    }
    Matrix one = transition_matrix(induce_chain(block_machine(0)));
    CHECK(one.rows() == 1);
    CHECK(one(0, 0) == 1.0);
}

TEST_CASE("stationary distributions") {
    // Base automaton by hand: pi_b = pi_a, pi_d = pi_c, pi_a = (pi_b + pi_d)/2 => all equal.
    for (auto method : {StationaryMethod::linear_solve, StationaryMethod::power_iteration}) {
        auto pi = stationary(induce_chain(figure1_machine()), method);
        for (double v : pi) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
        for (unsigned d : {1u, 2u, 3u, 7u}) {
            auto cyc = stationary(induce_chain(cycle_machine(d)), method);
            for (double v : cyc) CHECK(v == doctest::Approx(1.0 / d).epsilon(1e-12));
        }
    }
    CHECK(stationary(induce_chain(block_machine(0))) == std::vector<double>{1.0});
}

TEST_CASE("transient states receive exactly zero mass") {
    Machine m = parse_machine("states: t u v\nstart: t\ntrans: t 0 u\ntrans: t 1 v\n"
                              "trans: u 0 v\ntrans: u 1 u\ntrans: v 0 u\ntrans: v 1 u\n");
    for (auto method : {StationaryMethod::linear_solve, StationaryMethod::power_iteration}) {
        auto pi = stationary(induce_chain(m), method);
        CHECK(pi[0] == 0.0);
        // u -> u, v each 1/2; v -> u always: pi_u = pi_u/2 + pi_v, pi_v = pi_u/2
        CHECK(pi[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
        CHECK(pi[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
}

TEST_CASE("reducible chains are rejected") {
    Machine m = parse_machine("states: x y\ntrans: x 0 x\ntrans: x 1 x\ntrans: y 0 y\ntrans: y 1 y\n");
    CHECK_THROWS_AS(stationary(induce_chain(m)), ReducibleChain);
    CHECK_THROWS_AS(stationary(induce_chain(m), StationaryMethod::power_iteration), ReducibleChain);
}

TEST_CASE("linear solve and power iteration agree on random irreducible fair chains") {
    std::mt19937_64 rng(2024);
    for (int t = 0; t < 100; ++t) {
        FairChain c = induce_chain(testing::random_irreducible_machine(rng, 10));
        Matrix p = transition_matrix(c);
        auto a = stationary(c, StationaryMethod::linear_solve);
        auto b = stationary(c, StationaryMethod::power_iteration);
        CHECK(l1(a, b) <= 1e-9);
        CHECK(linf_residual(p, a) <= 1e-12);
        double sum = 0.0;
        for (double v : a) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
}

TEST_CASE("fair conditional edge distribution is exactly one half") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
        FairChain c = with_stationary(induce_chain(testing::random_irreducible_machine(rng, 8)));
        JointDistribution fair = fair_stationary_joint(c);
        for (StateId q : c.ergodic.ergodic_set()) {
            CHECK(*fair.conditional(q, 0) == 0.5);
            CHECK(*fair.conditional(q, 1) == 0.5);
        }
    }
}

TEST_CASE("periodic chains converge under Cesaro averaging") {
    // bipartite chain: period 2
    Matrix p(2, 2);
    p(0, 1) = 1.0;
    p(1, 0) = 1.0;
    CHECK(chain_period(p) == 2);
    auto sol = solve_stationary(p, StationaryMethod::power_iteration);
    CHECK(sol.pi[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(chain_period(transition_matrix(induce_chain(cycle_machine(5)))) == 5);
    // cycles a-b-a and a-b-c-d-a have lengths 2 and 4
    CHECK(chain_period(transition_matrix(induce_chain(figure1_machine()))) == 2);
    CHECK(chain_period(transition_matrix(induce_chain(block_machine(2)))) == 1);
}

TEST_CASE("stationary sensitivity") {
    Matrix p(2, 2, 0.5);
    CHECK(stationary_sensitivity(p, p).transition_gap == 0.0);
    CHECK(stationary_sensitivity(p, p).stationary_gap == 0.0);

    Matrix q = p;
    q(0, 0) = 0.4;
    q(0, 1) = 0.6;
    // two-state closed form: pi' = (b/(a+b), a/(a+b)) with a = P(0->1) = 0.6, b = P(1->0) = 0.5
    double a = 0.6, b = 0.5;
    double expected = std::abs(b / (a + b) - 0.5) + std::abs(a / (a + b) - 0.5);
    auto gap = stationary_sensitivity(p, q);
    CHECK(gap.transition_gap == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(gap.stationary_gap == doctest::Approx(expected).epsilon(1e-12));
    CHECK(gap.stationary_gap == doctest::Approx(0.0909090909).epsilon(1e-9));

    CHECK_THROWS_AS(stationary_sensitivity(p, Matrix(3, 3, 1.0 / 3.0)), Error);
}

TEST_CASE("shrinking perturbations shrink the stationary gap") {
    std::mt19937_64 rng(99);
    for (int t = 0; t < 10; ++t) {
        Matrix p = testing::random_stochastic(rng, 5);
        Matrix r = testing::random_stochastic(rng, 5);
        double prev = INFINITY;
        for (double mag : {1e-2, 1e-4, 1e-6}) {
            Matrix q(5, 5);
            for (std::size_t i = 0; i < 5; ++i)
                for (std::size_t j = 0; j < 5; ++j) q(i, j) = (1 - mag) * p(i, j) + mag * r(i, j);
            double gap = stationary_sensitivity(p, q).stationary_gap;
            CHECK(gap < prev);
            prev = gap;
        }
    }
}

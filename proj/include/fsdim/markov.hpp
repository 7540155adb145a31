#pragma once

#include "fsdim/machine.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace fsdim {

// Dense row-major matrix; only used for chains small enough to solve directly.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

struct Edge {
    StateId from;
    std::uint8_t bit;
    StateId to;
};

// Induced Markov chain of an automaton: every state has its 0-edge and its
// 1-edge, each taken with probability 1/2.
struct FairChain {
    Machine automaton;
    std::vector<Edge> edges;  // edges[2q + b] leaves q on bit b
    ErgodicAnalysis ergodic;
    std::optional<std::vector<double>> stationary;

    std::size_t size() const noexcept { return automaton.size(); }
    bool irreducible() const noexcept { return ergodic.irreducible; }
};

FairChain induce_chain(const Machine& m);
Matrix transition_matrix(const FairChain& c);

enum class StationaryMethod { linear_solve, power_iteration };

struct StationarySolution {
    std::vector<double> pi;
    // max |pivot| / min |pivot| of the elimination; a cheap lower estimate of the
    // condition number. Zero for power iteration.
    double condition_estimate = 0.0;
    std::size_t iterations = 0;
};

inline constexpr double kConditionWarning = 1e12;

// Stationary distribution of a row-stochastic matrix with a unique closed class.
// States outside the closed class get exactly 0. Throws ReducibleChain otherwise.
StationarySolution solve_stationary(const Matrix& p, StationaryMethod method = StationaryMethod::linear_solve);

std::vector<double> stationary(const FairChain& c, StationaryMethod method = StationaryMethod::linear_solve);

// Fills c.stationary (linear solve) and returns c.
FairChain with_stationary(FairChain c);

struct SensitivityGap {
    double transition_gap;  // max-row-sum norm of P - P'
    double stationary_gap;  // L1 distance of the stationary distributions
};

SensitivityGap stationary_sensitivity(const Matrix& p, const Matrix& p_prime);

// Period of the closed class of a stochastic matrix (gcd of its cycle lengths).
std::size_t chain_period(const Matrix& p);

}  // namespace fsdim

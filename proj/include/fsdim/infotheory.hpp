#pragma once

#include "fsdim/empirical.hpp"
#include "fsdim/markov.hpp"

#include <span>
#include <vector>

namespace fsdim {

// All quantities are in bits, with 0 log 0 = 0 and 0 log(0/0) = 0.

using Distribution = std::vector<double>;

// Throws unless entries are >= 0 and sum to 1 within 1e-12.
void validate_distribution(std::span<const double> p);

double entropy(std::span<const double> p);

// Sum over states of Q(q) * entropy(mu(.|q)).
double conditional_entropy(const JointDistribution& mu);

// +infinity when p puts mass outside the support of q.
double kl(std::span<const double> p, std::span<const double> q);

// Sum over states of Q_mu(q) * kl(mu(.|q), nu(.|q)); states without mu-mass are
// skipped. +infinity when nu gives zero conditional mass where mu does not.
double conditional_kl(const JointDistribution& mu, const JointDistribution& nu);

struct PinskerGap {
    double l1;
    double bound;  // sqrt(2 ln 2 * kl(p, q)), the base-2 form of Pinsker's inequality
};

PinskerGap pinsker_gap(std::span<const double> p, std::span<const double> q);

// pi(q)/2 on each of q's two edges. Uses c.stationary, solving for it if absent.
JointDistribution fair_stationary_joint(const FairChain& c);

}  // namespace fsdim

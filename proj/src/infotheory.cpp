#include "fsdim/infotheory.hpp"

#include "fsdim/error.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace fsdim {

namespace {

double plogp(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

}  // namespace

void validate_distribution(std::span<const double> p) {
    double sum = 0.0;
    for (double v : p) {
        if (!(v >= 0.0)) throw Error("distribution has a negative or NaN entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw Error("distribution sums to " + std::to_string(sum) + ", not 1");
}

double entropy(std::span<const double> p) {
    validate_distribution(p);
    double h = 0.0;
    for (double v : p) h -= plogp(v);
    return h;
}

double conditional_entropy(const JointDistribution& mu) {
    double h = 0.0;
    for (StateId q = 0; q < mu.states(); ++q) {
        double m = mu.marginal(q);
        if (m <= 0.0) continue;
        h -= m * (plogp(mu.at(q, 0) / m) + plogp(mu.at(q, 1) / m));
    }
    return h;
}

double kl(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw Error("kl: distributions of different sizes");
    validate_distribution(p);
    validate_distribution(q);
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
        d += p[i] * std::log2(p[i] / q[i]);
    }
    return std::max(0.0, d);
}

double conditional_kl(const JointDistribution& mu, const JointDistribution& nu) {
    if (mu.states() != nu.states()) throw Error("conditional_kl: joints over different chains");
    double d = 0.0;
    for (StateId q = 0; q < mu.states(); ++q) {
        double m = mu.marginal(q);
        if (m <= 0.0) continue;
        double mn = nu.marginal(q);
        for (std::uint8_t b = 0; b < 2; ++b) {
            double pm = mu.at(q, b) / m;
            if (pm <= 0.0) continue;
            if (mn <= 0.0 || nu.at(q, b) <= 0.0) return std::numeric_limits<double>::infinity();
            d += m * pm * std::log2(pm / (nu.at(q, b) / mn));
        }
    }
    return std::max(0.0, d);
}

PinskerGap pinsker_gap(std::span<const double> p, std::span<const double> q) {
    double divergence = kl(p, q);
    double l1 = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) l1 += std::abs(p[i] - q[i]);
    return PinskerGap{l1, std::sqrt(2.0 * std::log(2.0) * divergence)};
}

JointDistribution fair_stationary_joint(const FairChain& c) {
    std::vector<double> pi = c.stationary ? *c.stationary : stationary(c);
    std::vector<double> mass(2 * c.size());
    for (std::size_t q = 0; q < c.size(); ++q) mass[2 * q] = mass[2 * q + 1] = pi[q] / 2.0;
    return JointDistribution(std::move(mass));
}

}  // namespace fsdim

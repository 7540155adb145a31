#pragma once

#include "fsdim/machine.hpp"
#include "fsdim/markov.hpp"
#include "fsdim/sequence.hpp"

#include <random>
#include <string>
#include <vector>

namespace fsdim::testing {

inline Bits random_bits(std::mt19937_64& rng, std::size_t n) {
    std::bernoulli_distribution coin(0.5);
    Bits b(n);
    for (auto& v : b) v = coin(rng);
    return b;
}

inline Machine random_machine(std::mt19937_64& rng, std::size_t states) {
    std::uniform_int_distribution<StateId> pick(0, static_cast<StateId>(states - 1));
    std::vector<std::string> names;
    std::vector<std::array<StateId, 2>> delta;
    for (std::size_t q = 0; q < states; ++q) {
        names.push_back("s" + std::to_string(q));
        delta.push_back({pick(rng), pick(rng)});
    }
    return Machine(std::move(names), pick(rng), std::move(delta));
}

// Random machine whose fair chain has a unique ergodic set (transient states allowed).
inline Machine random_irreducible_machine(std::mt19937_64& rng, std::size_t max_states) {
    std::uniform_int_distribution<std::size_t> size(1, max_states);
    for (;;) {
        Machine m = random_machine(rng, size(rng));
        if (ergodic_analysis(m).irreducible) return m;
    }
}

inline Machine random_bettor(std::mt19937_64& rng, Machine m) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> beta(m.size());
    for (auto& b : beta) b = u(rng);
    return m.with_betting(std::move(beta));
}

// Dense random row-stochastic matrix with strictly positive entries.
inline Matrix random_stochastic(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    Matrix p(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) sum += (p(i, j) = u(rng));
        for (std::size_t j = 0; j < n; ++j) p(i, j) /= sum;
    }
    return p;
}

// Binary numerals of 0, 1, 2, ... concatenated, built from std::to_string-free
// bit extraction so it shares nothing with the streaming generator.
inline std::string champernowne_oracle(std::size_t n) {
    std::string s;
    for (unsigned long v = 0; s.size() < n; ++v) {
        std::string numeral;
        unsigned long x = v;
        do {
            numeral.insert(numeral.begin(), char('0' + (x % 2)));
            x /= 2;
        } while (x > 0);
        s += numeral;
    }
    s.resize(n);
    return s;
}

}  // namespace fsdim::testing

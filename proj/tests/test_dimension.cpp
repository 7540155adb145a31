#include "doctest.h"

#include "fsdim/dimension.hpp"
#include "fsdim/error.hpp"
#include "fsdim/infotheory.hpp"
#include "test_util.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace fsdim;

namespace {

const Bits& champernowne_1m() {
    static const Bits bits = generate(BitSource::champernowne(), 1000000);
    return bits;
}

const Bits& diluted_1m() {
    static const Bits bits = generate(BitSource::diluted(BitSource::champernowne()), 1000000);
    return bits;
}

Machine uniform_bettor(Machine m, double beta) {
    return m.with_betting(std::vector<double>(m.size(), beta));
}

// Plain-arithmetic capital recursion, for short inputs.
std::vector<double> direct_capital(const Machine& m, const Bits& x) {
    std::vector<double> d{1.0};
    StateId q = m.start();
    for (auto b : x) {
        d.push_back(d.back() * (b ? 2.0 * (1.0 - m.bet(q)) : 2.0 * m.bet(q)));
        q = m.next(q, b);
    }
    return d;
}

}  // namespace

TEST_CASE("chain_dimension") {
    SUBCASE("single state on zeros") {
        Bits zeros = generate(BitSource::zeros(), 1000);
        auto est = chain_dimension(induce_chain(block_machine(0)), zeros, zeros.size());
        CHECK(est.dim_upper == 0.0);
        CHECK(est.strong_dim_upper == 0.0);
    }
    SUBCASE("parity chain on the diluted sequence") {
        auto est = chain_dimension(induce_chain(cycle_machine(2)), diluted_1m(), 100000);
        CHECK(est.dim_upper == doctest::Approx(0.5).epsilon(0.1));
        CHECK(std::abs(est.dim_upper - 0.5) <= 0.05);
        CHECK(est.dim_upper <= est.strong_dim_upper);
    }
    SUBCASE("depth-1 block chain on champernowne") {
        auto est = chain_dimension(induce_chain(block_machine(1)), champernowne_1m(), 1000000);
        CHECK(est.dim_upper >= 0.95);
    }
    SUBCASE("reducible chains are rejected") {
        Machine m = parse_machine("states: x y\ntrans: x 0 x\ntrans: x 1 x\ntrans: y 0 y\ntrans: y 1 y\n");
        CHECK_THROWS_AS(chain_dimension(induce_chain(m), champernowne_1m(), 100), ReducibleChain);
    }
}

TEST_CASE("chain family grammar") {
    auto f = ChainFamily::parse("blocks:2+phase:3,1");
    std::vector<std::string> ids;
    for (const auto& m : f.members()) ids.push_back(m.id);
    CHECK(ids == std::vector<std::string>{"block:0", "block:1", "block:2", "phase:2,0", "phase:2,1", "phase:3,0",
                                          "phase:3,1"});
    CHECK(ChainFamily::parse("phase:2").members().size() == 1 + kDefaultPhaseDepth);
    CHECK_THROWS_AS(ChainFamily::parse("blocks:"), Error);
    CHECK_THROWS_AS(ChainFamily::parse("cubes:3"), Error);
    CHECK_THROWS_AS(ChainFamily::parse("blocks:17"), Error);
    CHECK_THROWS_AS(ChainFamily::parse("phase:1"), Error);
}

TEST_CASE("family_dimension") {
    SUBCASE("zeros") {
        Bits zeros = generate(BitSource::zeros(), 10000);
        auto r = family_dimension(zeros, zeros.size(), ChainFamily::parse("blocks:3"));
        CHECK(r.dim_est == 0.0);
        CHECK(r.witness_chain == "block:0");
    }
    SUBCASE("diluted champernowne is near one half") {
        auto r = family_dimension(diluted_1m(), 1000000, ChainFamily::parse("blocks:4+phase:2"));
        CHECK(r.dim_est >= 0.45);
        CHECK(r.dim_est <= 0.55);
        CHECK(r.witness_chain.starts_with("phase:2"));
        CHECK(r.dim_est <= r.strong_dim_est);
    }
    SUBCASE("champernowne is near one") {
        auto r = family_dimension(champernowne_1m(), 1000000, ChainFamily::parse("blocks:4+phase:2"));
        CHECK(r.dim_est >= 0.9);
    }
    SUBCASE("reducible file member is named in the error") {
        auto path = std::filesystem::temp_directory_path() / "fsdim_reducible.fsm";
        std::ofstream(path) << "states: x y\ntrans: x 0 x\ntrans: x 1 x\ntrans: y 0 y\ntrans: y 1 y\n";
        auto family = ChainFamily::parse("blocks:1+file:" + path.string());
        const std::string id = "file:" + path.string();
        CHECK_THROWS_WITH_AS(family_dimension(champernowne_1m(), 1000, family), doctest::Contains(id.c_str()),
                             ReducibleChain);
    }
}

TEST_CASE("enlarging the family never raises the estimate") {
    std::mt19937_64 rng(23);
    std::vector<Bits> inputs{generate(BitSource::periodic("0010111"), 20000), testing::random_bits(rng, 20000),
                             Bits(diluted_1m().begin(), diluted_1m().begin() + 20000)};
    const char* chain[] = {"blocks:1", "blocks:2", "blocks:2+phase:2,0", "blocks:3+phase:3,1"};
    for (const auto& x : inputs) {
        double prev = 2.0;
        for (const char* spec : chain) {
            auto r = family_dimension(x, x.size(), ChainFamily::parse(spec));
            CHECK(r.dim_est <= prev);
            CHECK(0.0 <= r.dim_est);
            CHECK(r.dim_est <= r.strong_dim_est);
            CHECK(r.strong_dim_est <= 1.0);
            prev = r.dim_est;
        }
    }
}

TEST_CASE("family evaluation is deterministic") {
    auto family = ChainFamily::parse("blocks:4+phase:3");
    auto a = report_to_json(family_dimension(diluted_1m(), 200000, family)).dump();
    auto b = report_to_json(family_dimension(diluted_1m(), 200000, family)).dump();
    CHECK(a == b);
}

TEST_CASE("block entropy cross-check") {
    Bits zeros = generate(BitSource::zeros(), 5000);
    auto z = block_entropy_dimension(zeros, zeros.size(), 8);
    CHECK(z.dim_est == 0.0);
    for (double r : z.rate_at_n) CHECK(r == 0.0);

    Bits alt = generate(BitSource::periodic("01"), 100000);
    CHECK(block_entropy_dimension(alt, alt.size(), 8).dim_est <= 1.0 / 8.0);

    auto c = block_entropy_dimension(champernowne_1m(), 1000000, 8);
    CHECK(c.dim_est >= 0.9);
    CHECK(c.dim_est <= c.strong_dim_est);

    CHECK_THROWS_AS(block_entropy_dimension(alt, alt.size(), 17), Error);
}

TEST_CASE("family and block-entropy estimates agree within 0.1") {
    const std::size_t n = 1000000;
    std::vector<std::pair<std::string, Bits>> inputs{
        {"champernowne", champernowne_1m()},
        {"diluted", diluted_1m()},
        {"periodic", generate(BitSource::periodic("01"), n)},
        {"zeros", generate(BitSource::zeros(), n)}};
    auto family = ChainFamily::parse("blocks:8+phase:2");
    for (const auto& [name, x] : inputs) {
        CAPTURE(name);
        auto fam = family_dimension(x, n, family);
        auto blk = block_entropy_dimension(x, n, 16);
        CHECK(std::abs(fam.dim_est - blk.dim_est) <= 0.1);
    }
}

TEST_CASE("run_martingale") {
    Bits x = bits_from_string("0110100111");
    auto half = run_martingale(uniform_bettor(figure1_machine(), 0.5), x);
    for (double v : half.log2_capital) CHECK(v == 0.0);

    auto all_in = run_martingale(uniform_bettor(block_machine(0), 1.0), bits_from_string("000"));
    CHECK(all_in.log2_capital == std::vector<double>{0, 1, 2, 3});

    auto lost = run_martingale(uniform_bettor(block_machine(0), 1.0), bits_from_string("0010"));
    CHECK(lost.log2_capital[2] == 2.0);
    CHECK(std::isinf(lost.log2_capital[3]));
    CHECK(lost.log2_capital[3] < 0);
    CHECK(std::isinf(lost.log2_capital[4]));

    CHECK_THROWS_AS(run_martingale(figure1_machine(), x), Error);
}

TEST_CASE("run_martingale matches the direct product recursion") {
    std::mt19937_64 rng(404);
    for (int t = 0; t < 50; ++t) {
        Machine m = testing::random_bettor(rng, testing::random_machine(rng, 4));
        Bits x = testing::random_bits(rng, 200);
        auto trace = run_martingale(m, x);
        auto direct = direct_capital(m, x);
        for (std::size_t i = 0; i < direct.size(); ++i) {
            double expect = std::log2(direct[i]);
            if (std::isinf(expect)) CHECK(trace.log2_capital[i] == expect);
            else CHECK(std::abs(trace.log2_capital[i] - expect) <= 1e-9);
        }
    }
}

TEST_CASE("witness martingale") {
    SUBCASE("fair joint bets one half everywhere") {
        FairChain c = with_stationary(induce_chain(figure1_machine()));
        Machine w = witness_martingale(c, fair_stationary_joint(c));
        for (StateId q = 0; q < w.size(); ++q) CHECK(w.bet(q) == 0.5);
        std::mt19937_64 rng(2);
        CHECK(run_martingale(w, testing::random_bits(rng, 300)).final() == 0.0);
    }
    SUBCASE("all mass on the zero edge") {
        FairChain c = induce_chain(block_machine(0));
        Machine w = witness_martingale(c, JointDistribution({1.0, 0.0}));
        CHECK(w.bet(0) == 1.0);
        CHECK(run_martingale(w, generate(BitSource::zeros(), 50)).final() == 50.0);
    }
    SUBCASE("zero-mass states bet one half") {
        FairChain c = induce_chain(figure1_machine());
        auto t = run_trace(c.automaton, bits_from_string("00"), std::vector<std::uint64_t>{2});
        Machine w = witness_martingale(c, t.snapshots[0].joint());
        CHECK(w.bet(0) == 1.0);
        CHECK(w.bet(2) == 0.5);
    }
    SUBCASE("parity witness on the diluted sequence grows at rate one half") {
        const std::uint64_t n = 100000;
        FairChain c = induce_chain(cycle_machine(2));
        auto t = run_trace(c.automaton, diluted_1m(), std::vector<std::uint64_t>{n});
        Machine w = witness_martingale(c, t.snapshots[0].joint());
        auto trace = run_martingale(w, Bits(diluted_1m().begin(), diluted_1m().begin() + n));
        CHECK(std::abs(trace.final() / double(n) - 0.5) <= 0.05);
    }
}

TEST_CASE("capital identity: witness from P_n earns n(1 - H) on the same prefix") {
    std::mt19937_64 rng(1234);
    for (int t = 0; t < 100; ++t) {
        FairChain c = induce_chain(testing::random_machine(rng, 1 + t % 10));
        Bits x = testing::random_bits(rng, 500);
        auto trace = run_trace(c.automaton, x, std::vector<std::uint64_t>{500});
        auto pn = trace.snapshots[0].joint();
        double log_capital = run_martingale(witness_martingale(c, pn), x).final();
        CHECK(std::abs(log_capital - 500.0 * (1.0 - conditional_entropy(pn))) <= 1e-6 * 500.0);
    }
}

TEST_CASE("multi-account runs") {
    Bits zeros = generate(BitSource::zeros(), 40);
    Machine half = uniform_bettor(block_machine(0), 0.5);
    Machine all_in = uniform_bettor(block_machine(0), 1.0);

    auto single = multi_account_run(std::vector<Machine>{all_in}, zeros);
    CHECK(single.accounts[0].log2_capital == run_martingale(all_in, zeros).log2_capital);

    auto pair = multi_account_run(std::vector<Machine>{half, all_in}, zeros);
    CHECK(pair.best_index == 1);
    for (std::size_t n = 0; n <= zeros.size(); ++n) {
        CHECK(pair.best.log2_capital[n] == std::max(double(n) - 1.0, -1.0));
        CHECK(pair.total.log2_capital[n] >= pair.best.log2_capital[n]);
    }
    CHECK(pair.best.final() == 39.0);

    // witnesses from two clusters of a sequence that changes character halfway
    Bits x = generate(BitSource::periodic("0001"), 4000);
    Bits tail = generate(BitSource::periodic("0111"), 4000);
    x.insert(x.end(), tail.begin(), tail.end());
    FairChain c = induce_chain(block_machine(1));
    auto tr = run_trace(c.automaton, x, std::vector<std::uint64_t>{4000, 8000});
    std::vector<Machine> accounts{witness_martingale(c, tr.snapshots[0].joint()),
                                  witness_martingale(c, tr.snapshots[1].joint())};
    auto multi = multi_account_run(accounts, x);
    for (std::size_t i = 0; i < accounts.size(); ++i) {
        auto solo = run_martingale(accounts[i], x);
        for (std::size_t n = 0; n < solo.log2_capital.size(); ++n) {
            CHECK(multi.best.log2_capital[n] >= multi.accounts[i].log2_capital[n]);
            CHECK(multi.best.log2_capital[n] >= solo.log2_capital[n] - 1.0 - 1e-9);
        }
    }
    CHECK_THROWS_AS(multi_account_run(std::vector<Machine>{}, x), Error);
}

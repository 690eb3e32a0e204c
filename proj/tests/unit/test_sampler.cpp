#include <doctest.h>

#include <map>

#include "letsip/errors.hpp"
#include "letsip/learner.hpp"
#include "letsip/sampler.hpp"
#include "oracles.hpp"

using namespace letsip;

namespace {

const WeightFunction kConstant = [](const Itemset&, const Bitset&) { return 1.0; };

LogisticModel random_model(const TransactionDB& db, double a, std::uint64_t seed) {
    const FeatureSchema schema(FeatureKind::ILF, db);
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.5);
    std::vector<double> w(schema.dimension());
    for (double& x : w) x = normal(gen);
    return LogisticModel(schema, w, a);
}

std::map<Itemset, double> exact_target(const PatternSpace& space, const WeightFunction& w) {
    std::map<Itemset, double> out;
    double total = 0;
    for (std::size_t i = 0; i < space.size(); ++i) total += w(space.pattern(i).items, space.cover(i));
    for (std::size_t i = 0; i < space.size(); ++i) {
        out[space.pattern(i).items] = w(space.pattern(i).items, space.cover(i)) / total;
    }
    return out;
}

std::map<Itemset, double> empirical(const std::vector<Pattern>& draws) {
    std::map<Itemset, double> out;
    for (const Pattern& p : draws) out[p.items] += 1.0 / static_cast<double>(draws.size());
    return out;
}

Cell fixed_cell(std::initializer_list<double> weights) {
    Cell c;
    Item i = 1;
    for (double w : weights) {
        c.patterns.push_back({Itemset{i++}, 1});
        c.weights.push_back(w);
    }
    return c;
}

}  // namespace

TEST_CASE("pivot and xor count arithmetic") {
    CHECK(cell_pivot(0.9) == 18);
    CHECK(xor_count_for(100.0, 0.9) == 3);
    CHECK(xor_count_for(18.0, 0.9) == 0);
    CHECK(xor_count_for(5.0, 0.9) == 0);
    CHECK(xor_count_for(36.0, 0.9) == 1);
    CHECK(xor_count_for(36.5, 0.9) == 2);
}

TEST_CASE("strategy and mode tokens") {
    CHECK(CellStrategy::parse("random") == CellStrategy::random());
    CHECK(CellStrategy::parse("top3") == CellStrategy::top(3));
    CHECK(CellStrategy::top(2).to_string() == "top2");
    CHECK_THROWS_AS(CellStrategy::parse("top0"), ConfigError);
    CHECK_THROWS_AS(CellStrategy::parse("best"), ConfigError);
    CHECK(parse_sampling_mode("hashed") == SamplingMode::Hashed);
    CHECK_THROWS_AS(parse_sampling_mode("mcmc"), ConfigError);
}

TEST_CASE("config validation") {
    SamplerConfig c;
    c.kappa = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.range_a = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.strategy = CellStrategy::top(0);
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("Top(1) picks the argmax and is repeatable") {
    const Cell c = fixed_cell({0.9, 0.3, 0.6});
    CHECK(top_patterns(c, 1)[0].items == Itemset{1});
    const auto two = top_patterns(c, 2);
    CHECK(two[0].items == Itemset{1});
    CHECK(two[1].items == Itemset{3});
    CHECK(top_patterns(c, 2) == two);
    CHECK(top_patterns(fixed_cell({0.5, 0.5}), 1)[0].items == Itemset{1});
}

TEST_CASE("perfect sampling from a cell") {
    Rng rng(1);
    CHECK(perfect_sample_from_cell(fixed_cell({0.7}), rng).items == Itemset{1});

    const Cell even = fixed_cell({0.5, 0.5});
    std::size_t first = 0;
    for (int i = 0; i < 10000; ++i) first += perfect_sample_from_cell(even, rng).items == Itemset{1} ? 1 : 0;
    CHECK(std::abs(static_cast<double>(first) / 10000 - 0.5) <= 0.02);

    const Cell skew = fixed_cell({0.75, 0.25});
    first = 0;
    for (int i = 0; i < 10000; ++i) first += perfect_sample_from_cell(skew, rng).items == Itemset{1} ? 1 : 0;
    const double sd = std::sqrt(10000 * 0.75 * 0.25);
    CHECK(std::abs(static_cast<double>(first) - 7500.0) <= 2.576 * sd);

    Cell truncated = fixed_cell({0.5});
    truncated.truncated = true;
    CHECK_THROWS_AS(perfect_sample_from_cell(truncated, rng), ContractError);
    CHECK_THROWS_AS(perfect_sample_from_cell(Cell{}, rng), ContractError);
}

TEST_CASE("constant weights in Exact mode are uniform over 8 patterns") {
    const TransactionDB db("t", std::vector<std::vector<Item>>(6, {1, 2, 3}));
    SamplerConfig cfg;
    cfg.strategy = CellStrategy::random();
    const PatternSampler sampler(db, 1, cfg);
    REQUIRE(sampler.space().size() == 8);
    Rng rng(7);
    const auto draws = sampler.sample_batch(kConstant, 80000, rng);
    const auto freq = empirical(draws);
    REQUIRE(freq.size() == 8);
    for (const auto& [p, f] : freq) CHECK(std::abs(f - 0.125) <= 0.02);
}

TEST_CASE("Exact-mode Random sampling matches the normalized weights") {
    const auto toy = oracle::random_db(31, 9, 40, 0.5);
    const TransactionDB db = toy.db();
    SamplerConfig cfg;
    cfg.strategy = CellStrategy::random();
    const PatternSampler sampler(db, 3, cfg);
    const WeightFunction w = random_model(db, cfg.range_a, 3).weight_function(db);
    Rng rng(17);
    const auto draws = sampler.sample_batch(w, 100000, rng);
    for (const Pattern& p : draws) REQUIRE(p.support >= 3);
    CHECK(oracle::total_variation(empirical(draws), exact_target(sampler.space(), w)) <= 0.02);
}

TEST_CASE("Hashed-mode Random sampling is close to the exact target") {
    const auto toy = oracle::random_db(32, 9, 40, 0.5);
    const TransactionDB db = toy.db();
    SamplerConfig cfg;
    cfg.strategy = CellStrategy::random();
    cfg.mode = SamplingMode::Hashed;
    const PatternSampler hashed(db, 3, cfg);
    const auto space = PatternSpace::build(db, 3);
    REQUIRE(space->size() > 100);  // forces XORs
    const WeightFunction w = random_model(db, cfg.range_a, 4).weight_function(db);
    Rng rng(18);
    const auto draws = hashed.sample_batch(w, 100000, rng);
    for (const Pattern& p : draws) REQUIRE(p.support >= 3);
    CHECK(oracle::total_variation(empirical(draws), exact_target(*space, w)) <= 0.05);
}

TEST_CASE("xor count estimate tracks the total weight") {
    const auto toy = oracle::random_db(33, 10, 40, 0.5);
    const TransactionDB db = toy.db();
    SamplerConfig cfg;
    const PatternSampler exact(db, 2, cfg);
    Rng rng(2);
    const double total = static_cast<double>(exact.space().size());
    CHECK(exact.estimate_total_weight(kConstant, rng) == total);
    const std::size_t m = exact.estimate_xor_count(kConstant, rng);
    CHECK(m == xor_count_for(total, cfg.kappa));
    const double cells = std::ldexp(1.0, static_cast<int>(m));
    CHECK(cells <= 2.0 * 18 * total);
    CHECK(cells * 2.0 * 18 >= total);

    cfg.mode = SamplingMode::Hashed;
    const PatternSampler hashed(db, 2, cfg);
    const double estimate = hashed.estimate_total_weight(kConstant, rng);
    CHECK(estimate >= total / 4);
    CHECK(estimate <= total * 4);
}

TEST_CASE("draw_cell with m = 0 is the whole space") {
    const TransactionDB small("t", std::vector<std::vector<Item>>(3, {1, 2, 3, 4}));  // 16 patterns
    for (SamplingMode mode : {SamplingMode::Exact, SamplingMode::Hashed}) {
        SamplerConfig cfg;
        cfg.mode = mode;
        const PatternSampler s(small, 1, cfg);
        Rng rng(3);
        const CellDraw d = s.draw_cell(kConstant, 0, rng);
        CHECK(d.cell.size() == 16);
        CHECK(d.accepted);  // 16 lies in [18/1.9, 18*1.9]
    }
    const TransactionDB big("t", std::vector<std::vector<Item>>(3, {1, 2, 3, 4, 5, 6}));  // 64 patterns
    const PatternSampler s(big, 1, SamplerConfig{});
    Rng rng(3);
    CHECK_FALSE(s.draw_cell(kConstant, 0, rng).accepted);
}

TEST_CASE("weights outside (A, 1] are contract errors") {
    const TransactionDB db("t", {{1, 2}, {1}});
    const PatternSampler s(db, 1, SamplerConfig{});
    Rng rng(1);
    const WeightFunction too_low = [](const Itemset&, const Bitset&) { return 0.5; };
    const WeightFunction too_high = [](const Itemset&, const Bitset&) { return 1.5; };
    CHECK_THROWS_AS(s.sample_batch(too_low, 1, rng), ContractError);
    CHECK_THROWS_AS(s.sample_batch(too_high, 1, rng), ContractError);
}

TEST_CASE("empty frequent set is a domain error") {
    const TransactionDB db("t", {{1}, {2}});
    for (SamplingMode mode : {SamplingMode::Exact, SamplingMode::Hashed}) {
        SamplerConfig cfg;
        cfg.mode = mode;
        const PatternSampler s(db, 3, cfg);
        Rng rng(1);
        CHECK_THROWS_AS(s.sample_batch(kConstant, 1, rng), DomainError);
    }
}

TEST_CASE("retry budget exhaustion is reported") {
    const auto toy = oracle::random_db(40, 10, 40, 0.5);
    const TransactionDB db = toy.db();
    SamplerConfig cfg;
    cfg.max_retries = 1;
    const PatternSampler s(db, 2, cfg);
    Rng rng(5);
    SamplingRound round = s.begin_round(kConstant, rng);
    REQUIRE(round.xor_count() > 0);
    bool exhausted = false;
    for (int i = 0; i < 500 && !exhausted; ++i) {
        try {
            round.draw(rng);
        } catch (const SamplerExhausted&) {
            exhausted = true;
        }
    }
    CHECK(exhausted);
}

TEST_CASE("Top(m) draws contribute m patterns per cell") {
    const auto toy = oracle::random_db(41, 10, 40, 0.5);
    const TransactionDB db = toy.db();
    for (SamplingMode mode : {SamplingMode::Exact, SamplingMode::Hashed}) {
        SamplerConfig cfg;
        cfg.mode = mode;
        cfg.strategy = CellStrategy::top(3);
        const PatternSampler s(db, 2, cfg);
        const WeightFunction w = random_model(db, cfg.range_a, 9).weight_function(db);
        Rng rng(6);
        SamplingRound round = s.begin_round(w, rng);
        for (int i = 0; i < 20; ++i) {
            const auto got = round.draw(rng);
            REQUIRE(got.size() <= 3);
            REQUIRE_FALSE(got.empty());
            for (std::size_t j = 1; j < got.size(); ++j) {
                REQUIRE(w(got[j - 1].items, cover(db, got[j - 1].items)) >= w(got[j].items, cover(db, got[j].items)));
            }
        }
        CHECK(s.sample_batch(w, 7, rng).size() == 7);
    }
}

TEST_CASE("same seed, same samples") {
    const auto toy = oracle::random_db(42, 10, 40, 0.5);
    const TransactionDB db = toy.db();
    for (SamplingMode mode : {SamplingMode::Exact, SamplingMode::Hashed}) {
        SamplerConfig cfg;
        cfg.mode = mode;
        const PatternSampler s(db, 2, cfg);
        Rng a(77), b(77);
        CHECK(s.sample_batch(kConstant, 30, a) == s.sample_batch(kConstant, 30, b));
    }
}

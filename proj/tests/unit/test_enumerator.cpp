#include <doctest.h>

#include <set>

#include "letsip/enumerator.hpp"
#include "letsip/errors.hpp"
#include "letsip/rng.hpp"
#include "letsip/xor_system.hpp"
#include "oracles.hpp"

using namespace letsip;

namespace {

std::vector<Itemset> sorted_items(const Cell& c) {
    std::vector<Itemset> v;
    for (const Pattern& p : c.patterns) v.push_back(p.items);
    std::sort(v.begin(), v.end());
    return v;
}

std::vector<bool> coefficient_bits(const XorConstraint& c, std::size_t m) {
    std::vector<bool> v(m);
    for (std::size_t i = 0; i < m; ++i) v[i] = c.coefficients.test(i);
    return v;
}

bool naive_satisfies(const XorSystem& xs, const Itemset& p) {
    for (const XorConstraint& c : xs.constraints()) {
        if (!oracle::parity_holds(coefficient_bits(c, xs.item_count()), c.parity, p)) return false;
    }
    return true;
}

XorConstraint make_xor(std::size_t m, std::initializer_list<Item> items, bool parity) {
    XorConstraint c{Bitset(m), parity};
    for (Item i : items) c.coefficients.set(i - 1);
    return c;
}

}  // namespace

TEST_CASE("xor_satisfies small cases") {
    const XorSystem xs({make_xor(3, {1, 2, 3}, false)}, 3);
    CHECK(xor_satisfies(xs, Itemset{1, 3}));
    CHECK_FALSE(xor_satisfies(xs, Itemset{1}));
    const XorSystem none;
    CHECK(xor_satisfies(none, Itemset{1, 2}));
    CHECK(xor_satisfies(none, Itemset{}));
}

TEST_CASE("unconstrained enumeration matches brute force") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto toy = oracle::random_db(seed, 6 + seed % 6, 20 + seed);
        const TransactionDB db = toy.db();
        for (std::size_t theta : {1, 2, 4, 7}) {
            const Cell c = enumerate_frequent(db, static_cast<Support>(theta));
            REQUIRE(sorted_items(c) == oracle::all_frequent(toy, theta));
            for (const Pattern& p : c.patterns) REQUIRE(p.support == oracle::naive_support(toy, p.items));
        }
    }
}

TEST_CASE("empty itemset is a pattern and theta above N gives nothing") {
    const TransactionDB db("t", {{1, 2}, {2}});
    const Cell all = enumerate_frequent(db, 2);
    CHECK(sorted_items(all) == std::vector<Itemset>{Itemset{}, Itemset{2}});
    CHECK(enumerate_frequent(db, 3).empty());
    CHECK_THROWS_AS(enumerate_frequent(db, 0), ContractError);
}

TEST_CASE("XOR cells equal filtered enumeration on 50 random systems") {
    Rng rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t m_items = 6 + static_cast<std::size_t>(trial % 7);  // up to 12
        const auto toy = oracle::random_db(100 + static_cast<std::uint64_t>(trial), m_items, 24);
        const TransactionDB db = toy.db();
        const std::size_t theta = 1 + static_cast<std::size_t>(trial % 4);
        const std::size_t m = static_cast<std::size_t>(trial % 6);
        const XorSystem xs = draw_random_xors(m, m_items, rng);

        std::vector<Itemset> expected;
        for (const Itemset& p : oracle::all_frequent(toy, theta)) {
            if (naive_satisfies(xs, p)) expected.push_back(p);
        }
        EnumerationOptions opts;
        opts.xors = &xs;
        EnumerationStats constrained, plain;
        const Cell c = enumerate_frequent(db, static_cast<Support>(theta), opts, &constrained);
        REQUIRE(sorted_items(c) == expected);
        enumerate_frequent(db, static_cast<Support>(theta), {}, &plain);
        CHECK(constrained.nodes <= plain.nodes);

        // the materialized space carves out the same cell
        const auto space = PatternSpace::build(db, static_cast<Support>(theta));
        std::vector<Itemset> carved;
        for (std::size_t i : space->cell_indices(xs)) carved.push_back(space->pattern(i).items);
        std::sort(carved.begin(), carved.end());
        REQUIRE(carved == expected);
    }
}

TEST_CASE("parity cells partition the frequent set") {
    Rng rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        const auto toy = oracle::random_db(500 + static_cast<std::uint64_t>(trial), 10, 30);
        const TransactionDB db = toy.db();
        const std::size_t m = 1 + static_cast<std::size_t>(trial % 4);
        const XorSystem base = draw_random_xors(m, 10, rng);
        std::multiset<Itemset> seen;
        for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << m); ++bits) {
            const XorSystem cell_xors = base.with_parities(bits);
            EnumerationOptions opts;
            opts.xors = &cell_xors;
            for (const Pattern& p : enumerate_frequent(db, 2, opts).patterns) seen.insert(p.items);
        }
        const auto all = oracle::all_frequent(toy, 2);
        REQUIRE(seen.size() == all.size());
        REQUIRE(std::vector<Itemset>(seen.begin(), seen.end()) == all);
    }
}

TEST_CASE("reduced system is equivalent to the original constraints") {
    Rng rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t m_items = 8;
        const std::size_t m = 1 + static_cast<std::size_t>(trial % 10);
        const XorSystem xs = draw_random_xors(m, m_items, rng);
        CHECK(xs.rank() <= std::min(m, m_items));
        for (std::uint32_t mask = 0; mask < (1U << m_items); ++mask) {
            const Itemset p = oracle::from_mask(mask);
            bool reduced_ok = xs.consistent();
            for (const ReducedRow& r : xs.reduced().rows) {
                std::vector<bool> coeffs(m_items);
                for (std::size_t i = 0; i < m_items; ++i) coeffs[i] = r.coefficients.test(i);
                reduced_ok = reduced_ok && oracle::parity_holds(coeffs, r.parity, p);
            }
            REQUIRE(reduced_ok == naive_satisfies(xs, p));
            REQUIRE(xor_satisfies(xs, p) == naive_satisfies(xs, p));
        }
    }
}

TEST_CASE("more XORs than items: rank bounded, inconsistent cells are empty") {
    Rng rng(11);
    const auto toy = oracle::random_db(3, 6, 20);
    const TransactionDB db = toy.db();
    int inconsistent = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const XorSystem xs = draw_random_xors(6 + 5, 6, rng);
        CHECK(xs.rank() <= 6);
        if (!xs.consistent()) {
            ++inconsistent;
            EnumerationOptions opts;
            opts.xors = &xs;
            CHECK(enumerate_frequent(db, 1, opts).empty());
        }
    }
    CHECK(inconsistent > 0);
}

TEST_CASE("XOR coefficient and parity bits are fair coins") {
    // two-sided binomial test at 1%: |count - n/2| <= 2.576 * sqrt(n)/2
    Rng rng(99);
    const std::size_t draws = 10000, items = 8;
    std::vector<std::size_t> ones(items + 1, 0);
    for (std::size_t d = 0; d < draws; ++d) {
        const XorSystem xs = draw_random_xors(1, items, rng);
        const XorConstraint& c = xs.constraints()[0];
        for (std::size_t i = 0; i < items; ++i) ones[i] += c.coefficients.test(i) ? 1 : 0;
        ones[items] += c.parity ? 1 : 0;
    }
    const double bound = 2.576 * std::sqrt(static_cast<double>(draws)) / 2.0;
    for (std::size_t count : ones) CHECK(std::abs(static_cast<double>(count) - draws / 2.0) <= bound);
}

TEST_CASE("m = 0 leaves everything satisfied") {
    Rng rng(1);
    const XorSystem xs = draw_random_xors(0, 5, rng);
    CHECK(xs.empty());
    CHECK(xor_satisfies(xs, Itemset{1, 2, 3}));
}

TEST_CASE("cap truncates and reports") {
    const auto toy = oracle::random_db(8, 8, 20);
    const TransactionDB db = toy.db();
    const std::size_t total = enumerate_frequent(db, 1).size();
    EnumerationOptions opts;
    opts.cap = 5;
    const Cell c = enumerate_frequent(db, 1, opts);
    CHECK(c.truncated);
    CHECK(c.size() == 5);
    opts.cap = total;
    CHECK_FALSE(enumerate_frequent(db, 1, opts).truncated);
}

TEST_CASE("weights are attached in enumeration order") {
    const auto toy = oracle::random_db(4, 6, 15);
    const TransactionDB db = toy.db();
    const WeightFunction w = [](const Itemset& p, const Bitset&) { return 1.0 / (1.0 + static_cast<double>(p.size())); };
    EnumerationOptions opts;
    opts.weight_fn = &w;
    const Cell c = enumerate_frequent(db, 2, opts);
    REQUIRE(c.weights.size() == c.size());
    double total = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        CHECK(c.weights[i] == w(c.patterns[i].items, Bitset()));
        total += c.weights[i];
    }
    CHECK(c.total_weight() == doctest::Approx(total));
}

TEST_CASE("enumeration order is deterministic") {
    const auto toy = oracle::random_db(12, 9, 25);
    const TransactionDB db = toy.db();
    CHECK(enumerate_frequent(db, 3).patterns == enumerate_frequent(db, 3).patterns);
}

TEST_CASE("visitor can stop early") {
    const auto toy = oracle::random_db(12, 9, 25);
    const TransactionDB db = toy.db();
    std::size_t seen = 0;
    for_each_frequent(db, 1, nullptr, [&](const Itemset&, const Bitset&) { return ++seen < 3; });
    CHECK(seen == 3);
}

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "letsip/bitset.hpp"
#include "letsip/data.hpp"
#include "letsip/xor_system.hpp"

namespace letsip {

/// Sampling weight of a pattern, given its cover.
using WeightFunction = std::function<double(const Itemset&, const Bitset& cover)>;

struct Pattern {
    Itemset items;
    Support support = 0;

    friend bool operator==(const Pattern& a, const Pattern& b) { return a.items == b.items; }
};

/// Patterns satisfying the frequency constraint and one set of XORs.
struct Cell {
    std::vector<Pattern> patterns;
    std::vector<double> weights;  // aligned with patterns; empty when no weight function was given
    bool truncated = false;       // enumeration stopped at the cap

    bool empty() const noexcept { return patterns.empty(); }
    std::size_t size() const noexcept { return patterns.size(); }
    double total_weight() const noexcept;
};

struct EnumerationOptions {
    const XorSystem* xors = nullptr;
    const WeightFunction* weight_fn = nullptr;
    std::optional<std::size_t> cap;
};

struct EnumerationStats {
    std::uint64_t nodes = 0;     // search nodes expanded
    std::uint64_t patterns = 0;  // patterns reported
};

/// Called for each pattern in depth-first discovery order. Return false to stop.
using PatternVisitor = std::function<bool(const Itemset&, const Bitset& cover)>;

/// Depth-first enumeration of {p : support(p) >= theta} restricted to the XOR
/// cell, if any. Items are branched in descending-support order and XORs are
/// propagated as they become fully decided.
EnumerationStats for_each_frequent(const TransactionDB& db, Support theta, const XorSystem* xors,
                                   const PatternVisitor& visit);

Cell enumerate_frequent(const TransactionDB& db, Support theta, const EnumerationOptions& options = {},
                        EnumerationStats* stats = nullptr);

/// All frequent patterns at a threshold, materialized once with their covers so
/// weights can be re-evaluated and cells carved out without re-mining.
class PatternSpace {
public:
    static std::shared_ptr<const PatternSpace> build(const TransactionDB& db, Support theta);

    Support theta() const noexcept { return theta_; }
    std::size_t size() const noexcept { return patterns_.size(); }
    bool empty() const noexcept { return patterns_.empty(); }

    const Pattern& pattern(std::size_t i) const { return patterns_[i]; }
    const std::vector<Pattern>& patterns() const noexcept { return patterns_; }
    const Bitset& cover(std::size_t i) const { return covers_[i]; }

    /// Indices (in enumeration order) of the patterns satisfying every XOR.
    std::vector<std::size_t> cell_indices(const XorSystem& xors) const;

private:
    Support theta_ = 0;
    std::vector<Pattern> patterns_;
    std::vector<Bitset> covers_;
    std::vector<Bitset> item_bits_;  // pattern membership over columns, for parity checks
};

}  // namespace letsip

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "letsip/data.hpp"
#include "letsip/enumerator.hpp"
#include "letsip/learner.hpp"
#include "letsip/measures.hpp"
#include "letsip/rng.hpp"

namespace letsip {

/// Stands in for a human by ranking queries with a hidden measure phi.
class EmulatedUser {
public:
    EmulatedUser(const QualityMeasure& phi, const TransactionDB& db) : phi_(phi), db_(db) {}

    /// Descending phi; ties broken by the lexicographically smaller itemset.
    RankedFeedback order_query(std::span<const Itemset> query) const;

    const QualityMeasure& measure() const noexcept { return phi_; }

private:
    const QualityMeasure& phi_;
    const TransactionDB& db_;
};

/// An itemset is liked when strictly more than half of its items are
/// interesting. The empty itemset is never liked.
bool is_liked(const Itemset& p, const std::vector<bool>& interesting);

struct InterestingItems {
    std::vector<Item> items;         // in the order they were added
    std::vector<bool> mask;          // index = item id
    double liked_fraction = 0.0;
};

/// Walks frequent patterns by descending phi (ties lexicographic), adding
/// their items one at a time until at least 15% of all frequent patterns are liked.
InterestingItems select_interesting_items(const TransactionDB& db, const QualityMeasure& phi,
                                          const PatternSpace& space, double target_fraction = 0.15);

struct IpmParams {
    std::size_t rounds = 30;
    std::size_t batch = 10;
    double b = 1.75;
};

struct IpmRun {
    std::vector<std::vector<Itemset>> batches;  // one per completed round, in draw order
    bool overflowed = false;
    std::optional<std::size_t> overflow_round;  // 1-based
    std::string overflow_detail;
};

/// IPM baseline with exact sampling over the materialized space:
/// P(p) proportional to prod_{i in p} weight_i. Liked samples multiply their
/// items' weights by b, disliked ones divide by b. Overflow ends the run and is
/// reported in the result.
IpmRun ipm_run(const TransactionDB& db, const PatternSpace& space, const std::vector<bool>& interesting,
               const IpmParams& params, Rng& rng);

}  // namespace letsip

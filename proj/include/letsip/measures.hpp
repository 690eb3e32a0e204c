#pragma once

#include <string_view>
#include <unordered_map>
#include <vector>

#include "letsip/data.hpp"

namespace letsip {

enum class MeasureKind { Freq, Surp, Chi2 };

MeasureKind parse_measure(std::string_view token);
std::string_view to_string(MeasureKind kind);

/// Target quality measure phi. Construction caches the per-item relative
/// frequencies and class sizes; evaluation is then pure.
class QualityMeasure {
public:
    QualityMeasure(MeasureKind kind, const TransactionDB& db);

    MeasureKind kind() const noexcept { return kind_; }

    double eval(const TransactionDB& db, const Itemset& p) const;
    /// Same as eval when the cover of p is already at hand.
    double eval(const TransactionDB& db, const Itemset& p, const Bitset& cover) const;

private:
    MeasureKind kind_;
    std::vector<double> item_freq_;  // index = item id
    double negatives_ = 0;
    double positives_ = 0;
};

/// Pearson chi-squared statistic of the 2x2 table {occurs, not} x {-, +}.
/// Zero when any marginal is empty.
double chi_squared(Support sup_neg, Support sup_pos, Support n_neg, Support n_pos);

/// Memoizes phi by itemset. Not thread-safe; keep one per evaluation thread.
class MeasureCache {
public:
    MeasureCache(const QualityMeasure& measure, const TransactionDB& db) : measure_(measure), db_(db) {}

    double operator()(const Itemset& p);
    std::size_t size() const noexcept { return memo_.size(); }

private:
    const QualityMeasure& measure_;
    const TransactionDB& db_;
    std::unordered_map<Itemset, double, ItemsetHash> memo_;
};

}  // namespace letsip

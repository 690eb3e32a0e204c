#include "letsip/measures.hpp"

#include <algorithm>
#include <string>

#include "letsip/errors.hpp"

namespace letsip {

MeasureKind parse_measure(std::string_view token) {
    if (token == "freq") return MeasureKind::Freq;
    if (token == "surp") return MeasureKind::Surp;
    if (token == "chi2") return MeasureKind::Chi2;
    throw DomainError("unknown quality measure '" + std::string(token) + "' (freq|surp|chi2)");
}

std::string_view to_string(MeasureKind kind) {
    switch (kind) {
        case MeasureKind::Freq: return "freq";
        case MeasureKind::Surp: return "surp";
        case MeasureKind::Chi2: return "chi2";
    }
    return "?";
}

QualityMeasure::QualityMeasure(MeasureKind kind, const TransactionDB& db) : kind_(kind) {
    const double n = static_cast<double>(db.transaction_count());
    if (kind == MeasureKind::Surp) {
        item_freq_.assign(db.item_count() + 1, 0.0);
        for (Item i = 1; i <= db.item_count(); ++i) item_freq_[i] = db.item_support(i) / n;
    }
    if (kind == MeasureKind::Chi2) {
        const auto [neg, pos] = db.class_sizes();  // throws StateError when unlabelled
        negatives_ = neg;
        positives_ = pos;
    }
}

double chi_squared(Support sup_neg, Support sup_pos, Support n_neg, Support n_pos) {
    const double a = sup_pos;
    const double b = sup_neg;
    const double c = static_cast<double>(n_pos) - a;
    const double d = static_cast<double>(n_neg) - b;
    const double n = a + b + c + d;
    const double denom = (a + b) * (c + d) * (a + c) * (b + d);
    if (denom == 0.0) return 0.0;
    const double diff = a * d - b * c;
    return n * diff * diff / denom;
}

double QualityMeasure::eval(const TransactionDB& db, const Itemset& p) const {
    return eval(db, p, cover(db, p));
}

double QualityMeasure::eval(const TransactionDB& db, const Itemset& p, const Bitset& c) const {
    const double n = static_cast<double>(db.transaction_count());
    switch (kind_) {
        case MeasureKind::Freq:
            return static_cast<double>(c.count()) / n;
        case MeasureKind::Surp: {
            double expected = 1.0;
            for (Item i : p) {
                if (i == 0 || i >= item_freq_.size()) throw DomainError("unknown item id " + std::to_string(i));
                expected *= item_freq_[i];
            }
            return std::max(static_cast<double>(c.count()) / n - expected, 0.0);
        }
        case MeasureKind::Chi2: {
            const auto [neg, pos] = class_supports(db, c);
            return chi_squared(neg, pos, static_cast<Support>(negatives_), static_cast<Support>(positives_));
        }
    }
    return 0.0;
}

double MeasureCache::operator()(const Itemset& p) {
    if (auto it = memo_.find(p); it != memo_.end()) return it->second;
    const double v = measure_.eval(db_, p);
    memo_.emplace(p, v);
    return v;
}

}  // namespace letsip

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "letsip/data.hpp"
#include "letsip/enumerator.hpp"
#include "letsip/rng.hpp"

namespace letsip {

enum class FeatureKind { I, ILF, ILFT };

FeatureKind parse_feature_kind(std::string_view token);
std::string_view to_string(FeatureKind kind);

/// Layout of a pattern feature vector:
///   [Items (M) | Length | Frequency | Transactions (N)]
/// truncated after Items for I and after Frequency for ILF.
class FeatureSchema {
public:
    FeatureSchema(FeatureKind kind, std::size_t item_count, std::size_t transaction_count);
    FeatureSchema(FeatureKind kind, const TransactionDB& db)
        : FeatureSchema(kind, db.item_count(), db.transaction_count()) {}

    FeatureKind kind() const noexcept { return kind_; }
    std::size_t item_count() const noexcept { return items_; }
    std::size_t transaction_count() const noexcept { return transactions_; }
    std::size_t dimension() const noexcept;

    bool has_length_frequency() const noexcept { return kind_ != FeatureKind::I; }
    bool has_transactions() const noexcept { return kind_ == FeatureKind::ILFT; }
    std::size_t length_index() const noexcept { return items_; }
    std::size_t frequency_index() const noexcept { return items_ + 1; }
    std::size_t transaction_offset() const noexcept { return items_ + 2; }

    /// Human-readable name of feature j, e.g. "item:42", "length", "transaction:7".
    std::string feature_name(std::size_t j, const TransactionDB* db = nullptr) const;

    friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;

private:
    FeatureKind kind_;
    std::size_t items_;
    std::size_t transactions_;
};

std::vector<double> featurize(const FeatureSchema& schema, const TransactionDB& db, const Itemset& p);
std::vector<double> featurize(const FeatureSchema& schema, const TransactionDB& db, const Itemset& p,
                              const Bitset& cover);

/// A + (1 - A) / (1 + exp(-score)), kept strictly above A.
double logistic_with_range(double score, double range_a);

/// Feature weights plus the range parameter A of q_logistic.
class LogisticModel {
public:
    LogisticModel(FeatureSchema schema, double range_a);
    LogisticModel(FeatureSchema schema, std::vector<double> weights, double range_a);

    const FeatureSchema& schema() const noexcept { return schema_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    double range_a() const noexcept { return range_a_; }

    /// w . x for a dense feature vector.
    double score(std::span<const double> features) const;
    /// w . x computed from the pattern directly, without a dense vector.
    double score(const TransactionDB& db, const Itemset& p, const Bitset& cover) const;
    double q(std::span<const double> features) const;
    double q(const TransactionDB& db, const Itemset& p, const Bitset& cover) const;

    /// q_logistic as a sampling weight function bound to db.
    WeightFunction weight_function(const TransactionDB& db) const;

    friend bool operator==(const LogisticModel&, const LogisticModel&) = default;

private:
    FeatureSchema schema_;
    std::vector<double> weights_;
    double range_a_;
};

double q_logistic(const LogisticModel& model, std::span<const double> features);

/// A user-supplied total order, most interesting first.
struct RankedFeedback {
    std::vector<Itemset> order;

    /// Throws ValidationError on duplicates.
    void validate() const;
};

/// Feature difference for a preference better > worse; implicitly labelled +.
struct PairExample {
    std::vector<double> difference;
};

/// All r(r-1)/2 ordered pairs of every ranking, higher-ranked minus lower-ranked.
std::vector<PairExample> pairs_from_feedback(std::span<const RankedFeedback> feedback, const FeatureSchema& schema,
                                             const TransactionDB& db);

struct LossAndGradient {
    double loss = 0.0;              // smooth part, (1/n) sum log(1 + exp(-w . d))
    std::vector<double> gradient;  // of the smooth part
};

LossAndGradient loss_and_gradient(std::span<const double> weights, std::span<const PairExample> pairs,
                                  double lambda);
/// Smooth loss plus lambda * ||w||_1.
double regularized_loss(std::span<const double> weights, std::span<const PairExample> pairs, double lambda);

struct ScdResult {
    std::vector<double> weights;
    double initial_loss = 0.0;  // regularized
    double final_loss = 0.0;
    std::size_t updates = 0;
};

/// T stochastic coordinate descent steps on L1-regularized logistic loss over
/// the pair difference vectors.
ScdResult scd_train(std::span<const PairExample> pairs, std::size_t dimension, double lambda, std::size_t updates,
                    Rng& rng, const std::optional<std::vector<double>>& warm_start = std::nullopt);

// Model serialization: JSON with schema kind, item/transaction counts,
// dimension, range_a and the dense weight vector.
std::string model_to_json(const LogisticModel& model);
LogisticModel model_from_json(const std::string& text);
void save_model(const LogisticModel& model, const std::filesystem::path& path);
LogisticModel load_model(const std::filesystem::path& path);

}  // namespace letsip

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "letsip/data.hpp"
#include "letsip/enumerator.hpp"
#include "letsip/learner.hpp"
#include "letsip/rng.hpp"
#include "letsip/sampler.hpp"

namespace letsip {

struct SessionParams {
    std::size_t k = 5;                               // query size
    std::size_t l = 1;                               // query retention, l < k
    double range_a = 0.5;                            // A
    CellStrategy strategy = CellStrategy::top(1);
    FeatureKind features = FeatureKind::ILFT;
    Support theta = 1;
    double lambda = 0.001;
    std::size_t scd_updates = 1000;                  // T
    double kappa = 0.9;
    std::uint64_t seed = 1;
    SamplingMode mode = SamplingMode::Exact;
    int max_retries = 10;

    void validate() const;
    SamplerConfig sampler_config() const;
};

struct HistoryEntry {
    std::size_t iteration = 0;  // 1-based
    std::vector<Itemset> query;
    RankedFeedback ranking;
    std::vector<double> weights;  // model after learning from this ranking
    double training_loss = 0.0;
};

/// Mine, interact, learn, repeat. One instance holds the accumulated feedback,
/// the current model, and at most one pending query.
class Session {
public:
    /// Fresh session with zero weights. Throws ConfigError when fewer than k
    /// patterns are frequent at theta.
    Session(const TransactionDB& db, SessionParams params, std::shared_ptr<const PatternSpace> space = nullptr);

    const SessionParams& params() const noexcept { return params_; }
    const TransactionDB& db() const noexcept { return db_; }
    std::size_t iteration() const noexcept { return iteration_; }
    const LogisticModel& model() const noexcept { return model_; }
    const std::vector<RankedFeedback>& feedback() const noexcept { return feedback_; }
    std::size_t pair_count() const noexcept { return pairs_.size(); }
    const std::vector<HistoryEntry>& history() const noexcept { return history_; }

    bool has_pending() const noexcept { return pending_.has_value(); }
    const std::vector<Itemset>& pending_query() const;
    /// Number of leading patterns of the pending query carried over from the previous ranking.
    std::size_t retained_count() const noexcept { return retained_; }
    /// Set when the pending query had to accept a duplicate after the redraw budget ran out.
    bool duplicates_accepted() const noexcept { return duplicates_accepted_; }

    /// Top patterns of the previous ranking followed by fresh samples from the
    /// current model. Requires that no query is pending.
    const std::vector<Itemset>& next_query();

    /// Records a total order over the pending query and retrains.
    void submit_feedback(const RankedFeedback& ranking);

    /// A fresh batch from the current model using a caller-provided stream,
    /// leaving the session's own streams untouched.
    std::vector<Pattern> preview_samples(std::size_t n, Rng& rng) const;

    static constexpr std::size_t kMaxRedraws = 100;

private:
    const TransactionDB& db_;
    SessionParams params_;
    FeatureSchema schema_;
    PatternSampler sampler_;
    Rng sample_rng_;
    Rng learn_rng_;

    LogisticModel model_;
    std::vector<RankedFeedback> feedback_;
    std::vector<PairExample> pairs_;
    std::vector<HistoryEntry> history_;
    std::vector<Itemset> previous_ranking_;
    std::optional<std::vector<Itemset>> pending_;
    std::size_t retained_ = 0;
    bool duplicates_accepted_ = false;
    std::size_t iteration_ = 0;
};

}  // namespace letsip

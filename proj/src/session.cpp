#include "letsip/session.hpp"

#include <algorithm>

#include "letsip/errors.hpp"

namespace letsip {

void SessionParams::validate() const {
    if (k < 1) throw ConfigError("query size k must be at least 1");
    if (l >= k) throw ConfigError("query retention l must be smaller than k");
    if (theta < 1) throw ConfigError("theta must be at least 1");
    if (lambda < 0.0) throw ConfigError("lambda must be non-negative");
    sampler_config().validate();
}

SamplerConfig SessionParams::sampler_config() const {
    SamplerConfig c;
    c.kappa = kappa;
    c.range_a = range_a;
    c.strategy = strategy;
    c.mode = mode;
    c.max_retries = max_retries;
    return c;
}

namespace {

SessionParams validated(SessionParams p) {
    p.validate();
    return p;
}

std::size_t count_frequent_up_to(const TransactionDB& db, Support theta, std::size_t cap) {
    EnumerationOptions opts;
    opts.cap = cap;
    Cell c = enumerate_frequent(db, theta, opts);
    return c.size();
}

}  // namespace

Session::Session(const TransactionDB& db, SessionParams params, std::shared_ptr<const PatternSpace> space)
    : db_(db),
      params_(validated(params)),
      schema_(params_.features, db),
      sampler_(db, params_.theta, params_.sampler_config(), std::move(space)),
      sample_rng_(params_.seed),
      learn_rng_(sample_rng_.fork()),
      model_(schema_, params_.range_a) {
    const std::size_t available = params_.mode == SamplingMode::Exact
                                      ? sampler_.space().size()
                                      : count_frequent_up_to(db, params_.theta, params_.k);
    if (available < params_.k) {
        throw ConfigError("only " + std::to_string(available) + " frequent patterns at theta " +
                          std::to_string(params_.theta) + ", need k = " + std::to_string(params_.k));
    }
}

const std::vector<Itemset>& Session::pending_query() const {
    if (!pending_) throw StateError("no pending query");
    return *pending_;
}

const std::vector<Itemset>& Session::next_query() {
    if (pending_) throw StateError("a query is already pending");
    std::vector<Itemset> query;
    const std::size_t keep = std::min(params_.l, previous_ranking_.size());
    query.assign(previous_ranking_.begin(), previous_ranking_.begin() + static_cast<std::ptrdiff_t>(keep));

    duplicates_accepted_ = false;
    SamplingRound round = sampler_.begin_round(model_.weight_function(db_), sample_rng_);
    std::size_t redraws = 0;
    while (query.size() < params_.k) {
        for (Pattern& p : round.draw(sample_rng_)) {
            if (query.size() == params_.k) break;
            const bool dup = std::find(query.begin(), query.end(), p.items) != query.end();
            if (dup && redraws < kMaxRedraws) {
                ++redraws;
                continue;
            }
            if (dup) duplicates_accepted_ = true;
            query.push_back(std::move(p.items));
        }
    }
    retained_ = keep;
    pending_ = std::move(query);
    return *pending_;
}

void Session::submit_feedback(const RankedFeedback& ranking) {
    if (!pending_) throw StateError("no pending query");
    std::vector<Itemset> a = ranking.order;
    std::vector<Itemset> b = *pending_;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw ValidationError("ranking is not a permutation of the pending query");
    if (!duplicates_accepted_) ranking.validate();

    feedback_.push_back(ranking);
    const std::span<const RankedFeedback> latest(&feedback_.back(), 1);
    for (PairExample& e : pairs_from_feedback(latest, schema_, db_)) pairs_.push_back(std::move(e));

    ScdResult fit = scd_train(pairs_, schema_.dimension(), params_.lambda, params_.scd_updates, learn_rng_,
                              model_.weights());
    model_ = LogisticModel(schema_, std::move(fit.weights), params_.range_a);

    ++iteration_;
    history_.push_back({iteration_, *pending_, ranking, model_.weights(), fit.final_loss});
    previous_ranking_ = ranking.order;
    pending_.reset();
    retained_ = 0;
}

std::vector<Pattern> Session::preview_samples(std::size_t n, Rng& rng) const {
    return sampler_.sample_batch(model_.weight_function(db_), n, rng);
}

}  // namespace letsip

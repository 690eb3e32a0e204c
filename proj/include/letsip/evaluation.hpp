#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "letsip/baselines.hpp"
#include "letsip/data.hpp"
#include "letsip/enumerator.hpp"
#include "letsip/measures.hpp"
#include "letsip/session.hpp"

namespace letsip {

/// Sorted phi values of every frequent pattern at theta.
class PercentileIndex {
public:
    PercentileIndex(const TransactionDB& db, const PatternSpace& space, const QualityMeasure& phi);
    explicit PercentileIndex(std::vector<double> values);

    /// Fraction of frequent patterns with phi <= value.
    double rank(double value) const;
    std::size_t size() const noexcept { return sorted_.size(); }
    double max_value() const { return sorted_.back(); }
    double min_value() const { return sorted_.front(); }

private:
    std::vector<double> sorted_;
};

/// Entropy in bits of the k-bit coverage signatures of the transactions.
double joint_entropy(const TransactionDB& db, std::span<const Itemset> patterns);
double joint_entropy(std::span<const Bitset> covers, std::size_t transaction_count);

struct QueryMetrics {
    double avg_pct = 0.0;  // mean percentile rank of the patterns' phi
    double max_pct = 0.0;  // percentile rank of the best pattern
    double hj_norm = 0.0;  // H_J / k
};

QueryMetrics query_metrics(const TransactionDB& db, const QualityMeasure& phi, const PercentileIndex& index,
                           std::span<const Itemset> query);

struct IterationRecord {
    std::size_t iteration = 0;  // 1-based
    QueryMetrics metrics;
    double cum_avg_regret = 0.0;
    double cum_max_regret = 0.0;
    double cum_hj_regret = 0.0;
    double seconds = 0.0;  // wall time of sample + retrain; not part of the CSV
};

struct RegretReport {
    std::string dataset;
    MeasureKind phi = MeasureKind::Freq;
    SessionParams params;
    std::string method = "letsip";
    std::uint64_t seed = 0;
    std::vector<IterationRecord> iterations;
    bool failed = false;
    std::string error;

    double avg_regret() const;
    double max_regret() const;
    double hj_regret() const;
};

struct ExperimentOptions {
    std::size_t iterations = 30;
    std::size_t seeds = 10;
    std::uint64_t base_seed = 1;  // seed s runs with base_seed + s
    unsigned threads = 1;
};

/// Everything shared by all runs on one (dataset, theta, phi).
struct EvaluationContext {
    const TransactionDB& db;
    std::shared_ptr<const PatternSpace> space;
    const QualityMeasure& phi;
    const PercentileIndex& index;
};

/// One emulated-user session per seed; a failing seed is reported, not dropped.
std::vector<RegretReport> run_experiment(const EvaluationContext& ctx, const SessionParams& params,
                                         const ExperimentOptions& options);

/// IPM baseline scored on the last 5 patterns of each 10-pattern group.
std::vector<RegretReport> run_ipm_experiment(const EvaluationContext& ctx, const IpmParams& ipm,
                                             const ExperimentOptions& options, std::size_t scored_tail = 5);

struct RegretSummary {
    std::size_t runs = 0;
    std::size_t failed = 0;
    double avg_mean = 0, avg_sd = 0;
    double max_mean = 0, max_sd = 0;
    double hj_mean = 0, hj_sd = 0;
};

RegretSummary summarize(std::span<const RegretReport> reports);

void write_csv_header(std::ostream& out);
void write_csv_rows(std::ostream& out, std::span<const RegretReport> reports);

/// Named parameter sweeps. "table2" is the full grid; "table2-ofat" varies one
/// factor at a time around the defaults.
std::vector<SessionParams> sweep_preset(const std::string& name, const SessionParams& base);

}  // namespace letsip

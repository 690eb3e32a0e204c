#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "letsip/enumerator.hpp"
#include "letsip/rng.hpp"

namespace letsip {

/// How a pattern is picked once a cell is accepted.
struct CellStrategy {
    enum class Kind { Random, Top };
    Kind kind = Kind::Top;
    std::size_t top_m = 1;

    static CellStrategy random() { return {Kind::Random, 1}; }
    static CellStrategy top(std::size_t m) { return {Kind::Top, m}; }
    /// "random", "top1", "top2", ...
    static CellStrategy parse(std::string_view token);
    std::string to_string() const;

    friend bool operator==(const CellStrategy&, const CellStrategy&) = default;
};

/// Exact: the pattern space is materialized once and cells are carved out of
/// it; Random draws are exact categorical draws. Hashed: cells are enumerated
/// under XOR propagation and the total weight is estimated from random cells.
enum class SamplingMode { Exact, Hashed };

SamplingMode parse_sampling_mode(std::string_view token);
std::string_view to_string(SamplingMode mode);

struct SamplerConfig {
    double kappa = 0.9;
    double range_a = 0.5;
    CellStrategy strategy = CellStrategy::top(1);
    SamplingMode mode = SamplingMode::Exact;
    int max_retries = 10;

    void validate() const;
};

/// ceil(4.03 * (1 + 1/kappa)^2)
std::size_t cell_pivot(double kappa);
/// max(0, ceil(log2(total_weight / pivot)))
std::size_t xor_count_for(double total_weight, double kappa);

struct CellDraw {
    std::size_t xor_count = 0;
    Cell cell;
    bool accepted = false;
};

/// Categorical draw with probability weights[i] / sum(weights).
const Pattern& perfect_sample_from_cell(const Cell& cell, Rng& rng);
/// The m highest-weighted patterns, ties in enumeration order.
std::vector<Pattern> top_patterns(const Cell& cell, std::size_t m);

class PatternSampler;

/// State for one batch: weights evaluated (Exact) or total weight estimated
/// (Hashed) once, then any number of independent cell draws.
class SamplingRound {
public:
    /// One cell draw: a single pattern for Random, up to m for Top(m).
    std::vector<Pattern> draw(Rng& rng);

    std::size_t xor_count() const noexcept { return xor_count_; }
    double total_weight() const noexcept { return total_weight_; }
    /// Cells rejected so far in this round.
    std::size_t rejected_cells() const noexcept { return rejected_; }

private:
    friend class PatternSampler;
    SamplingRound(const PatternSampler& sampler, WeightFunction weight_fn)
        : sampler_(&sampler), weight_fn_(std::move(weight_fn)) {}

    std::vector<Pattern> pick(const Cell& cell, Rng& rng) const;
    const Cell& whole_space();

    const PatternSampler* sampler_;
    WeightFunction weight_fn_;
    std::size_t xor_count_ = 0;
    double total_weight_ = 0.0;
    std::size_t rejected_ = 0;

    // Exact mode
    std::vector<double> weights_;
    std::vector<double> cumulative_;
    // Both modes, built on first use when m = 0
    std::optional<Cell> whole_;
};

/// Weighted constrained sampler of frequent patterns for a black-box weight
/// function with values in (A, 1].
class PatternSampler {
public:
    PatternSampler(const TransactionDB& db, Support theta, SamplerConfig config,
                   std::shared_ptr<const PatternSpace> space = nullptr);

    const SamplerConfig& config() const noexcept { return config_; }
    const TransactionDB& db() const noexcept { return db_; }
    Support theta() const noexcept { return theta_; }
    /// Materialized space; built on first use in Exact mode.
    const PatternSpace& space() const;

    SamplingRound begin_round(const WeightFunction& weight_fn, Rng& rng) const;
    std::vector<Pattern> sample_batch(const WeightFunction& weight_fn, std::size_t n, Rng& rng) const;
    std::size_t estimate_xor_count(const WeightFunction& weight_fn, Rng& rng) const;
    /// Total weight: exact sum (Exact mode) or median-of-5 hashed estimate.
    double estimate_total_weight(const WeightFunction& weight_fn, Rng& rng) const;
    CellDraw draw_cell(const WeightFunction& weight_fn, std::size_t m, Rng& rng) const;

    /// Acceptance band [pivot / (1 + kappa), pivot * (1 + kappa)].
    double band_low() const noexcept;
    double band_high() const noexcept;

    /// Wraps weight_fn with the (A, 1] range check.
    WeightFunction checked(const WeightFunction& weight_fn) const;

private:
    friend class SamplingRound;
    std::size_t cell_cap() const noexcept;
    void check_frequent(const Pattern& p) const;

    const TransactionDB& db_;
    Support theta_;
    SamplerConfig config_;
    mutable std::shared_ptr<const PatternSpace> space_;
};

}  // namespace letsip

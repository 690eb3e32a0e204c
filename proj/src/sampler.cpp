#include "letsip/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "letsip/errors.hpp"

namespace letsip {

CellStrategy CellStrategy::parse(std::string_view token) {
    if (token == "random") return random();
    if (token.size() > 3 && token.substr(0, 3) == "top") {
        std::size_t m = 0;
        for (char c : token.substr(3)) {
            if (c < '0' || c > '9') throw ConfigError("bad cell strategy '" + std::string(token) + "'");
            m = m * 10 + static_cast<std::size_t>(c - '0');
        }
        if (m >= 1) return top(m);
    }
    throw ConfigError("bad cell strategy '" + std::string(token) + "' (random|topN)");
}

std::string CellStrategy::to_string() const {
    return kind == Kind::Random ? std::string("random") : "top" + std::to_string(top_m);
}

SamplingMode parse_sampling_mode(std::string_view token) {
    if (token == "exact") return SamplingMode::Exact;
    if (token == "hashed") return SamplingMode::Hashed;
    throw ConfigError("bad sampling mode '" + std::string(token) + "' (exact|hashed)");
}

std::string_view to_string(SamplingMode mode) { return mode == SamplingMode::Exact ? "exact" : "hashed"; }

void SamplerConfig::validate() const {
    if (!(kappa > 0.0 && kappa < 1.0)) throw ConfigError("kappa must lie in (0, 1)");
    if (!(range_a > 0.0 && range_a < 1.0)) throw ConfigError("range A must lie in (0, 1)");
    if (strategy.kind == CellStrategy::Kind::Top && strategy.top_m < 1) throw ConfigError("Top(m) needs m >= 1");
    if (max_retries < 1) throw ConfigError("max_retries must be positive");
}

std::size_t cell_pivot(double kappa) {
    const double r = 1.0 + 1.0 / kappa;
    return static_cast<std::size_t>(std::ceil(4.03 * r * r));
}

std::size_t xor_count_for(double total_weight, double kappa) {
    const double pivot = static_cast<double>(cell_pivot(kappa));
    if (total_weight <= pivot) return 0;
    return static_cast<std::size_t>(std::ceil(std::log2(total_weight / pivot)));
}

const Pattern& perfect_sample_from_cell(const Cell& cell, Rng& rng) {
    if (cell.truncated) throw ContractError("cannot sample from a truncated cell");
    if (cell.empty()) throw ContractError("cannot sample from an empty cell");
    if (cell.weights.size() != cell.patterns.size()) throw ContractError("cell has no weights");
    const double target = rng.uniform01() * cell.total_weight();
    double acc = 0.0;
    for (std::size_t i = 0; i < cell.patterns.size(); ++i) {
        acc += cell.weights[i];
        if (target < acc) return cell.patterns[i];
    }
    return cell.patterns.back();
}

std::vector<Pattern> top_patterns(const Cell& cell, std::size_t m) {
    if (cell.weights.size() != cell.patterns.size()) throw ContractError("cell has no weights");
    std::vector<std::size_t> idx(cell.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return cell.weights[a] > cell.weights[b]; });
    std::vector<Pattern> out;
    for (std::size_t k = 0; k < std::min(m, idx.size()); ++k) out.push_back(cell.patterns[idx[k]]);
    return out;
}

PatternSampler::PatternSampler(const TransactionDB& db, Support theta, SamplerConfig config,
                               std::shared_ptr<const PatternSpace> space)
    : db_(db), theta_(theta), config_(config), space_(std::move(space)) {
    config_.validate();
    if (theta < 1) throw ConfigError("theta must be at least 1");
    if (space_ && space_->theta() != theta) throw ConfigError("pattern space was built for another theta");
}

const PatternSpace& PatternSampler::space() const {
    if (!space_) space_ = PatternSpace::build(db_, theta_);
    return *space_;
}

double PatternSampler::band_low() const noexcept {
    return static_cast<double>(cell_pivot(config_.kappa)) / (1.0 + config_.kappa);
}

double PatternSampler::band_high() const noexcept {
    return static_cast<double>(cell_pivot(config_.kappa)) * (1.0 + config_.kappa);
}

std::size_t PatternSampler::cell_cap() const noexcept {
    // More patterns than this means the weight is above the band whatever they weigh.
    return static_cast<std::size_t>(std::floor(band_high() / config_.range_a)) + 1;
}

WeightFunction PatternSampler::checked(const WeightFunction& weight_fn) const {
    const double a = config_.range_a;
    return [weight_fn, a](const Itemset& p, const Bitset& c) {
        const double w = weight_fn(p, c);
        if (!(w > a && w <= 1.0)) {
            throw ContractError("weight " + std::to_string(w) + " of " + p.to_string() + " outside (A, 1]");
        }
        return w;
    };
}

void PatternSampler::check_frequent(const Pattern& p) const {
    if (p.support < theta_) throw ContractError("sampled pattern " + p.items.to_string() + " is not frequent");
}

double PatternSampler::estimate_total_weight(const WeightFunction& weight_fn, Rng& rng) const {
    const WeightFunction w = checked(weight_fn);
    if (config_.mode == SamplingMode::Exact) {
        const PatternSpace& s = space();
        double total = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) total += w(s.pattern(i).items, s.cover(i));
        return total;
    }
    const std::size_t cap = cell_cap();
    const double high = band_high();
    std::vector<double> estimates;
    for (int probe = 0; probe < 5; ++probe) {
        for (std::size_t m = 0;; ++m) {
            XorSystem xors = draw_random_xors(m, db_.item_count(), rng);
            EnumerationOptions opts{&xors, &w, cap};
            Cell c = enumerate_frequent(db_, theta_, opts);
            const double cw = c.total_weight();
            if (!c.truncated && cw <= high) {
                estimates.push_back(std::ldexp(cw, static_cast<int>(m)));
                break;
            }
        }
    }
    std::nth_element(estimates.begin(), estimates.begin() + 2, estimates.end());
    return estimates[2];
}

std::size_t PatternSampler::estimate_xor_count(const WeightFunction& weight_fn, Rng& rng) const {
    return xor_count_for(estimate_total_weight(weight_fn, rng), config_.kappa);
}

CellDraw PatternSampler::draw_cell(const WeightFunction& weight_fn, std::size_t m, Rng& rng) const {
    const WeightFunction w = checked(weight_fn);
    CellDraw d;
    d.xor_count = m;
    XorSystem xors = draw_random_xors(m, db_.item_count(), rng);
    if (config_.mode == SamplingMode::Exact) {
        const PatternSpace& s = space();
        for (std::size_t i : s.cell_indices(xors)) {
            d.cell.patterns.push_back(s.pattern(i));
            d.cell.weights.push_back(w(s.pattern(i).items, s.cover(i)));
        }
    } else {
        EnumerationOptions opts{&xors, &w, cell_cap()};
        d.cell = enumerate_frequent(db_, theta_, opts);
    }
    const double cw = d.cell.total_weight();
    d.accepted = !d.cell.truncated && !d.cell.empty() && cw >= band_low() && cw <= band_high();
    return d;
}

SamplingRound PatternSampler::begin_round(const WeightFunction& weight_fn, Rng& rng) const {
    SamplingRound round(*this, checked(weight_fn));
    if (config_.mode == SamplingMode::Exact) {
        const PatternSpace& s = space();
        if (s.empty()) throw DomainError("no frequent patterns at theta " + std::to_string(theta_));
        round.weights_.resize(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) round.weights_[i] = round.weight_fn_(s.pattern(i).items, s.cover(i));
        round.cumulative_.resize(s.size());
        std::partial_sum(round.weights_.begin(), round.weights_.end(), round.cumulative_.begin());
        round.total_weight_ = round.cumulative_.back();
    } else {
        EnumerationOptions probe{nullptr, nullptr, std::size_t{1}};
        if (enumerate_frequent(db_, theta_, probe).empty()) {
            throw DomainError("no frequent patterns at theta " + std::to_string(theta_));
        }
        round.total_weight_ = estimate_total_weight(weight_fn, rng);
    }
    round.xor_count_ = xor_count_for(round.total_weight_, config_.kappa);
    return round;
}

std::vector<Pattern> PatternSampler::sample_batch(const WeightFunction& weight_fn, std::size_t n, Rng& rng) const {
    SamplingRound round = begin_round(weight_fn, rng);
    std::vector<Pattern> out;
    out.reserve(n);
    while (out.size() < n) {
        for (Pattern& p : round.draw(rng)) {
            if (out.size() == n) break;
            out.push_back(std::move(p));
        }
    }
    return out;
}

const Cell& SamplingRound::whole_space() {
    if (!whole_) {
        Cell c;
        const PatternSampler& s = *sampler_;
        if (s.config_.mode == SamplingMode::Exact) {
            c.patterns = s.space().patterns();
            c.weights = weights_;
        } else {
            EnumerationOptions opts{nullptr, &weight_fn_, std::nullopt};
            c = enumerate_frequent(s.db_, s.theta_, opts);
        }
        whole_ = std::move(c);
    }
    return *whole_;
}

std::vector<Pattern> SamplingRound::pick(const Cell& cell, Rng& rng) const {
    const CellStrategy& st = sampler_->config_.strategy;
    std::vector<Pattern> out;
    if (st.kind == CellStrategy::Kind::Random) {
        out.push_back(perfect_sample_from_cell(cell, rng));
    } else {
        out = top_patterns(cell, st.top_m);
    }
    for (const Pattern& p : out) sampler_->check_frequent(p);
    return out;
}

std::vector<Pattern> SamplingRound::draw(Rng& rng) {
    const PatternSampler& s = *sampler_;
    const SamplerConfig& cfg = s.config_;
    if (cfg.mode == SamplingMode::Exact && cfg.strategy.kind == CellStrategy::Kind::Random) {
        const double target = rng.uniform01() * total_weight_;
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
        if (it == cumulative_.end()) --it;
        const Pattern& p = s.space().pattern(static_cast<std::size_t>(it - cumulative_.begin()));
        s.check_frequent(p);
        return {p};
    }

    std::size_t m = xor_count_;
    for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
        if (m == 0) return pick(whole_space(), rng);
        CellDraw d;
        if (cfg.mode == SamplingMode::Exact) {
            // Same cell as PatternSampler::draw_cell, reusing this round's weights.
            d.xor_count = m;
            XorSystem xors = draw_random_xors(m, s.db_.item_count(), rng);
            const PatternSpace& sp = s.space();
            for (std::size_t i : sp.cell_indices(xors)) {
                d.cell.patterns.push_back(sp.pattern(i));
                d.cell.weights.push_back(weights_[i]);
            }
            const double cw = d.cell.total_weight();
            d.accepted = !d.cell.empty() && cw >= s.band_low() && cw <= s.band_high();
        } else {
            d = s.draw_cell(weight_fn_, m, rng);
        }
        if (d.accepted) return pick(d.cell, rng);
        ++rejected_;
        if (d.cell.truncated || d.cell.total_weight() > s.band_high()) {
            ++m;
        } else {
            --m;
        }
    }
    throw SamplerExhausted("no acceptable cell after " + std::to_string(cfg.max_retries) + " attempts");
}

}  // namespace letsip

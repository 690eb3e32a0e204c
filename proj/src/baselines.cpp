#include "letsip/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "letsip/errors.hpp"

namespace letsip {

RankedFeedback EmulatedUser::order_query(std::span<const Itemset> query) const {
    if (query.empty()) throw ContractError("cannot order an empty query");
    std::vector<std::pair<double, Itemset>> scored;
    scored.reserve(query.size());
    for (const Itemset& p : query) scored.emplace_back(phi_.eval(db_, p), p);
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    RankedFeedback r;
    for (auto& [v, p] : scored) r.order.push_back(std::move(p));
    return r;
}

bool is_liked(const Itemset& p, const std::vector<bool>& interesting) {
    if (p.empty()) return false;
    std::size_t hits = 0;
    for (Item i : p) hits += (i < interesting.size() && interesting[i]) ? 1 : 0;
    return 2 * hits > p.size();
}

InterestingItems select_interesting_items(const TransactionDB& db, const QualityMeasure& phi,
                                          const PatternSpace& space, double target_fraction) {
    const std::size_t n = space.size();
    InterestingItems out;
    out.mask.assign(db.item_count() + 1, false);
    if (n == 0) return out;

    std::vector<double> value(n);
    for (std::size_t i = 0; i < n; ++i) value[i] = phi.eval(db, space.pattern(i).items, space.cover(i));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (value[a] != value[b]) return value[a] > value[b];
        return space.pattern(a).items < space.pattern(b).items;
    });

    std::vector<std::vector<std::size_t>> containing(db.item_count() + 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (Item it : space.pattern(i).items) containing[it].push_back(i);
    }
    std::vector<std::size_t> hits(n, 0);
    std::size_t liked = 0;
    const auto target = static_cast<double>(n) * target_fraction;

    for (std::size_t idx : order) {
        for (Item it : space.pattern(idx).items) {
            if (out.mask[it]) continue;
            out.mask[it] = true;
            out.items.push_back(it);
            for (std::size_t j : containing[it]) {
                const std::size_t len = space.pattern(j).items.size();
                const bool before = 2 * hits[j] > len;
                ++hits[j];
                if (!before && 2 * hits[j] > len) ++liked;
            }
            if (static_cast<double>(liked) >= target) {
                out.liked_fraction = static_cast<double>(liked) / static_cast<double>(n);
                return out;
            }
        }
    }
    out.liked_fraction = static_cast<double>(liked) / static_cast<double>(n);
    return out;
}

IpmRun ipm_run(const TransactionDB& db, const PatternSpace& space, const std::vector<bool>& interesting,
               const IpmParams& params, Rng& rng) {
    if (space.empty()) throw DomainError("no frequent patterns to sample");
    if (!(params.b > 1.0)) throw ConfigError("IPM learning parameter b must exceed 1");
    IpmRun run;
    std::vector<double> item_weight(db.item_count() + 1, 1.0);
    std::vector<double> cumulative(space.size());

    for (std::size_t round = 1; round <= params.rounds; ++round) {
        double total = 0.0;
        for (std::size_t i = 0; i < space.size(); ++i) {
            double w = 1.0;
            for (Item it : space.pattern(i).items) w *= item_weight[it];
            if (!std::isfinite(w)) {
                run.overflowed = true;
                run.overflow_round = round;
                run.overflow_detail = "weight product of " + space.pattern(i).items.to_string() + " overflowed";
                return run;
            }
            total += w;
            cumulative[i] = total;
        }
        if (!std::isfinite(total) || total <= 0.0) {
            run.overflowed = true;
            run.overflow_round = round;
            run.overflow_detail = total <= 0.0 ? "normalizer underflowed to zero" : "normalizer overflowed";
            return run;
        }

        std::vector<Itemset> batch;
        batch.reserve(params.batch);
        for (std::size_t s = 0; s < params.batch; ++s) {
            const double target = rng.uniform01() * total;
            auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
            if (it == cumulative.end()) --it;
            batch.push_back(space.pattern(static_cast<std::size_t>(it - cumulative.begin())).items);
        }
        for (const Itemset& p : batch) {
            const double factor = is_liked(p, interesting) ? params.b : 1.0 / params.b;
            for (Item it : p) {
                item_weight[it] *= factor;
                if (!std::isfinite(item_weight[it]) || item_weight[it] == 0.0) {
                    run.batches.push_back(batch);
                    run.overflowed = true;
                    run.overflow_round = round;
                    run.overflow_detail = "weight of item " + std::to_string(it) + " left the double range";
                    return run;
                }
            }
        }
        run.batches.push_back(std::move(batch));
    }
    return run;
}

}  // namespace letsip

#include "letsip/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <charconv>
#include <future>
#include <map>
#include <ostream>

#include "letsip/errors.hpp"

namespace letsip {

PercentileIndex::PercentileIndex(const TransactionDB& db, const PatternSpace& space, const QualityMeasure& phi) {
    sorted_.reserve(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) sorted_.push_back(phi.eval(db, space.pattern(i).items, space.cover(i)));
    if (sorted_.empty()) throw DomainError("percentile index over an empty pattern space");
    std::sort(sorted_.begin(), sorted_.end());
}

PercentileIndex::PercentileIndex(std::vector<double> values) : sorted_(std::move(values)) {
    if (sorted_.empty()) throw DomainError("percentile index over no values");
    std::sort(sorted_.begin(), sorted_.end());
}

double PercentileIndex::rank(double value) const {
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), value);
    return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double joint_entropy(std::span<const Bitset> covers, std::size_t n) {
    if (covers.empty()) throw ContractError("joint entropy of an empty pattern list");
    const std::size_t words = (covers.size() + 63) / 64;
    std::map<std::vector<std::uint64_t>, std::size_t> counts;
    std::vector<std::uint64_t> sig(words);
    for (std::size_t t = 0; t < n; ++t) {
        std::fill(sig.begin(), sig.end(), 0);
        for (std::size_t k = 0; k < covers.size(); ++k) {
            if (covers[k].test(t)) sig[k / 64] |= std::uint64_t{1} << (k % 64);
        }
        ++counts[sig];
    }
    double h = 0.0;
    for (const auto& [s, c] : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(n);
        h -= p * std::log2(p);
    }
    return h;
}

double joint_entropy(const TransactionDB& db, std::span<const Itemset> patterns) {
    std::vector<Bitset> covers;
    covers.reserve(patterns.size());
    for (const Itemset& p : patterns) covers.push_back(cover(db, p));
    return joint_entropy(covers, db.transaction_count());
}

QueryMetrics query_metrics(const TransactionDB& db, const QualityMeasure& phi, const PercentileIndex& index,
                           std::span<const Itemset> query) {
    QueryMetrics m;
    std::vector<Bitset> covers;
    covers.reserve(query.size());
    double sum = 0.0;
    for (const Itemset& p : query) {
        covers.push_back(cover(db, p));
        const double r = index.rank(phi.eval(db, p, covers.back()));
        sum += r;
        m.max_pct = std::max(m.max_pct, r);
    }
    m.avg_pct = sum / static_cast<double>(query.size());
    m.hj_norm = joint_entropy(covers, db.transaction_count()) / static_cast<double>(query.size());
    return m;
}

double RegretReport::avg_regret() const { return iterations.empty() ? 0.0 : iterations.back().cum_avg_regret; }
double RegretReport::max_regret() const { return iterations.empty() ? 0.0 : iterations.back().cum_max_regret; }
double RegretReport::hj_regret() const { return iterations.empty() ? 0.0 : iterations.back().cum_hj_regret; }

namespace {

void append_iteration(RegretReport& r, const QueryMetrics& m, double seconds) {
    IterationRecord rec;
    rec.iteration = r.iterations.size() + 1;
    rec.metrics = m;
    const IterationRecord* prev = r.iterations.empty() ? nullptr : &r.iterations.back();
    rec.cum_avg_regret = (prev ? prev->cum_avg_regret : 0.0) + (1.0 - m.avg_pct);
    rec.cum_max_regret = (prev ? prev->cum_max_regret : 0.0) + (1.0 - m.max_pct);
    rec.cum_hj_regret = (prev ? prev->cum_hj_regret : 0.0) + (1.0 - m.hj_norm);
    rec.seconds = seconds;
    r.iterations.push_back(rec);
}

RegretReport run_one_seed(const EvaluationContext& ctx, SessionParams params, std::size_t iterations,
                          std::uint64_t seed) {
    RegretReport rep;
    rep.dataset = ctx.db.name();
    rep.phi = ctx.phi.kind();
    params.seed = seed;
    rep.params = params;
    rep.seed = seed;
    try {
        Session session(ctx.db, params, ctx.space);
        EmulatedUser user(ctx.phi, ctx.db);
        for (std::size_t t = 0; t < iterations; ++t) {
            const auto start = std::chrono::steady_clock::now();
            const std::vector<Itemset> query = session.next_query();
            const RankedFeedback ranked = user.order_query(query);
            const QueryMetrics m = query_metrics(ctx.db, ctx.phi, ctx.index, ranked.order);
            session.submit_feedback(ranked);
            const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
            append_iteration(rep, m, dt.count());
        }
    } catch (const std::exception& e) {
        rep.failed = true;
        rep.error = e.what();
    }
    return rep;
}

template <typename Fn>
std::vector<RegretReport> for_each_seed(const ExperimentOptions& options, Fn&& fn) {
    std::vector<RegretReport> out(options.seeds);
    const unsigned threads = std::max(1U, options.threads);
    if (threads == 1) {
        for (std::size_t s = 0; s < options.seeds; ++s) out[s] = fn(options.base_seed + s);
        return out;
    }
    for (std::size_t begin = 0; begin < options.seeds; begin += threads) {
        std::vector<std::future<RegretReport>> jobs;
        const std::size_t end = std::min<std::size_t>(options.seeds, begin + threads);
        for (std::size_t s = begin; s < end; ++s) {
            jobs.push_back(std::async(std::launch::async, [&, s] { return fn(options.base_seed + s); }));
        }
        for (std::size_t s = begin; s < end; ++s) out[s] = jobs[s - begin].get();
    }
    return out;
}

}  // namespace

std::vector<RegretReport> run_experiment(const EvaluationContext& ctx, const SessionParams& params,
                                         const ExperimentOptions& options) {
    return for_each_seed(options, [&](std::uint64_t seed) { return run_one_seed(ctx, params, options.iterations, seed); });
}

std::vector<RegretReport> run_ipm_experiment(const EvaluationContext& ctx, const IpmParams& ipm,
                                             const ExperimentOptions& options, std::size_t scored_tail) {
    const InterestingItems interesting = select_interesting_items(ctx.db, ctx.phi, *ctx.space);
    return for_each_seed(options, [&](std::uint64_t seed) {
        RegretReport rep;
        rep.dataset = ctx.db.name();
        rep.phi = ctx.phi.kind();
        rep.method = "ipm";
        rep.seed = seed;
        rep.params.k = scored_tail;
        rep.params.l = 0;
        Rng rng(seed);
        const IpmRun run = ipm_run(ctx.db, *ctx.space, interesting.mask, ipm, rng);
        for (const auto& batch : run.batches) {
            const std::size_t tail = std::min(scored_tail, batch.size());
            std::span<const Itemset> scored(batch.data() + (batch.size() - tail), tail);
            append_iteration(rep, query_metrics(ctx.db, ctx.phi, ctx.index, scored), 0.0);
        }
        if (run.overflowed) {
            rep.failed = true;
            rep.error = "overflow in round " + std::to_string(*run.overflow_round) + ": " + run.overflow_detail;
        }
        return rep;
    });
}

RegretSummary summarize(std::span<const RegretReport> reports) {
    RegretSummary s;
    std::vector<double> a, m, h;
    for (const RegretReport& r : reports) {
        ++s.runs;
        if (r.failed) {
            ++s.failed;
            continue;
        }
        a.push_back(r.avg_regret());
        m.push_back(r.max_regret());
        h.push_back(r.hj_regret());
    }
    auto stats = [](const std::vector<double>& v, double& mean, double& sd) {
        if (v.empty()) return;
        double sum = 0;
        for (double x : v) sum += x;
        mean = sum / static_cast<double>(v.size());
        double ss = 0;
        for (double x : v) ss += (x - mean) * (x - mean);
        sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    };
    stats(a, s.avg_mean, s.avg_sd);
    stats(m, s.max_mean, s.max_sd);
    stats(h, s.hj_mean, s.hj_sd);
    return s;
}

void write_csv_header(std::ostream& out) {
    out << "dataset,phi,k,l,A,strategy,features,seed,iter,avg_pct,max_pct,hj_norm,"
           "cum_avg_regret,cum_max_regret,cum_hj_regret\n";
}

namespace {

// Shortest representation that round-trips, so the CSV is exact and stable.
std::string num(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

}  // namespace

void write_csv_rows(std::ostream& out, std::span<const RegretReport> reports) {
    for (const RegretReport& r : reports) {
        const std::string strategy = r.method == "letsip" ? r.params.strategy.to_string() : r.method;
        const std::string features = r.method == "letsip" ? std::string(to_string(r.params.features)) : "-";
        const std::string prefix = r.dataset + "," + std::string(to_string(r.phi)) + "," + std::to_string(r.params.k) +
                                   "," + std::to_string(r.params.l) + "," + num(r.params.range_a) + "," + strategy +
                                   "," + features + "," + std::to_string(r.seed) + ",";
        for (const IterationRecord& it : r.iterations) {
            out << prefix << it.iteration << ',' << num(it.metrics.avg_pct) << ',' << num(it.metrics.max_pct) << ','
                << num(it.metrics.hj_norm) << ',' << num(it.cum_avg_regret) << ',' << num(it.cum_max_regret) << ','
                << num(it.cum_hj_regret) << '\n';
        }
    }
}

std::vector<SessionParams> sweep_preset(const std::string& name, const SessionParams& base) {
    const std::vector<CellStrategy> strategies = {CellStrategy::random(), CellStrategy::top(1), CellStrategy::top(2),
                                                  CellStrategy::top(3)};
    const std::vector<FeatureKind> features = {FeatureKind::I, FeatureKind::ILF, FeatureKind::ILFT};
    std::vector<SessionParams> out;
    if (name == "table2") {
        for (std::size_t k : {5, 10}) {
            for (FeatureKind f : features) {
                for (double a : {0.5, 0.1}) {
                    for (std::size_t l = 0; l <= 3; ++l) {
                        for (const CellStrategy& s : strategies) {
                            SessionParams p = base;
                            p.k = k;
                            p.features = f;
                            p.range_a = a;
                            p.l = l;
                            p.strategy = s;
                            out.push_back(p);
                        }
                    }
                }
            }
        }
        return out;
    }
    if (name == "table2-ofat") {
        out.push_back(base);
        auto add = [&](SessionParams p) {
            for (const SessionParams& q : out) {
                if (q.k == p.k && q.l == p.l && q.range_a == p.range_a && q.features == p.features &&
                    q.strategy == p.strategy) {
                    return;
                }
            }
            out.push_back(p);
        };
        for (std::size_t l = 0; l <= 3; ++l) {
            SessionParams p = base;
            p.l = l;
            add(p);
        }
        for (const CellStrategy& s : strategies) {
            SessionParams p = base;
            p.strategy = s;
            add(p);
        }
        for (FeatureKind f : features) {
            SessionParams p = base;
            p.features = f;
            add(p);
        }
        return out;
    }
    throw ConfigError("unknown sweep preset '" + name + "' (table2|table2-ofat)");
}

}  // namespace letsip

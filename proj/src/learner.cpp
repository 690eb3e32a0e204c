#include "letsip/learner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "letsip/errors.hpp"

namespace letsip {

FeatureKind parse_feature_kind(std::string_view token) {
    if (token == "I") return FeatureKind::I;
    if (token == "ILF") return FeatureKind::ILF;
    if (token == "ILFT") return FeatureKind::ILFT;
    throw ConfigError("unknown feature set '" + std::string(token) + "' (I|ILF|ILFT)");
}

std::string_view to_string(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::I: return "I";
        case FeatureKind::ILF: return "ILF";
        case FeatureKind::ILFT: return "ILFT";
    }
    return "?";
}

FeatureSchema::FeatureSchema(FeatureKind kind, std::size_t item_count, std::size_t transaction_count)
    : kind_(kind), items_(item_count), transactions_(transaction_count) {}

std::size_t FeatureSchema::dimension() const noexcept {
    switch (kind_) {
        case FeatureKind::I: return items_;
        case FeatureKind::ILF: return items_ + 2;
        case FeatureKind::ILFT: return items_ + 2 + transactions_;
    }
    return 0;
}

std::string FeatureSchema::feature_name(std::size_t j, const TransactionDB* db) const {
    if (j < items_) {
        const Item i = static_cast<Item>(j + 1);
        return "item:" + (db != nullptr ? db->item_name(i) : std::to_string(i));
    }
    if (j == length_index()) return "length";
    if (j == frequency_index()) return "frequency";
    return "transaction:" + std::to_string(j - transaction_offset() + 1);
}

std::vector<double> featurize(const FeatureSchema& schema, const TransactionDB& db, const Itemset& p) {
    return featurize(schema, db, p, cover(db, p));
}

std::vector<double> featurize(const FeatureSchema& schema, const TransactionDB& db, const Itemset& p,
                              const Bitset& c) {
    std::vector<double> x(schema.dimension(), 0.0);
    for (Item i : p) {
        if (i == 0 || i > schema.item_count()) throw DomainError("unknown item id " + std::to_string(i));
        x[i - 1] = 1.0;
    }
    if (schema.has_length_frequency()) {
        x[schema.length_index()] = static_cast<double>(p.size()) / static_cast<double>(db.item_count());
        x[schema.frequency_index()] = static_cast<double>(c.count()) / static_cast<double>(db.transaction_count());
    }
    if (schema.has_transactions()) {
        const std::size_t off = schema.transaction_offset();
        c.for_each_set([&](std::size_t t) { x[off + t] = 1.0; });
    }
    return x;
}

double logistic_with_range(double score, double range_a) {
    const double q = range_a + (1.0 - range_a) / (1.0 + std::exp(-score));
    // exp(-score) overflows for very negative scores; the true value is still above A.
    return q > range_a ? q : std::nextafter(range_a, 1.0);
}

LogisticModel::LogisticModel(FeatureSchema schema, double range_a)
    : LogisticModel(schema, std::vector<double>(schema.dimension(), 0.0), range_a) {}

LogisticModel::LogisticModel(FeatureSchema schema, std::vector<double> weights, double range_a)
    : schema_(schema), weights_(std::move(weights)), range_a_(range_a) {
    if (weights_.size() != schema_.dimension()) throw ContractError("weight vector does not match schema dimension");
    if (!(range_a > 0.0 && range_a < 1.0)) throw ConfigError("range A must lie in (0, 1)");
}

double LogisticModel::score(std::span<const double> x) const {
    if (x.size() != weights_.size()) throw ContractError("feature dimension mismatch");
    return std::inner_product(x.begin(), x.end(), weights_.begin(), 0.0);
}

double LogisticModel::score(const TransactionDB& db, const Itemset& p, const Bitset& c) const {
    double s = 0.0;
    for (Item i : p) s += weights_[i - 1];
    if (schema_.has_length_frequency()) {
        s += weights_[schema_.length_index()] * static_cast<double>(p.size()) / static_cast<double>(db.item_count());
        s += weights_[schema_.frequency_index()] * static_cast<double>(c.count()) /
             static_cast<double>(db.transaction_count());
    }
    if (schema_.has_transactions()) {
        const double* wt = weights_.data() + schema_.transaction_offset();
        c.for_each_set([&](std::size_t t) { s += wt[t]; });
    }
    return s;
}

double LogisticModel::q(std::span<const double> x) const { return logistic_with_range(score(x), range_a_); }

double LogisticModel::q(const TransactionDB& db, const Itemset& p, const Bitset& c) const {
    return logistic_with_range(score(db, p, c), range_a_);
}

WeightFunction LogisticModel::weight_function(const TransactionDB& db) const {
    return [model = *this, &db](const Itemset& p, const Bitset& c) { return model.q(db, p, c); };
}

double q_logistic(const LogisticModel& model, std::span<const double> features) { return model.q(features); }

void RankedFeedback::validate() const {
    std::set<Itemset> seen;
    for (const Itemset& p : order) {
        if (!seen.insert(p).second) throw ValidationError("ranking lists " + p.to_string() + " twice");
    }
}

std::vector<PairExample> pairs_from_feedback(std::span<const RankedFeedback> feedback, const FeatureSchema& schema,
                                             const TransactionDB& db) {
    std::vector<PairExample> out;
    for (const RankedFeedback& r : feedback) {
        std::vector<std::vector<double>> xs;
        xs.reserve(r.order.size());
        for (const Itemset& p : r.order) xs.push_back(featurize(schema, db, p));
        for (std::size_t a = 0; a < xs.size(); ++a) {
            for (std::size_t b = a + 1; b < xs.size(); ++b) {
                PairExample e{std::vector<double>(schema.dimension())};
                for (std::size_t j = 0; j < e.difference.size(); ++j) e.difference[j] = xs[a][j] - xs[b][j];
                out.push_back(std::move(e));
            }
        }
    }
    return out;
}

namespace {

/// log(1 + exp(-z)) without overflow.
double logistic_loss(double z) { return z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z)); }

/// 1 / (1 + exp(z)), the magnitude of d/dz log(1 + exp(-z)).
double sigmoid_neg(double z) {
    if (z >= 0) {
        const double e = std::exp(-z);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(z));
}

double l1(std::span<const double> w) {
    double s = 0.0;
    for (double v : w) s += std::abs(v);
    return s;
}

double margin(std::span<const double> w, const PairExample& e) {
    return std::inner_product(w.begin(), w.end(), e.difference.begin(), 0.0);
}

}  // namespace

LossAndGradient loss_and_gradient(std::span<const double> weights, std::span<const PairExample> pairs,
                                  double /*lambda*/) {
    LossAndGradient out;
    out.gradient.assign(weights.size(), 0.0);
    if (pairs.empty()) return out;
    const double inv_n = 1.0 / static_cast<double>(pairs.size());
    for (const PairExample& e : pairs) {
        if (e.difference.size() != weights.size()) throw ContractError("pair dimension mismatch");
        const double z = margin(weights, e);
        out.loss += logistic_loss(z) * inv_n;
        const double g = -sigmoid_neg(z) * inv_n;
        for (std::size_t j = 0; j < weights.size(); ++j) out.gradient[j] += g * e.difference[j];
    }
    return out;
}

double regularized_loss(std::span<const double> weights, std::span<const PairExample> pairs, double lambda) {
    return loss_and_gradient(weights, pairs, lambda).loss + lambda * l1(weights);
}

ScdResult scd_train(std::span<const PairExample> pairs, std::size_t dimension, double lambda, std::size_t updates,
                    Rng& rng, const std::optional<std::vector<double>>& warm_start) {
    if (lambda < 0.0) throw ContractError("lambda must be non-negative");
    ScdResult res;
    res.weights = warm_start.value_or(std::vector<double>(dimension, 0.0));
    if (res.weights.size() != dimension) throw ContractError("warm start has the wrong dimension");
    if (pairs.empty() || dimension == 0) {
        res.initial_loss = res.final_loss = lambda * l1(res.weights);
        return res;
    }
    const std::size_t n = pairs.size();
    const double inv_n = 1.0 / static_cast<double>(n);

    std::vector<double> z(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (pairs[k].difference.size() != dimension) throw ContractError("pair dimension mismatch");
        z[k] = margin(res.weights, pairs[k]);
    }
    // Per-coordinate curvature bound of the smooth loss: (1/4)(1/n) sum d_kj^2.
    std::vector<double> beta(dimension, 0.0);
    for (const PairExample& e : pairs) {
        for (std::size_t j = 0; j < dimension; ++j) beta[j] += e.difference[j] * e.difference[j];
    }
    for (double& b : beta) b *= 0.25 * inv_n;

    auto objective = [&] {
        double s = 0.0;
        for (double v : z) s += logistic_loss(v);
        return s * inv_n + lambda * l1(res.weights);
    };
    res.initial_loss = objective();

    for (std::size_t step = 0; step < updates; ++step) {
        const std::size_t j = rng.uniform_index(dimension);
        if (beta[j] == 0.0) continue;
        double g = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double d = pairs[k].difference[j];
            if (d != 0.0) g -= d * sigmoid_neg(z[k]);
        }
        g *= inv_n;
        const double w = res.weights[j];
        const double u = w - g / beta[j];
        const double shrink = lambda / beta[j];
        const double next = u > shrink ? u - shrink : (u < -shrink ? u + shrink : 0.0);
        const double delta = next - w;
        if (delta == 0.0) continue;
        res.weights[j] = next;
        for (std::size_t k = 0; k < n; ++k) z[k] += delta * pairs[k].difference[j];
    }
    res.updates = updates;
    res.final_loss = objective();
    if (!std::isfinite(res.final_loss)) throw NumericError("training loss is not finite");
    return res;
}

std::string model_to_json(const LogisticModel& model) {
    nlohmann::json j;
    j["schema"] = std::string(to_string(model.schema().kind()));
    j["items"] = model.schema().item_count();
    j["transactions"] = model.schema().transaction_count();
    j["dimension"] = model.schema().dimension();
    j["range_a"] = model.range_a();
    j["weights"] = model.weights();
    return j.dump(2);
}

LogisticModel model_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
        const FeatureSchema schema(parse_feature_kind(j.at("schema").get<std::string>()),
                                   j.at("items").get<std::size_t>(), j.at("transactions").get<std::size_t>());
        if (j.at("dimension").get<std::size_t>() != schema.dimension()) {
            throw ParseError("model dimension does not match its schema");
        }
        return LogisticModel(schema, j.at("weights").get<std::vector<double>>(), j.at("range_a").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad model document: ") + e.what());
    }
}

void save_model(const LogisticModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path.string());
    out << model_to_json(model) << '\n';
}

LogisticModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

}  // namespace letsip

#include "letsip/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "letsip/errors.hpp"
#include "letsip/evaluation.hpp"
#include "letsip/learner.hpp"

namespace letsip {

using json = nlohmann::json;

namespace {

ApiResponse reply(int status, const json& body) { return {status, body.dump()}; }
ApiResponse error(int status, const std::string& message) { return reply(status, json{{"error", message}}); }

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

std::size_t get_count(const json& v, const char* key) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw ConfigError(std::string("'") + key + "' must be a non-negative integer");
    }
    return v.get<std::size_t>();
}

double get_real(const json& v, const char* key) {
    if (!v.is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
    return v.get<double>();
}

std::string get_text(const json& v, const char* key) {
    if (!v.is_string()) throw ConfigError(std::string("'") + key + "' must be a string");
    return v.get<std::string>();
}

SessionParams params_from_json(const json& j, Support theta) {
    SessionParams p;
    p.theta = theta;
    if (j.is_null()) return p;
    if (!j.is_object()) throw ConfigError("'params' must be an object");
    for (const auto& [key, v] : j.items()) {
        if (key == "k") {
            p.k = get_count(v, "k");
        } else if (key == "l") {
            p.l = get_count(v, "l");
        } else if (key == "range_a" || key == "A") {
            p.range_a = get_real(v, "range_a");
        } else if (key == "strategy") {
            p.strategy = CellStrategy::parse(get_text(v, "strategy"));
        } else if (key == "features") {
            p.features = parse_feature_kind(get_text(v, "features"));
        } else if (key == "lambda") {
            p.lambda = get_real(v, "lambda");
        } else if (key == "scd_updates" || key == "T") {
            p.scd_updates = get_count(v, "scd_updates");
        } else if (key == "kappa") {
            p.kappa = get_real(v, "kappa");
        } else if (key == "seed") {
            p.seed = get_count(v, "seed");
        } else if (key == "mode") {
            p.mode = parse_sampling_mode(get_text(v, "mode"));
        } else if (key == "max_retries") {
            p.max_retries = static_cast<int>(get_count(v, "max_retries"));
        } else {
            throw ConfigError("unknown parameter '" + key + "'");
        }
    }
    p.validate();
    return p;
}

json params_to_json(const SessionParams& p) {
    return json{{"k", p.k},
                {"l", p.l},
                {"range_a", p.range_a},
                {"strategy", p.strategy.to_string()},
                {"features", to_string(p.features)},
                {"theta", p.theta},
                {"lambda", p.lambda},
                {"scd_updates", p.scd_updates},
                {"kappa", p.kappa},
                {"seed", p.seed},
                {"mode", to_string(p.mode)},
                {"max_retries", p.max_retries}};
}

json items_json(const Itemset& p) { return json(p.items()); }

// Fraction of each of up to 64 consecutive transaction blocks that p covers.
json coverage_bins(const Bitset& c) {
    const std::size_t n = c.size();
    const std::size_t bins = std::min<std::size_t>(n, 64);
    json out = json::array();
    for (std::size_t b = 0; b < bins; ++b) {
        const std::size_t lo = b * n / bins, hi = (b + 1) * n / bins;
        std::size_t hit = 0;
        for (std::size_t t = lo; t < hi; ++t) hit += c.test(t) ? 1 : 0;
        out.push_back(static_cast<double>(hit) / static_cast<double>(hi - lo));
    }
    return out;
}

}  // namespace

ServerConfig ServerConfig::parse(const std::string& text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("server config is not valid JSON: ") + e.what());
    }
    ServerConfig cfg;
    try {
        if (j.contains("idle_timeout_minutes")) cfg.idle_timeout = std::chrono::minutes(j.at("idle_timeout_minutes").get<int>());
        for (const json& d : j.at("datasets")) {
            DatasetEntry e;
            e.name = d.at("name").get<std::string>();
            e.data = resolve(base_dir, d.at("data").get<std::string>());
            if (d.contains("labels")) e.labels = resolve(base_dir, d.at("labels").get<std::string>());
            if (d.contains("vocabulary")) e.vocabulary = resolve(base_dir, d.at("vocabulary").get<std::string>());
            e.theta = d.at("theta").get<Support>();
            cfg.datasets.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad server config: ") + e.what());
    }
    return cfg;
}

ServerConfig ServerConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read server config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.parent_path());
}

struct SessionService::Dataset {
    std::string name;
    std::shared_ptr<const TransactionDB> db;
    Support theta = 1;
    std::mutex space_mutex;
    std::shared_ptr<const PatternSpace> space;
};

struct SessionService::Entry {
    std::mutex mutex;
    std::shared_ptr<Dataset> dataset;
    std::unique_ptr<Session> session;
    std::vector<std::string> tokens;  // aligned with the pending query
    std::uint64_t token_counter = 0;
    std::chrono::steady_clock::time_point last_used;
};

SessionService::SessionService(std::chrono::minutes idle_timeout, Clock clock)
    : idle_timeout_(idle_timeout), clock_(clock ? std::move(clock) : Clock([] { return std::chrono::steady_clock::now(); })) {}

SessionService::SessionService(const ServerConfig& config, Clock clock) : SessionService(config.idle_timeout, std::move(clock)) {
    for (const DatasetEntry& e : config.datasets) {
        auto db = std::make_shared<TransactionDB>(load_dataset(e.data, e.labels));
        if (e.vocabulary) load_vocabulary(*db, *e.vocabulary);
        register_dataset(e.name, std::move(db), e.theta);
    }
}

SessionService::~SessionService() = default;

void SessionService::register_dataset(const std::string& name, std::shared_ptr<const TransactionDB> db, Support theta) {
    if (theta < 1) throw ConfigError("dataset '" + name + "' needs theta >= 1");
    auto ds = std::make_shared<Dataset>();
    ds->name = name;
    ds->db = std::move(db);
    ds->theta = theta;
    datasets_[name] = std::move(ds);
}

std::shared_ptr<const PatternSpace> SessionService::space_for(Dataset& ds) {
    std::lock_guard lock(ds.space_mutex);
    if (!ds.space) ds.space = PatternSpace::build(*ds.db, ds.theta);
    return ds.space;
}

std::string SessionService::new_session_id() {
    static thread_local std::mt19937_64 gen(std::random_device{}());
    std::ostringstream s;
    s << std::hex << ++id_counter_ << '-' << (gen() & 0xffffffffffULL);
    return s.str();
}

std::size_t SessionService::evict_idle() {
    std::lock_guard lock(mutex_);
    const auto now = clock_();
    std::size_t dropped = 0;
    for (auto it = sessions_.begin(); it != sessions_.end();) {
        std::unique_lock entry_lock(it->second->mutex, std::try_to_lock);
        if (entry_lock.owns_lock() && now - it->second->last_used > idle_timeout_) {
            entry_lock.unlock();
            it = sessions_.erase(it);
            ++dropped;
        } else {
            ++it;
        }
    }
    return dropped;
}

std::size_t SessionService::session_count() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

std::shared_ptr<SessionService::Entry> SessionService::find(const std::string& id) {
    evict_idle();
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

ApiResponse SessionService::list_datasets() const {
    json out = json::array();
    for (const auto& [name, ds] : datasets_) {
        out.push_back({{"name", name},
                       {"items", ds->db->item_count()},
                       {"transactions", ds->db->transaction_count()},
                       {"labelled", ds->db->has_labels()},
                       {"theta", ds->theta}});
    }
    return reply(200, json{{"datasets", out}});
}

ApiResponse SessionService::create_session(const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception&) {
        return error(400, "request body is not valid JSON");
    }
    if (!j.is_object() || !j.contains("dataset") || !j["dataset"].is_string()) {
        return error(400, "body must name a 'dataset'");
    }
    const std::string name = j["dataset"].get<std::string>();
    auto ds_it = datasets_.find(name);
    if (ds_it == datasets_.end()) return error(404, "unknown dataset '" + name + "'");
    const std::shared_ptr<Dataset> ds = ds_it->second;

    auto entry = std::make_shared<Entry>();
    entry->dataset = ds;
    try {
        const SessionParams params = params_from_json(j.value("params", json()), ds->theta);
        auto space = params.mode == SamplingMode::Exact ? space_for(*ds) : nullptr;
        entry->session = std::make_unique<Session>(*ds->db, params, std::move(space));
    } catch (const ConfigError& e) {
        return error(400, e.what());
    }
    entry->last_used = clock_();

    evict_idle();
    std::string id;
    {
        std::lock_guard lock(mutex_);
        id = new_session_id();
        sessions_[id] = entry;
    }
    return reply(201, json{{"session_id", id}, {"dataset", name}, {"params", params_to_json(entry->session->params())}});
}

ApiResponse SessionService::get_query(const std::string& id) {
    auto entry = find(id);
    if (!entry) return error(404, "unknown session '" + id + "'");
    std::lock_guard lock(entry->mutex);
    entry->last_used = clock_();
    Session& s = *entry->session;
    if (!s.has_pending()) {
        try {
            s.next_query();
        } catch (const SamplerExhausted& e) {
            return error(503, e.what());
        }
        entry->tokens.clear();
        for (std::size_t i = 0; i < s.pending_query().size(); ++i) {
            entry->tokens.push_back("p" + std::to_string(++entry->token_counter));
        }
    }
    const TransactionDB& db = s.db();
    json cards = json::array();
    const auto& q = s.pending_query();
    for (std::size_t i = 0; i < q.size(); ++i) {
        const Bitset c = cover(db, q[i]);
        json names = json::array();
        for (Item it : q[i]) names.push_back(db.item_name(it));
        cards.push_back({{"token", entry->tokens[i]},
                         {"items", items_json(q[i])},
                         {"names", names},
                         {"support", c.count()},
                         {"length", q[i].size()},
                         {"coverage", {{"transactions", db.transaction_count()}, {"bins", coverage_bins(c)}}},
                         {"retained", i < s.retained_count()}});
    }
    return reply(200, json{{"session_id", id},
                           {"iteration", s.iteration() + 1},
                           {"retained", s.retained_count()},
                           {"duplicates_accepted", s.duplicates_accepted()},
                           {"cards", cards}});
}

ApiResponse SessionService::post_feedback(const std::string& id, const std::string& body) {
    auto entry = find(id);
    if (!entry) return error(404, "unknown session '" + id + "'");
    std::lock_guard lock(entry->mutex);
    entry->last_used = clock_();
    Session& s = *entry->session;
    if (!s.has_pending()) return error(409, "no pending query");

    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception&) {
        return error(400, "request body is not valid JSON");
    }
    if (!j.is_object() || !j.contains("ranking") || !j["ranking"].is_array()) {
        return error(400, "body must hold a 'ranking' array of pattern tokens");
    }
    const auto& q = s.pending_query();
    std::vector<bool> used(q.size(), false);
    RankedFeedback ranking;
    for (const json& t : j["ranking"]) {
        if (!t.is_string()) return error(422, "ranking entries must be pattern tokens");
        auto it = std::find(entry->tokens.begin(), entry->tokens.end(), t.get<std::string>());
        if (it == entry->tokens.end()) return error(422, "token '" + t.get<std::string>() + "' is not in the pending query");
        const auto idx = static_cast<std::size_t>(it - entry->tokens.begin());
        if (used[idx]) return error(422, "token '" + t.get<std::string>() + "' appears twice");
        used[idx] = true;
        ranking.order.push_back(q[idx]);
    }
    if (ranking.order.size() != q.size()) return error(422, "ranking must order every pattern of the pending query");

    try {
        s.submit_feedback(ranking);
    } catch (const ValidationError& e) {
        return error(422, e.what());
    }
    entry->tokens.clear();
    const HistoryEntry& h = s.history().back();
    return reply(200, json{{"iteration", s.iteration()},
                           {"training", {{"pairs", s.pair_count()},
                                         {"rankings", s.feedback().size()},
                                         {"loss", h.training_loss},
                                         {"updates", s.params().scd_updates}}}});
}

ApiResponse SessionService::get_model(const std::string& id) {
    auto entry = find(id);
    if (!entry) return error(404, "unknown session '" + id + "'");
    std::lock_guard lock(entry->mutex);
    entry->last_used = clock_();
    const Session& s = *entry->session;
    const LogisticModel& m = s.model();
    const auto& w = m.weights();
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] != 0.0) idx.push_back(i);
    }
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return std::abs(w[a]) > std::abs(w[b]); });
    if (idx.size() > 20) idx.resize(20);
    json top = json::array();
    for (std::size_t i : idx) top.push_back({{"index", i}, {"name", m.schema().feature_name(i, &s.db())}, {"weight", w[i]}});
    return reply(200, json{{"schema", to_string(m.schema().kind())},
                           {"range_a", m.range_a()},
                           {"dimension", w.size()},
                           {"iteration", s.iteration()},
                           {"top_features", top},
                           {"model", json::parse(model_to_json(m))}});
}

ApiResponse SessionService::get_metrics(const std::string& id) {
    auto entry = find(id);
    if (!entry) return error(404, "unknown session '" + id + "'");
    std::lock_guard lock(entry->mutex);
    entry->last_used = clock_();
    const Session& s = *entry->session;
    const TransactionDB& db = s.db();
    json history = json::array();
    for (const HistoryEntry& h : s.history()) {
        json ranking = json::array();
        double support_sum = 0, length_sum = 0;
        for (const Itemset& p : h.ranking.order) {
            ranking.push_back(items_json(p));
            support_sum += support(db, p);
            length_sum += static_cast<double>(p.size());
        }
        const double k = static_cast<double>(h.ranking.order.size());
        history.push_back({{"iteration", h.iteration},
                           {"ranking", ranking},
                           {"training_loss", h.training_loss},
                           {"mean_support", support_sum / k},
                           {"mean_length", length_sum / k},
                           {"joint_entropy_norm", joint_entropy(db, h.ranking.order) / k}});
    }
    return reply(200, json{{"iteration", s.iteration()}, {"history", history}});
}

HttpServer::HttpServer(SessionService& service) : server_(std::make_unique<httplib::Server>()) {
    auto& srv = *server_;
    srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                             {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                             {"Access-Control-Allow-Headers", "Content-Type"}});
    auto send = [](httplib::Response& res, const ApiResponse& r) {
        res.status = r.status;
        res.set_content(r.body, "application/json");
    };
    srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    srv.Get("/datasets", [&service, send](const httplib::Request&, httplib::Response& res) {
        send(res, service.list_datasets());
    });
    srv.Post("/sessions", [&service, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service.create_session(req.body));
    });
    srv.Get(R"(/sessions/([^/]+)/query)", [&service, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service.get_query(req.matches[1]));
    });
    srv.Post(R"(/sessions/([^/]+)/feedback)", [&service, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service.post_feedback(req.matches[1], req.body));
    });
    srv.Get(R"(/sessions/([^/]+)/model)", [&service, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service.get_model(req.matches[1]));
    });
    srv.Get(R"(/sessions/([^/]+)/metrics)", [&service, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service.get_metrics(req.matches[1]));
    });
    srv.set_exception_handler([send](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        send(res, ApiResponse{500, json{{"error", what}}.dump()});
    });
}

HttpServer::~HttpServer() = default;

bool HttpServer::listen(const std::string& host, int port) { return server_->listen(host, port); }
int HttpServer::bind_to_any_port(const std::string& host) { return server_->bind_to_any_port(host); }
bool HttpServer::listen_after_bind() { return server_->listen_after_bind(); }
void HttpServer::stop() { server_->stop(); }
bool HttpServer::is_running() const { return server_->is_running(); }

}  // namespace letsip

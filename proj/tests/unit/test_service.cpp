#include <doctest.h>

#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <thread>

#include "letsip/errors.hpp"
#include "letsip/learner.hpp"
#include "letsip/service.hpp"
#include "oracles.hpp"

using namespace letsip;
using json = nlohmann::json;

namespace {

std::shared_ptr<const TransactionDB> toy_db() {
    auto toy = oracle::random_db(17, 10, 40, 0.5);
    auto db = std::make_shared<TransactionDB>(toy.db());
    std::vector<std::string> names(11);
    for (int i = 1; i <= 10; ++i) names[i] = "item" + std::to_string(i);
    db->set_vocabulary(names);
    return db;
}

struct FakeClock {
    std::chrono::steady_clock::time_point now{};
};

std::string create(SessionService& svc, const json& params = json::object()) {
    const ApiResponse r = svc.create_session(json{{"dataset", "toy"}, {"params", params}}.dump());
    REQUIRE(r.status == 201);
    return json::parse(r.body)["session_id"].get<std::string>();
}

json tokens_of(const json& query) {
    json t = json::array();
    for (const json& c : query["cards"]) t.push_back(c["token"]);
    return t;
}

}  // namespace

TEST_CASE("session creation validates its input") {
    SessionService svc;
    svc.register_dataset("toy", toy_db(), 2);
    CHECK(svc.create_session(R"({"dataset": "toy"})").status == 201);
    CHECK(svc.create_session(R"({"dataset": "nope"})").status == 404);
    CHECK(svc.create_session(R"({"dataset": "toy", "params": {"k": 5, "l": 5}})").status == 400);
    CHECK(svc.create_session(R"({"dataset": "toy", "params": {"k": -1}})").status == 400);
    CHECK(svc.create_session(R"({"dataset": "toy", "params": {"colour": 1}})").status == 400);
    CHECK(svc.create_session(R"({"dataset": "toy", "params": {"strategy": "best"}})").status == 400);
    CHECK(svc.create_session(R"({"dataset": "toy", "params": {"k": 100000}})").status == 400);
    CHECK(svc.create_session("{not json").status == 400);
    CHECK(svc.create_session(R"({"params": {}})").status == 400);

    const json echo = json::parse(svc.create_session(R"({"dataset": "toy"})").body);
    CHECK(echo["params"]["k"] == 5);
    CHECK(echo["params"]["l"] == 1);
    CHECK(echo["params"]["range_a"] == 0.5);
    CHECK(echo["params"]["strategy"] == "top1");
    CHECK(echo["params"]["features"] == "ILFT");
}

TEST_CASE("query, feedback and retention through the API") {
    SessionService svc;
    svc.register_dataset("toy", toy_db(), 2);
    const std::string id = create(svc);

    const ApiResponse q1 = svc.get_query(id);
    REQUIRE(q1.status == 200);
    CHECK(svc.get_query(id).body == q1.body);
    const json first = json::parse(q1.body);
    REQUIRE(first["cards"].size() == 5);
    for (const json& c : first["cards"]) {
        CHECK(c["retained"] == false);
        CHECK(c["support"].get<int>() >= 2);
        CHECK(c["length"] == c["items"].size());
        CHECK(c["names"].size() == c["items"].size());
        CHECK(c["coverage"]["bins"].size() == 40);
    }

    json ranking = tokens_of(first);
    std::reverse(ranking.begin(), ranking.end());
    json missing = ranking;
    missing.erase(missing.end() - 1);
    CHECK(svc.post_feedback(id, json{{"ranking", missing}}.dump()).status == 422);
    json dup = ranking;
    dup[1] = dup[0];
    CHECK(svc.post_feedback(id, json{{"ranking", dup}}.dump()).status == 422);
    json foreign = ranking;
    foreign[0] = "p999";
    CHECK(svc.post_feedback(id, json{{"ranking", foreign}}.dump()).status == 422);

    const ApiResponse fb = svc.post_feedback(id, json{{"ranking", ranking}}.dump());
    REQUIRE(fb.status == 200);
    CHECK(json::parse(fb.body)["iteration"] == 1);
    CHECK(json::parse(fb.body)["training"]["pairs"] == 10);
    CHECK(svc.post_feedback(id, json{{"ranking", ranking}}.dump()).status == 409);

    const json second = json::parse(svc.get_query(id).body);
    const json& top = first["cards"][static_cast<std::size_t>(4)];  // ranked first after the reverse
    CHECK(second["cards"][0]["items"] == top["items"]);
    CHECK(second["cards"][0]["retained"] == true);
    CHECK(second["cards"][1]["retained"] == false);
    // tokens are never reused
    for (const json& t : tokens_of(second)) CHECK(std::find(ranking.begin(), ranking.end(), t) == ranking.end());
}

TEST_CASE("model and metrics endpoints") {
    SessionService svc;
    svc.register_dataset("toy", toy_db(), 2);
    const std::string id = create(svc);
    json model = json::parse(svc.get_model(id).body);
    CHECK(model["schema"] == "ILFT");
    CHECK(model["top_features"].empty());
    for (const json& w : model["model"]["weights"]) CHECK(w == 0.0);
    CHECK(json::parse(svc.get_metrics(id).body)["history"].empty());

    for (int t = 0; t < 3; ++t) {
        const json q = json::parse(svc.get_query(id).body);
        REQUIRE(svc.post_feedback(id, json{{"ranking", tokens_of(q)}}.dump()).status == 200);
    }
    const json metrics = json::parse(svc.get_metrics(id).body);
    CHECK(metrics["history"].size() == 3);
    CHECK(metrics["history"][2]["iteration"] == 3);

    model = json::parse(svc.get_model(id).body);
    CHECK_FALSE(model["top_features"].empty());
    const LogisticModel restored = model_from_json(model["model"].dump());
    CHECK(restored.weights() == model["model"]["weights"].get<std::vector<double>>());
    CHECK(model_from_json(model_to_json(restored)) == restored);
    const std::string name = model["top_features"][0]["name"];
    CHECK_FALSE(name.empty());
}

TEST_CASE("unknown sessions are 404") {
    SessionService svc;
    CHECK(svc.get_query("x").status == 404);
    CHECK(svc.post_feedback("x", "{}").status == 404);
    CHECK(svc.get_model("x").status == 404);
    CHECK(svc.get_metrics("x").status == 404);
}

TEST_CASE("same seed and feedback give the same queries across services") {
    auto run = [] {
        SessionService svc;
        svc.register_dataset("toy", toy_db(), 2);
        const std::string id = create(svc, {{"seed", 9}});
        std::vector<json> items;
        for (int t = 0; t < 4; ++t) {
            const json q = json::parse(svc.get_query(id).body);
            for (const json& c : q["cards"]) items.push_back(c["items"]);
            svc.post_feedback(id, json{{"ranking", tokens_of(q)}}.dump());
        }
        return items;
    };
    CHECK(run() == run());
}

TEST_CASE("idle sessions are evicted") {
    auto clock = std::make_shared<FakeClock>();
    SessionService svc(std::chrono::minutes(60), [clock] { return clock->now; });
    svc.register_dataset("toy", toy_db(), 2);
    const std::string a = create(svc);
    clock->now += std::chrono::minutes(30);
    const std::string b = create(svc);
    CHECK(svc.session_count() == 2);
    clock->now += std::chrono::minutes(31);
    CHECK(svc.evict_idle() == 1);
    CHECK(svc.get_query(a).status == 404);
    CHECK(svc.get_query(b).status == 200);
}

TEST_CASE("concurrent requests on one session stay consistent") {
    SessionService svc;
    svc.register_dataset("toy", toy_db(), 2);
    const std::string id = create(svc);
    std::vector<std::thread> threads;
    std::vector<std::string> bodies(8);
    for (int i = 0; i < 8; ++i) threads.emplace_back([&, i] { bodies[i] = svc.get_query(id).body; });
    for (auto& t : threads) t.join();
    for (const auto& b : bodies) CHECK(b == bodies[0]);

    const json ranking = tokens_of(json::parse(bodies[0]));
    std::vector<int> statuses(6);
    threads.clear();
    for (int i = 0; i < 6; ++i) {
        threads.emplace_back([&, i] { statuses[i] = svc.post_feedback(id, json{{"ranking", ranking}}.dump()).status; });
    }
    for (auto& t : threads) t.join();
    CHECK(std::count(statuses.begin(), statuses.end(), 200) == 1);
    CHECK(std::count(statuses.begin(), statuses.end(), 409) == 5);
}

TEST_CASE("server config parsing") {
    const auto cfg = ServerConfig::parse(
        R"({"datasets": [{"name": "a", "data": "a.dat", "labels": "/x/a.labels", "theta": 4}], "idle_timeout_minutes": 5})",
        "/base");
    REQUIRE(cfg.datasets.size() == 1);
    CHECK(cfg.datasets[0].data == std::filesystem::path("/base/a.dat"));
    CHECK(cfg.datasets[0].labels == std::filesystem::path("/x/a.labels"));
    CHECK(cfg.datasets[0].theta == 4);
    CHECK(cfg.idle_timeout == std::chrono::minutes(5));
    CHECK_THROWS_AS(ServerConfig::parse("{}"), ConfigError);
    CHECK_THROWS_AS(ServerConfig::parse("[oops"), ConfigError);

    const auto dir = std::filesystem::temp_directory_path() / "letsip_service_cfg";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "d.dat") << "1 2\n2 3\n1 2 3\n";
    std::ofstream(dir / "d.labels") << "0\n1\n1\n";
    std::ofstream(dir / "server.json") << R"({"datasets": [{"name": "d", "data": "d.dat", "labels": "d.labels", "theta": 1}]})";
    SessionService svc(ServerConfig::load(dir / "server.json"));
    const json ds = json::parse(svc.list_datasets().body);
    CHECK(ds["datasets"][0]["name"] == "d");
    CHECK(ds["datasets"][0]["transactions"] == 3);
}

TEST_CASE("HTTP round trip with CORS headers") {
    SessionService svc;
    svc.register_dataset("toy", toy_db(), 2);
    HttpServer server(svc);
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread th([&] { server.listen_after_bind(); });
    while (!server.is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(5));

    httplib::Client cli("127.0.0.1", port);
    auto created = cli.Post("/sessions", R"({"dataset": "toy", "params": {"k": 4, "l": 1}})", "application/json");
    REQUIRE(created);
    CHECK(created->status == 201);
    CHECK(created->get_header_value("Access-Control-Allow-Origin") == "*");
    const std::string id = json::parse(created->body)["session_id"];

    auto q = cli.Get("/sessions/" + id + "/query");
    REQUIRE(q);
    CHECK(q->status == 200);
    const json query = json::parse(q->body);
    CHECK(query["cards"].size() == 4);
    auto fb = cli.Post("/sessions/" + id + "/feedback", json{{"ranking", tokens_of(query)}}.dump(), "application/json");
    REQUIRE(fb);
    CHECK(fb->status == 200);
    auto again = cli.Post("/sessions/" + id + "/feedback", json{{"ranking", tokens_of(query)}}.dump(), "application/json");
    CHECK(again->status == 409);
    CHECK(cli.Get("/sessions/" + id + "/model")->status == 200);
    CHECK(cli.Get("/sessions/nope/metrics")->status == 404);
    CHECK(cli.Post("/sessions", R"({"dataset": "toy", "params": {"k": 3, "l": 3}})", "application/json")->status == 400);
    auto pre = cli.Options("/sessions");
    REQUIRE(pre);
    CHECK(pre->status == 204);

    server.stop();
    th.join();
}

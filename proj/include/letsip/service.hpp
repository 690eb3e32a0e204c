#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "letsip/data.hpp"
#include "letsip/enumerator.hpp"
#include "letsip/session.hpp"

namespace httplib {
class Server;
}

namespace letsip {

struct DatasetEntry {
    std::string name;
    std::filesystem::path data;
    std::optional<std::filesystem::path> labels;
    std::optional<std::filesystem::path> vocabulary;
    Support theta = 1;
};

/// JSON document:
///   {"datasets": [{"name", "data", "labels"?, "vocabulary"?, "theta"}],
///    "idle_timeout_minutes"?: 60}
/// Relative paths are resolved against base_dir.
struct ServerConfig {
    std::vector<DatasetEntry> datasets;
    std::chrono::minutes idle_timeout{60};

    static ServerConfig parse(const std::string& text, const std::filesystem::path& base_dir = {});
    static ServerConfig load(const std::filesystem::path& path);
};

struct ApiResponse {
    int status = 200;
    std::string body;  // JSON
};

/// The session API independent of any transport. Every method is safe to call
/// from concurrent threads; operations on one session are serialized.
class SessionService {
public:
    using Clock = std::function<std::chrono::steady_clock::time_point()>;

    explicit SessionService(std::chrono::minutes idle_timeout = std::chrono::minutes(60), Clock clock = nullptr);
    explicit SessionService(const ServerConfig& config, Clock clock = nullptr);
    ~SessionService();

    void register_dataset(const std::string& name, std::shared_ptr<const TransactionDB> db, Support theta);

    ApiResponse list_datasets() const;
    ApiResponse create_session(const std::string& body);
    ApiResponse get_query(const std::string& id);
    ApiResponse post_feedback(const std::string& id, const std::string& body);
    ApiResponse get_model(const std::string& id);
    ApiResponse get_metrics(const std::string& id);

    /// Drops sessions idle for longer than the timeout; returns how many.
    std::size_t evict_idle();
    std::size_t session_count() const;

private:
    struct Dataset;
    struct Entry;

    std::shared_ptr<Entry> find(const std::string& id);
    std::shared_ptr<const PatternSpace> space_for(Dataset& ds);
    std::string new_session_id();

    std::chrono::minutes idle_timeout_;
    Clock clock_;
    std::map<std::string, std::shared_ptr<Dataset>> datasets_;
    mutable std::mutex mutex_;  // guards sessions_ and id_counter_
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
    std::uint64_t id_counter_ = 0;
};

/// HTTP front end for a SessionService, with permissive CORS headers.
class HttpServer {
public:
    explicit HttpServer(SessionService& service);
    ~HttpServer();

    /// Blocks until stop().
    bool listen(const std::string& host, int port);
    /// Binds to a free port and returns it; follow with listen_after_bind().
    int bind_to_any_port(const std::string& host);
    bool listen_after_bind();
    void stop();
    bool is_running() const;

private:
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace letsip

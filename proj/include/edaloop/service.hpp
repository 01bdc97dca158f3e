#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "edaloop/orchestrator.hpp"

namespace edaloop::service {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path sessions_dir = "sessions";
    std::filesystem::path workspace_root = "workspaces";
    /// Directory whose subdirectories hold aggregate summary.json files.
    std::filesystem::path bench_dir = "bench";
    /// Relative paths in posted session configs resolve against this.
    std::filesystem::path config_base = ".";
    /// Shared token expected in the X-Edaloop-Token header; none when empty.
    std::string token;
    std::size_t max_points = 2000;
};

struct Request {
    std::string method;
    std::string path;
    std::string body;
    std::map<std::string, std::string> headers;
};

struct Response {
    int status = 200;
    nlohmann::json body;
};

/// Session API over persisted session records.
///
///   POST /sessions                        create and start (body: session config)
///   GET  /sessions                        list
///   GET  /sessions/{id}                   state, iteration summary, latest checks, graph
///   GET  /sessions/{id}/iterations/{n}    full iteration record
///   GET  /sessions/{id}/graph             connectivity graph of the latest netlist
///   POST /sessions/{id}/feedback          resume an interactive session (body: text)
///   POST /sessions/{id}/abort
///   GET  /bench/summaries
///
/// Sessions run on background threads; every GET reads the record files.
class Service {
public:
    explicit Service(ServiceConfig config);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Routes one request. Never throws.
    Response handle(const Request& request);

    /// Serves HTTP until stop(). Returns false when the port cannot be bound.
    bool listen();
    /// Binds an ephemeral port and serves on a background thread; returns the port.
    int start_background();
    void stop();

    /// Blocks until the session's job has finished (tests and CLI).
    void wait(const std::string& id);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace edaloop::service

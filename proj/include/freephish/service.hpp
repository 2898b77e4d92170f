#pragma once

#include "freephish/classifier.hpp"
#include "freephish/features.hpp"
#include "freephish/registry.hpp"
#include "freephish/snapshot.hpp"

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace freephish {

struct ServiceConfig {
    Seconds cache_ttl{15 * 60};
    std::chrono::milliseconds request_timeout{10'000};
    ExtractorConfig extractor = ExtractorConfig::defaults();
};

struct ClassifyRequest {
    std::string url;
    std::optional<std::string> html;
    std::string client_version;
};

/// Throws ParseError for anything other than an object with a non-empty
/// string "url" and optional string "html" / "client_version".
ClassifyRequest parse_classify_request(std::string_view body);

struct ClassifyResponse {
    std::string label;  // "phishing", "benign" or "unknown"
    std::optional<double> score;
    bool is_fhd = false;
    std::optional<std::string> fhd_name;
    std::optional<std::string> target_brand;
    std::string model_version;
    bool cache = false;
    std::vector<std::string> notes;

    std::string to_json() const;
    static ClassifyResponse from_json(std::string_view text);
};

struct HttpReply {
    int status = 200;
    std::string body;
};

/// Request handling without the HTTP layer. Model and registry are read-only
/// after load; the verdict cache is the only shared mutable state.
class ClassificationService {
public:
    ClassificationService(Registry registry, ServiceConfig config, const Clock& clock,
                          std::shared_ptr<Fetcher> fetcher = nullptr, std::shared_ptr<Scanner> scanner = nullptr);
    ~ClassificationService();
    ClassificationService(const ClassificationService&) = delete;
    ClassificationService& operator=(const ClassificationService&) = delete;

    void load_model(Forest model);
    void unload_model();
    std::optional<std::string> model_version() const;

    /// POST /classify. 400 for a malformed body, 503 without a model.
    HttpReply classify(std::string_view body);
    ClassifyResponse classify(const ClassifyRequest& request);
    /// GET /health
    HttpReply health() const;
    /// GET /registry
    HttpReply registry() const;

    std::size_t cache_size() const;

private:
    struct State;
    std::shared_ptr<State> state_;
};

/// HTTP front end for a ClassificationService.
class HttpServer {
public:
    explicit HttpServer(ClassificationService& service);
    ~HttpServer();

    /// Binds host:port; port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host = "127.0.0.1", int port = 0);
    /// Serves on a background thread.
    void start();
    /// Serves on the calling thread until stop().
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace freephish

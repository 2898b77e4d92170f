#include "freephish/service.hpp"

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <future>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <thread>

namespace freephish {

using nlohmann::json;

ClassifyRequest parse_classify_request(std::string_view body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        throw ParseError(fmt::format("request body is not JSON: {}", e.what()));
    }
    if (!j.is_object()) throw ParseError("request body must be an object");
    ClassifyRequest r;
    if (!j.contains("url") || !j["url"].is_string()) throw ParseError("\"url\" must be a string");
    r.url = j["url"].get<std::string>();
    if (trim(r.url).empty()) throw ParseError("\"url\" is empty");
    if (j.contains("html") && !j["html"].is_null()) {
        if (!j["html"].is_string()) throw ParseError("\"html\" must be a string");
        r.html = j["html"].get<std::string>();
    }
    if (j.contains("client_version") && !j["client_version"].is_null()) {
        if (!j["client_version"].is_string()) throw ParseError("\"client_version\" must be a string");
        r.client_version = j["client_version"].get<std::string>();
    }
    return r;
}

std::string ClassifyResponse::to_json() const {
    auto opt = [](const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); };
    json j = {{"verdict", {{"label", label}, {"score", score ? json(*score) : json(nullptr)}}},
              {"is_fhd", is_fhd},
              {"fhd_name", opt(fhd_name)},
              {"target_brand", opt(target_brand)},
              {"model_version", model_version},
              {"cache", cache},
              {"notes", notes}};
    return j.dump();
}

ClassifyResponse ClassifyResponse::from_json(std::string_view text) {
    const json j = json::parse(text);
    auto opt = [&](const char* key) -> std::optional<std::string> {
        if (!j.contains(key) || j[key].is_null()) return std::nullopt;
        return j[key].get<std::string>();
    };
    ClassifyResponse r;
    r.label = j.at("verdict").at("label").get<std::string>();
    if (!j["verdict"].at("score").is_null()) r.score = j["verdict"]["score"].get<double>();
    r.is_fhd = j.at("is_fhd").get<bool>();
    r.fhd_name = opt("fhd_name");
    r.target_brand = opt("target_brand");
    r.model_version = j.at("model_version").get<std::string>();
    r.cache = j.at("cache").get<bool>();
    r.notes = j.value("notes", std::vector<std::string>{});
    return r;
}

namespace {

std::string error_body(std::string_view code, std::string_view message) {
    return json{{"error", {{"code", code}, {"message", message}}}}.dump();
}

}  // namespace

struct ClassificationService::State {
    Registry registry;
    ServiceConfig config;
    const Clock& clock;
    std::shared_ptr<Fetcher> fetcher;
    std::shared_ptr<Scanner> scanner;

    mutable std::shared_mutex model_mu;
    std::shared_ptr<const Forest> model;

    struct CacheEntry {
        ClassifyResponse response;
        Timestamp stored_at;
    };
    mutable std::shared_mutex cache_mu;
    std::map<std::string, CacheEntry> cache;

    State(Registry r, ServiceConfig c, const Clock& clk, std::shared_ptr<Fetcher> f, std::shared_ptr<Scanner> s)
        : registry(std::move(r)), config(std::move(c)), clock(clk), fetcher(std::move(f)), scanner(std::move(s)) {
        config.extractor.normalize();
    }

    static ClassifyResponse run(const std::shared_ptr<State>& st, const std::shared_ptr<const Forest>& model,
                                const CanonicalUrl& url, const FhdMatch& m, const std::optional<std::string>& html);

    std::shared_ptr<const Forest> current_model() const {
        std::shared_lock lock(model_mu);
        return model;
    }
};

ClassificationService::ClassificationService(Registry registry, ServiceConfig config, const Clock& clock,
                                             std::shared_ptr<Fetcher> fetcher, std::shared_ptr<Scanner> scanner)
    : state_(std::make_shared<State>(std::move(registry), std::move(config), clock, std::move(fetcher),
                                     std::move(scanner))) {}

ClassificationService::~ClassificationService() = default;

void ClassificationService::load_model(Forest model) {
    auto m = std::make_shared<const Forest>(std::move(model));
    {
        std::unique_lock lock(state_->model_mu);
        state_->model = std::move(m);
    }
    std::unique_lock lock(state_->cache_mu);
    state_->cache.clear();
}

void ClassificationService::unload_model() {
    std::unique_lock lock(state_->model_mu);
    state_->model.reset();
}

std::optional<std::string> ClassificationService::model_version() const {
    auto m = state_->current_model();
    if (!m) return std::nullopt;
    return m->model_version;
}

std::size_t ClassificationService::cache_size() const {
    std::shared_lock lock(state_->cache_mu);
    return state_->cache.size();
}

ClassifyResponse ClassificationService::classify(const ClassifyRequest& request) {
    auto model = state_->current_model();
    if (!model) throw PreconditionError("no model loaded");
    const CanonicalUrl url = canonicalize(request.url);

    ClassifyResponse base;
    base.model_version = model->model_version;
    const auto m = state_->registry.match(url);
    if (!m) {
        base.label = to_string(Label::benign);
        base.score = 0.0;
        return base;
    }
    base.is_fhd = true;
    base.fhd_name = m->entry->name;

    const std::string key = url.serialized() + "\n" + (request.html ? sha256_hex(*request.html) : "-");
    const Timestamp now = state_->clock.now();
    {
        std::shared_lock lock(state_->cache_mu);
        const auto it = state_->cache.find(key);
        if (it != state_->cache.end() && it->second.response.model_version == model->model_version &&
            now - it->second.stored_at < state_->config.cache_ttl && now >= it->second.stored_at) {
            ClassifyResponse r = it->second.response;
            r.cache = true;
            return r;
        }
    }

    auto task = std::make_shared<std::packaged_task<ClassifyResponse()>>(
        [st = state_, model, url, match = *m, html = request.html] { return State::run(st, model, url, match, html); });
    auto fut = task->get_future();
    std::thread([task] { (*task)(); }).detach();
    if (fut.wait_for(state_->config.request_timeout) != std::future_status::ready) {
        ClassifyResponse r = base;
        r.label = "unknown";
        r.notes.push_back("timeout");
        return r;
    }
    ClassifyResponse r = fut.get();
    if (r.label != "unknown") {
        std::unique_lock lock(state_->cache_mu);
        state_->cache[key] = {r, now};
    }
    return r;
}

// Runs on a worker that may outlive the request; `st` keeps the state alive.
ClassifyResponse ClassificationService::State::run(const std::shared_ptr<State>& st,
                                                   const std::shared_ptr<const Forest>& model,
                                                   const CanonicalUrl& url, const FhdMatch& m,
                                                   const std::optional<std::string>& html) {
    ClassifyResponse r;
    r.model_version = model->model_version;
    r.is_fhd = true;
    r.fhd_name = m.entry->name;

    HttpResponse response;
    if (html) {
        response.headers = {{"Content-Type", "text/html; charset=utf-8"}};
        response.body = *html;
    } else if (!st->fetcher) {
        r.label = "unknown";
        r.notes.emplace_back("unfetched");
        return r;
    } else {
        try {
            response = st->fetcher->fetch(url);
        } catch (const TransportError& e) {
            r.label = "unknown";
            r.notes.emplace_back(e.kind() == TransportErrorKind::dns ? "unfetched"
                                                                       : fmt::format("fetch failed: {}", e.what()));
            return r;
        }
    }
    // Fixed fetch time: the verdict must not depend on when it was asked for.
    const Snapshot snap = make_snapshot(url, response, Timestamp{}, Discovery{});
    ExtractionContext ctx{st->registry, st->config.extractor, st->fetcher.get(), st->scanner.get(), nullptr};
    const FeatureVector fv = extract_features(snap, ctx);
    const Verdict v = predict(*model, fv);
    r.label = to_string(v.label);
    r.score = v.score;
    r.target_brand = fv.target_brand;
    return r;
}

HttpReply ClassificationService::classify(std::string_view body) {
    ClassifyRequest req;
    try {
        req = parse_classify_request(body);
    } catch (const ParseError& e) {
        return {400, error_body("bad_request", e.what())};
    }
    if (!state_->current_model()) return {503, error_body("no_model", "no model loaded")};
    try {
        return {200, classify(req).to_json()};
    } catch (const UrlError& e) {
        return {400, error_body("url", e.what())};
    } catch (const PreconditionError& e) {
        return {503, error_body("no_model", e.what())};
    } catch (const std::exception& e) {
        spdlog::error("classify {}: {}", req.url, e.what());
        return {500, error_body("internal", e.what())};
    }
}

HttpReply ClassificationService::health() const {
    const auto v = model_version();
    json j = {{"status", v ? "ok" : "no_model"},
              {"model_version", v ? json(*v) : json(nullptr)},
              {"registry_size", state_->registry.size()}};
    return {v ? 200 : 503, j.dump()};
}

HttpReply ClassificationService::registry() const {
    json domains = json::array();
    json fhds = json::array();
    for (const auto& e : state_->registry.entries()) {
        domains.push_back(e.base_domain);
        fhds.push_back({{"name", e.name}, {"base_domain", e.base_domain}});
    }
    json j = {{"size", state_->registry.size()}, {"base_domains", domains}, {"fhds", fhds}};
    return {200, j.dump()};
}

// ---------------------------------------------------------------------------

struct HttpServer::Impl {
    ClassificationService& service;
    httplib::Server server;
    std::thread thread;

    explicit Impl(ClassificationService& s) : service(s) {
        auto send = [](httplib::Response& res, const HttpReply& r) {
            res.status = r.status;
            res.set_content(r.body, "application/json");
        };
        server.Post("/classify", [this, send](const httplib::Request& req, httplib::Response& res) {
            send(res, service.classify(std::string_view(req.body)));
        });
        server.Get("/health", [this, send](const httplib::Request&, httplib::Response& res) {
            send(res, service.health());
        });
        server.Get("/registry", [this, send](const httplib::Request&, httplib::Response& res) {
            send(res, service.registry());
        });
    }
};

HttpServer::HttpServer(ClassificationService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port)
                                                                               ? port
                                                                               : -1);
    if (bound < 0) throw IoError(fmt::format("cannot bind {}:{}", host, port));
    return bound;
}

void HttpServer::start() {
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace freephish

#include "freephish/snapshot.hpp"

#include "freephish/html.hpp"

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <filesystem>
#include <regex>

namespace freephish {

using nlohmann::json;

std::string_view to_string(DiscoverySource s) {
    switch (s) {
        case DiscoverySource::twitter: return "twitter";
        case DiscoverySource::facebook: return "facebook";
        case DiscoverySource::file: return "file";
        case DiscoverySource::manual: return "manual";
    }
    return "manual";
}

DiscoverySource discovery_source_from(std::string_view s) {
    if (s == "twitter") return DiscoverySource::twitter;
    if (s == "facebook") return DiscoverySource::facebook;
    if (s == "file") return DiscoverySource::file;
    if (s == "manual") return DiscoverySource::manual;
    throw ParseError(fmt::format("unknown discovery source '{}'", s));
}

std::string_view to_string(LinkKind k) {
    switch (k) {
        case LinkKind::iframe: return "iframe";
        case LinkKind::button_link: return "button_link";
        case LinkKind::anchor: return "anchor";
    }
    return "anchor";
}

LinkKind link_kind_from(std::string_view s) {
    if (s == "iframe") return LinkKind::iframe;
    if (s == "button_link") return LinkKind::button_link;
    if (s == "anchor") return LinkKind::anchor;
    throw ParseError(fmt::format("unknown link kind '{}'", s));
}

std::string_view to_string(TransportErrorKind k) {
    switch (k) {
        case TransportErrorKind::dns: return "dns";
        case TransportErrorKind::connect: return "connect";
        case TransportErrorKind::timeout: return "timeout";
        case TransportErrorKind::tls: return "tls";
        case TransportErrorKind::other: return "other";
    }
    return "other";
}

namespace {

TransportErrorKind transport_kind_from(std::string_view s) {
    for (auto k : {TransportErrorKind::dns, TransportErrorKind::connect, TransportErrorKind::timeout,
                   TransportErrorKind::tls, TransportErrorKind::other})
        if (to_string(k) == s) return k;
    throw ParseError(fmt::format("unknown transport error kind '{}'", s));
}

}  // namespace

std::string_view to_string(IngestStatus s) {
    switch (s) {
        case IngestStatus::ingested: return "ingested";
        case IngestStatus::duplicate: return "duplicate";
        case IngestStatus::not_fhd: return "not_fhd";
        case IngestStatus::invalid_url: return "invalid_url";
        case IngestStatus::fetch_failed: return "fetch_failed";
    }
    return "not_fhd";
}

std::string snapshot_id(const CanonicalUrl& url, Timestamp fetch_time, std::string_view body) {
    return sha256_hex(url.serialized() + "\n" + format_timestamp(fetch_time) + "\n" + sha256_hex(body));
}

// ---------------------------------------------------------------------------
// Link extraction

namespace {

std::optional<std::string> scripted_target(std::string_view script) {
    static const std::regex re(
        R"((?:location(?:\.href)?\s*=\s*|location\.(?:assign|replace)\s*\(\s*|window\.open\s*\(\s*)['"]([^'"]+)['"])",
        std::regex::icase);
    std::match_results<std::string_view::const_iterator> m;
    if (std::regex_search(script.begin(), script.end(), m, re)) return m[1].str();
    return std::nullopt;
}

bool role_is_button(const html::Token& t) {
    const auto role = t.attr("role");
    return role && to_lower(trim(*role)) == "button";
}

}  // namespace

std::vector<LinkedTarget> extract_linked_targets(std::string_view body) {
    std::vector<LinkedTarget> out;
    // index into `out` of the innermost open <a href>, if any
    std::vector<std::optional<std::size_t>> open_anchors;
    for (const auto& t : html::tokenize(body)) {
        if (t.kind == html::TokenKind::start_tag) {
            if (t.name == "iframe") {
                if (auto src = t.attr("src"); src && !trim(*src).empty())
                    out.push_back({LinkKind::iframe, *src});
            } else if (t.name == "a") {
                auto href = t.attr("href");
                if (href) {
                    out.push_back({role_is_button(t) ? LinkKind::button_link : LinkKind::anchor, *href});
                    open_anchors.emplace_back(out.size() - 1);
                } else {
                    open_anchors.emplace_back(std::nullopt);
                }
                if (t.self_closing) open_anchors.pop_back();
            } else if (t.name == "button" ||
                       (t.name == "input" && to_lower(t.attr("type").value_or("")) == "button")) {
                if (!open_anchors.empty() && open_anchors.back()) {
                    out[*open_anchors.back()].kind = LinkKind::button_link;
                } else if (auto fa = t.attr("formaction")) {
                    out.push_back({LinkKind::button_link, *fa});
                } else if (auto onclick = t.attr("onclick")) {
                    if (auto target = scripted_target(*onclick))
                        out.push_back({LinkKind::button_link, *target});
                } else if (auto data_href = t.attr("data-href")) {
                    out.push_back({LinkKind::button_link, *data_href});
                }
            }
        } else if (t.kind == html::TokenKind::end_tag && t.name == "a" && !open_anchors.empty()) {
            open_anchors.pop_back();
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Feed

std::vector<FeedItem> load_feed(const std::string& path) {
    std::vector<FeedItem> items;
    std::size_t line_no = 0;
    for (const auto& raw : split(read_file(path), '\n')) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line.starts_with("#")) continue;
        try {
            const json j = json::parse(line);
            FeedItem item;
            item.url = j.at("url").get<std::string>();
            if (item.url.empty()) throw ParseError("empty url");
            item.source = discovery_source_from(j.value("source", std::string("file")));
            if (j.contains("post_id") && !j["post_id"].is_null())
                item.post_id = j["post_id"].get<std::string>();
            item.observed_at = parse_timestamp(j.at("observed_at").get<std::string>());
            items.push_back(std::move(item));
        } catch (const std::exception& e) {
            throw ParseError(fmt::format("{}:{}: {}", path, line_no, e.what()));
        }
    }
    return items;
}

// ---------------------------------------------------------------------------
// Fetching

std::optional<std::string> HttpResponse::header(std::string_view name) const {
    for (const auto& [k, v] : headers)
        if (to_lower(k) == to_lower(name)) return v;
    return std::nullopt;
}

namespace {

std::vector<Header> headers_from_json(const json& j) {
    std::vector<Header> out;
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) out.emplace_back(k, v.get<std::string>());
    } else if (j.is_array()) {
        for (const auto& pair : j) out.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
    }
    return out;
}

std::string body_from_json(const json& j, const std::filesystem::path& dir) {
    if (j.contains("body_file")) return read_file((dir / j["body_file"].get<std::string>()).string());
    if (j.contains("body_base64")) return base64_decode(j["body_base64"].get<std::string>());
    return j.value("body", std::string{});
}

}  // namespace

FixtureFetcher::FixtureFetcher(const std::string& dir) {
    const std::filesystem::path root(dir);
    const std::string manifest = (root / "responses.json").string();
    json j;
    try {
        j = json::parse(read_file(manifest));
    } catch (const json::parse_error& e) {
        throw ParseError(fmt::format("{}: {}", manifest, e.what()));
    }
    for (const auto& r : j.at("responses")) {
        const std::string url = r.at("url").get<std::string>();
        if (r.contains("error")) {
            add_error(url, transport_kind_from(r["error"].get<std::string>()),
                      r.value("message", std::string{}));
            continue;
        }
        HttpResponse resp;
        resp.status = r.value("status", 200);
        if (r.contains("headers")) resp.headers = headers_from_json(r["headers"]);
        resp.body = body_from_json(r, root);
        if (r.contains("download")) {
            const auto& d = r["download"];
            resp.download = DownloadArtifact{d.at("filename").get<std::string>(), body_from_json(d, root)};
        }
        add(url, std::move(resp));
    }
}

void FixtureFetcher::add(std::string_view url, HttpResponse response) {
    entries_[canonicalize(url).serialized()] = Entry{std::move(response), TransportErrorKind::other, {}};
}

void FixtureFetcher::add_error(std::string_view url, TransportErrorKind kind, std::string message) {
    entries_[canonicalize(url).serialized()] = Entry{std::nullopt, kind, std::move(message)};
}

bool FixtureFetcher::knows(const CanonicalUrl& url) const {
    return entries_.find(url.serialized()) != entries_.end();
}

HttpResponse FixtureFetcher::fetch(const CanonicalUrl& url) {
    ++fetches_;
    const auto it = entries_.find(url.serialized());
    if (it == entries_.end())
        throw TransportError(TransportErrorKind::dns, fmt::format("no fixture for {}", url.serialized()));
    if (!it->second.response)
        throw TransportError(it->second.error, it->second.message.empty()
                                                   ? fmt::format("{} error for {}", to_string(it->second.error),
                                                                 url.serialized())
                                                   : it->second.message);
    return *it->second.response;
}

std::vector<std::string> FixtureFetcher::urls() const {
    std::vector<std::string> out;
    for (const auto& [k, _] : entries_) out.push_back(k);
    return out;
}

namespace {

bool is_html_content(const HttpResponse& r) {
    const auto ct = r.header("content-type");
    if (!ct) return true;
    const std::string t = to_lower(*ct);
    return t.find("html") != std::string::npos || t.starts_with("text/");
}

bool is_attachment(const HttpResponse& r) {
    const auto cd = r.header("content-disposition");
    return cd && to_lower(*cd).find("attachment") != std::string::npos;
}

std::string attachment_name(const HttpResponse& r, const CanonicalUrl& url) {
    if (const auto cd = r.header("content-disposition")) {
        static const std::regex re(R"re(filename\s*=\s*"?([^";]+)"?)re", std::regex::icase);
        std::smatch m;
        if (std::regex_search(*cd, m, re)) return trim(m[1].str());
    }
    const auto slash = url.path.rfind('/');
    const std::string last = slash == std::string::npos ? url.path : url.path.substr(slash + 1);
    return last.empty() ? "download" : last;
}

Download describe(std::string filename, std::string_view bytes) {
    return Download{std::move(filename), bytes.size(), sha256_hex(bytes)};
}

}  // namespace

Snapshot make_snapshot(const CanonicalUrl& url, const HttpResponse& response, Timestamp fetch_time,
                       Discovery discovery, std::optional<std::string> screenshot_ref) {
    Snapshot s;
    s.url = url;
    s.fetch_time = fetch_time;
    s.http_status = response.status;
    s.headers = response.headers;
    s.discovery = std::move(discovery);
    s.screenshot_ref = std::move(screenshot_ref);
    if (is_html_content(response) && !is_attachment(response)) {
        s.body = response.body;
        s.linked_targets = extract_linked_targets(s.body);
        if (response.download) s.download = describe(response.download->filename, response.download->bytes);
    } else {
        s.download = describe(attachment_name(response, url), response.body);
    }
    s.id = snapshot_id(s.url, s.fetch_time, s.body);
    return s;
}

// ---------------------------------------------------------------------------
// Corpus

std::string snapshot_to_json_line(const Snapshot& s) {
    json j;
    j["id"] = s.id;
    j["url"] = s.url.serialized();
    j["url_original"] = s.url.original;
    j["fetch_time"] = format_timestamp(s.fetch_time);
    j["http_status"] = s.http_status;
    json headers = json::array();
    for (const auto& [k, v] : s.headers) headers.push_back({k, v});
    j["headers"] = headers;
    if (is_valid_utf8(s.body)) {
        j["body"] = s.body;
        j["body_encoding"] = "utf8";
    } else {
        j["body"] = base64_encode(s.body);
        j["body_encoding"] = "base64";
    }
    json disc;
    disc["source"] = to_string(s.discovery.source);
    disc["post_id"] = s.discovery.post_id ? json(*s.discovery.post_id) : json(nullptr);
    disc["first_seen"] = format_timestamp(s.discovery.first_seen);
    j["discovery"] = disc;
    json links = json::array();
    for (const auto& l : s.linked_targets) links.push_back({{"kind", to_string(l.kind)}, {"href", l.href}});
    j["linked_targets"] = links;
    if (s.download)
        j["download"] = {{"filename", s.download->filename},
                         {"byte_size", s.download->byte_size},
                         {"content_hash", s.download->content_hash}};
    else
        j["download"] = nullptr;
    j["screenshot_ref"] = s.screenshot_ref ? json(*s.screenshot_ref) : json(nullptr);
    // Invalid UTF-8 only ever reaches the dump through headers/hrefs; replace rather than throw.
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

Snapshot snapshot_from_json_line(std::string_view line) {
    const json j = json::parse(line);
    Snapshot s;
    s.id = j.at("id").get<std::string>();
    s.url = canonicalize(j.at("url").get<std::string>());
    s.url.original = j.value("url_original", s.url.serialized());
    s.fetch_time = parse_timestamp(j.at("fetch_time").get<std::string>());
    s.http_status = j.at("http_status").get<int>();
    for (const auto& h : j.at("headers")) s.headers.emplace_back(h.at(0).get<std::string>(), h.at(1).get<std::string>());
    const std::string encoding = j.value("body_encoding", std::string("utf8"));
    if (encoding == "base64") s.body = base64_decode(j.at("body").get<std::string>());
    else if (encoding == "utf8") s.body = j.at("body").get<std::string>();
    else throw ParseError(fmt::format("unknown body_encoding '{}'", encoding));
    const auto& d = j.at("discovery");
    s.discovery.source = discovery_source_from(d.at("source").get<std::string>());
    if (d.contains("post_id") && !d["post_id"].is_null()) s.discovery.post_id = d["post_id"].get<std::string>();
    s.discovery.first_seen = parse_timestamp(d.at("first_seen").get<std::string>());
    for (const auto& l : j.at("linked_targets"))
        s.linked_targets.push_back({link_kind_from(l.at("kind").get<std::string>()), l.at("href").get<std::string>()});
    if (j.contains("download") && !j["download"].is_null()) {
        const auto& dl = j["download"];
        s.download = Download{dl.at("filename").get<std::string>(), dl.at("byte_size").get<std::uint64_t>(),
                              dl.at("content_hash").get<std::string>()};
    }
    if (j.contains("screenshot_ref") && !j["screenshot_ref"].is_null())
        s.screenshot_ref = j["screenshot_ref"].get<std::string>();
    if (s.id != snapshot_id(s.url, s.fetch_time, s.body)) throw ParseError("id does not match content");
    return s;
}

CorpusWriter::CorpusWriter(const std::string& path) : path_(path) {
    if (std::filesystem::exists(path)) {
        CorpusReader reader(path, /*lenient=*/true);
        while (auto s = reader.next()) ids_.insert(s->id);
    }
    out_.open(path, std::ios::binary | std::ios::app);
    if (!out_) throw IoError(fmt::format("cannot open corpus '{}' for append", path));
}

bool CorpusWriter::append(const Snapshot& s) {
    std::lock_guard lock(mu_);
    if (ids_.contains(s.id)) return false;
    out_ << snapshot_to_json_line(s) << '\n';
    out_.flush();
    if (!out_) throw IoError(fmt::format("write to corpus '{}' failed", path_));
    ids_.insert(s.id);
    return true;
}

bool CorpusWriter::contains(const std::string& id) const {
    std::lock_guard lock(mu_);
    return ids_.contains(id);
}

std::size_t CorpusWriter::size() const {
    std::lock_guard lock(mu_);
    return ids_.size();
}

CorpusReader::CorpusReader(const std::string& path, bool lenient)
    : path_(path), in_(path, std::ios::binary), lenient_(lenient) {
    if (!in_) throw IoError(fmt::format("cannot open corpus '{}'", path));
}

std::optional<Snapshot> CorpusReader::next() {
    std::string line;
    while (std::getline(in_, line)) {
        if (trim(line).empty()) continue;
        ++record_;
        try {
            return snapshot_from_json_line(line);
        } catch (const std::exception& e) {
            const std::string msg = fmt::format("{}: record {}: {}", path_, record_, e.what());
            if (!lenient_) throw CorpusError(record_, msg);
            spdlog::warn("skipping corrupt corpus record: {}", msg);
            skipped_.push_back({record_, msg});
        }
    }
    if (in_.bad()) throw IoError(fmt::format("read error on corpus '{}'", path_));
    return std::nullopt;
}

std::vector<Snapshot> load_corpus(const std::string& path, bool lenient) {
    CorpusReader reader(path, lenient);
    std::vector<Snapshot> out;
    while (auto s = reader.next()) out.push_back(std::move(*s));
    return out;
}

// ---------------------------------------------------------------------------
// Ingest

IngestOutcome ingest_item(const FeedItem& item, Fetcher& fetcher, const Registry& registry,
                          CorpusWriter& corpus, std::optional<Timestamp> fetch_time) {
    IngestOutcome outcome;
    CanonicalUrl url;
    try {
        url = canonicalize(item.url);
    } catch (const UrlError& e) {
        outcome.status = IngestStatus::invalid_url;
        outcome.message = e.what();
        return outcome;
    }
    if (!match_fhd(url, registry)) {
        outcome.status = IngestStatus::not_fhd;
        return outcome;
    }
    HttpResponse response;
    try {
        response = fetcher.fetch(url);
    } catch (const TransportError& e) {
        spdlog::warn("fetch failed for {}: {}", url.serialized(), e.what());
        outcome.status = IngestStatus::fetch_failed;
        outcome.message = fmt::format("{}: {}", to_string(e.kind()), e.what());
        return outcome;
    }
    Snapshot s = make_snapshot(url, response, fetch_time.value_or(item.observed_at),
                               Discovery{item.source, item.post_id, item.observed_at});
    outcome.status = corpus.append(s) ? IngestStatus::ingested : IngestStatus::duplicate;
    outcome.snapshot = std::move(s);
    return outcome;
}

std::optional<Snapshot> ingest(const FeedItem& item, Fetcher& fetcher, const Registry& registry,
                               CorpusWriter& corpus, std::optional<Timestamp> fetch_time) {
    return ingest_item(item, fetcher, registry, corpus, fetch_time).snapshot;
}

FileFeed::FileFeed(std::vector<FeedItem> items) : items_(std::move(items)) {
    std::stable_sort(items_.begin(), items_.end(),
                     [](const FeedItem& a, const FeedItem& b) { return a.observed_at < b.observed_at; });
}

std::vector<FeedItem> FileFeed::poll(Timestamp now) {
    std::vector<FeedItem> out;
    while (next_ < items_.size() && items_[next_].observed_at <= now) out.push_back(items_[next_++]);
    return out;
}

IngestScheduler::IngestScheduler(Feed& feed, Fetcher& fetcher, const Registry& registry,
                                 CorpusWriter& corpus, Clock& clock, Seconds interval)
    : feed_(feed), fetcher_(fetcher), registry_(registry), corpus_(corpus), clock_(clock),
      interval_(interval) {
    if (interval.count() <= 0) throw PreconditionError("ingest interval must be positive");
}

std::vector<IngestOutcome> IngestScheduler::run_cycle() {
    const Timestamp now = clock_.now();
    std::vector<IngestOutcome> out;
    for (const auto& item : feed_.poll(now)) out.push_back(ingest_item(item, fetcher_, registry_, corpus_, now));
    return out;
}

void IngestScheduler::run(const std::function<bool()>& stop,
                          const std::function<void(const IngestOutcome&)>& on_outcome) {
    while (true) {
        const Timestamp started = clock_.now();
        for (const auto& o : run_cycle())
            if (on_outcome) on_outcome(o);
        if (stop()) return;
        clock_.sleep_until(started + interval_);
    }
}

}  // namespace freephish

#pragma once

#include "freephish/common.hpp"
#include "freephish/registry.hpp"

#include <atomic>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace freephish {

enum class DiscoverySource { twitter, facebook, file, manual };
enum class LinkKind { iframe, button_link, anchor };

std::string_view to_string(DiscoverySource s);
DiscoverySource discovery_source_from(std::string_view s);
std::string_view to_string(LinkKind k);
LinkKind link_kind_from(std::string_view s);

using Header = std::pair<std::string, std::string>;

struct LinkedTarget {
    LinkKind kind = LinkKind::anchor;
    std::string href;  // verbatim, not canonicalized

    friend bool operator==(const LinkedTarget&, const LinkedTarget&) = default;
};

struct Download {
    std::string filename;
    std::uint64_t byte_size = 0;
    std::string content_hash;  // lowercase hex SHA-256

    friend bool operator==(const Download&, const Download&) = default;
};

struct Discovery {
    DiscoverySource source = DiscoverySource::manual;
    std::optional<std::string> post_id;
    Timestamp first_seen{};

    friend bool operator==(const Discovery&, const Discovery&) = default;
};

struct Snapshot {
    std::string id;
    CanonicalUrl url;
    Timestamp fetch_time{};
    int http_status = 0;
    std::vector<Header> headers;
    std::string body;
    Discovery discovery;
    std::vector<LinkedTarget> linked_targets;
    std::optional<Download> download;
    std::optional<std::string> screenshot_ref;

    friend bool operator==(const Snapshot& a, const Snapshot& b) {
        return a.id == b.id && a.url == b.url && a.url.original == b.url.original &&
               a.fetch_time == b.fetch_time && a.http_status == b.http_status &&
               a.headers == b.headers && a.body == b.body && a.discovery == b.discovery &&
               a.linked_targets == b.linked_targets && a.download == b.download &&
               a.screenshot_ref == b.screenshot_ref;
    }
};

/// Deterministic id over (url.serialized, fetch_time, sha256(body)).
std::string snapshot_id(const CanonicalUrl& url, Timestamp fetch_time, std::string_view body);

/// iframe sources, anchors, and button-wrapped or button-scripted links, in document order.
std::vector<LinkedTarget> extract_linked_targets(std::string_view body);

struct FeedItem {
    std::string url;
    DiscoverySource source = DiscoverySource::file;
    std::optional<std::string> post_id;
    Timestamp observed_at{};
};

/// Reads a feed file: one JSON object per line {url, source, post_id?, observed_at}.
std::vector<FeedItem> load_feed(const std::string& path);

// ---------------------------------------------------------------------------
// Fetcher contract

enum class TransportErrorKind { dns, connect, timeout, tls, other };

std::string_view to_string(TransportErrorKind k);

class TransportError : public Error {
public:
    TransportError(TransportErrorKind kind, const std::string& message)
        : Error("transport", message), kind_(kind) {}
    TransportErrorKind kind() const noexcept { return kind_; }

private:
    TransportErrorKind kind_;
};

/// A file the page made the browser download.
struct DownloadArtifact {
    std::string filename;
    std::string bytes;
};

struct HttpResponse {
    int status = 200;
    std::vector<Header> headers;
    std::string body;
    std::optional<DownloadArtifact> download;

    std::optional<std::string> header(std::string_view name) const;
};

/// Given a URL returns status + headers + body, or throws TransportError.
/// Implementations must be safe to call from several threads.
class Fetcher {
public:
    virtual ~Fetcher() = default;
    virtual HttpResponse fetch(const CanonicalUrl& url) = 0;
};

/// Serves canned responses keyed by canonical URL; unknown URLs fail with a
/// dns TransportError. Loaded from <dir>/responses.json (see docs/FORMAT.md).
class FixtureFetcher final : public Fetcher {
public:
    FixtureFetcher() = default;
    /// Loads <dir>/responses.json.
    explicit FixtureFetcher(const std::string& dir);

    void add(std::string_view url, HttpResponse response);
    void add_error(std::string_view url, TransportErrorKind kind, std::string message = {});
    bool knows(const CanonicalUrl& url) const;

    HttpResponse fetch(const CanonicalUrl& url) override;

    std::size_t fetch_count() const { return fetches_.load(); }
    std::vector<std::string> urls() const;

private:
    struct Entry {
        std::optional<HttpResponse> response;
        TransportErrorKind error = TransportErrorKind::other;
        std::string message;
    };
    std::map<std::string, Entry, std::less<>> entries_;
    std::atomic<std::size_t> fetches_{0};
};

/// Builds a snapshot from a response without the FHD filter. Non-HTML and
/// attachment responses are stored with an empty body and `download` set.
Snapshot make_snapshot(const CanonicalUrl& url, const HttpResponse& response, Timestamp fetch_time,
                       Discovery discovery, std::optional<std::string> screenshot_ref = std::nullopt);

// ---------------------------------------------------------------------------
// Corpus (newline-delimited JSON, one snapshot per line)

class CorpusError : public Error {
public:
    CorpusError(std::size_t record, const std::string& message)
        : Error("corpus", message), record_(record) {}
    /// 1-based record number within the file.
    std::size_t record() const noexcept { return record_; }

private:
    std::size_t record_;
};

std::string snapshot_to_json_line(const Snapshot& s);
Snapshot snapshot_from_json_line(std::string_view line);

/// Serialized appender. Safe to share between ingest workers.
class CorpusWriter {
public:
    explicit CorpusWriter(const std::string& path);

    /// Appends unless a record with the same id already exists. Returns
    /// whether a record was written.
    bool append(const Snapshot& s);
    bool contains(const std::string& id) const;
    std::size_t size() const;

private:
    std::string path_;
    mutable std::mutex mu_;
    std::ofstream out_;
    std::set<std::string> ids_;
};

struct SkippedRecord {
    std::size_t record = 0;
    std::string message;
};

/// Yields snapshots in file order. In strict mode the first corrupt record
/// raises CorpusError; in lenient mode it is skipped and listed in skipped().
class CorpusReader {
public:
    CorpusReader(const std::string& path, bool lenient = false);

    std::optional<Snapshot> next();
    const std::vector<SkippedRecord>& skipped() const { return skipped_; }

private:
    std::string path_;
    std::ifstream in_;
    bool lenient_;
    std::size_t record_ = 0;
    std::vector<SkippedRecord> skipped_;
};

std::vector<Snapshot> load_corpus(const std::string& path, bool lenient = false);

// ---------------------------------------------------------------------------
// Ingest

enum class IngestStatus { ingested, duplicate, not_fhd, invalid_url, fetch_failed };

std::string_view to_string(IngestStatus s);

struct IngestOutcome {
    IngestStatus status = IngestStatus::not_fhd;
    std::optional<Snapshot> snapshot;
    std::string message;
};

/// Fetches and persists one feed item when its URL is FHD-hosted. Transport
/// failures come back as fetch_failed outcomes rather than exceptions.
/// `fetch_time` defaults to the item's observed_at.
IngestOutcome ingest_item(const FeedItem& item, Fetcher& fetcher, const Registry& registry,
                          CorpusWriter& corpus, std::optional<Timestamp> fetch_time = std::nullopt);

/// Snapshot for FHD URLs (new or already stored), nullopt otherwise.
std::optional<Snapshot> ingest(const FeedItem& item, Fetcher& fetcher, const Registry& registry,
                               CorpusWriter& corpus, std::optional<Timestamp> fetch_time = std::nullopt);

/// Source of new feed items, e.g. a social-media stream or a file.
class Feed {
public:
    virtual ~Feed() = default;
    /// Items that became visible since the previous poll, as of `now`.
    virtual std::vector<FeedItem> poll(Timestamp now) = 0;
};

/// Replays a feed file: items are released once now >= observed_at.
class FileFeed final : public Feed {
public:
    explicit FileFeed(std::vector<FeedItem> items);
    std::vector<FeedItem> poll(Timestamp now) override;
    bool exhausted() const { return next_ >= items_.size(); }

private:
    std::vector<FeedItem> items_;
    std::size_t next_ = 0;
};

/// Streaming loop: every `interval` poll the feed and ingest what arrived.
class IngestScheduler {
public:
    IngestScheduler(Feed& feed, Fetcher& fetcher, const Registry& registry, CorpusWriter& corpus,
                    Clock& clock, Seconds interval = Seconds{600});

    std::vector<IngestOutcome> run_cycle();
    /// Runs cycles until `stop` returns true (checked after each cycle).
    void run(const std::function<bool()>& stop,
             const std::function<void(const IngestOutcome&)>& on_outcome = {});

    Seconds interval() const { return interval_; }

private:
    Feed& feed_;
    Fetcher& fetcher_;
    const Registry& registry_;
    CorpusWriter& corpus_;
    Clock& clock_;
    Seconds interval_;
};

}  // namespace freephish

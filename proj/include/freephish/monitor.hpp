#pragma once

#include "freephish/registry.hpp"
#include "freephish/snapshot.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace freephish {

enum class Entity { gsb, phishtank, openphish, ecrimex, virustotal, platform_twitter, platform_facebook, registrar };

std::string_view to_string(Entity e);
Entity entity_from(std::string_view s);
const std::vector<Entity>& all_entities();

/// Blocklists report listed/not_listed, platforms and the registrar
/// active/removed, virustotal a detection count.
enum class EntityFamily { blocklist, takedown, scanner };
EntityFamily family_of(Entity e);

enum class StateKind { listed, not_listed, active, removed, detections };

struct EntityState {
    StateKind kind = StateKind::not_listed;
    int detections = 0;

    static EntityState listed() { return {StateKind::listed, 0}; }
    static EntityState not_listed() { return {StateKind::not_listed, 0}; }
    static EntityState active() { return {StateKind::active, 0}; }
    static EntityState removed() { return {StateKind::removed, 0}; }
    static EntityState detected(int n) { return {StateKind::detections, n}; }

    /// listed, removed, or at least `min_detections` detections.
    bool covers(int min_detections = 1) const;
    std::string str() const;

    friend bool operator==(const EntityState&, const EntityState&) = default;
};

/// Parses "listed", "not_listed", "active", "removed", "detections:<n>".
EntityState parse_state(std::string_view s);

class LogInvariantError : public Error {
public:
    explicit LogInvariantError(const std::string& message) : Error("log_invariant", message) {}
};

struct ObservationEvent {
    std::string url_id;  // canonical URL, serialized
    Entity entity = Entity::gsb;
    Timestamp timestamp{};
    EntityState state;
    bool revert = false;  // allows a covering state to fall back within the horizon
    std::optional<std::string> note;

    friend bool operator==(const ObservationEvent&, const ObservationEvent&) = default;
};

/// A failed poll: recorded for the operator, never counted as a state.
struct PollNote {
    std::string url_id;
    Entity entity = Entity::gsb;
    Timestamp timestamp{};
    std::string message;

    friend bool operator==(const PollNote&, const PollNote&) = default;
};

class ObservationLog {
public:
    explicit ObservationLog(Seconds horizon = Seconds{7 * 24 * 3600}) : horizon_(horizon) {}

    /// Keeps the earliest first_seen per URL.
    void set_first_seen(const std::string& url_id, Timestamp t);
    /// Throws LogInvariantError on a state of the wrong family, a timestamp
    /// older than the previous event for the same (url, entity), or an
    /// unflagged fallback from a covering state within the horizon.
    void append(ObservationEvent e);
    void add_note(PollNote n) { notes_.push_back(std::move(n)); }

    const std::vector<ObservationEvent>& events() const { return events_; }
    const std::vector<PollNote>& notes() const { return notes_; }
    const std::map<std::string, Timestamp>& first_seen() const { return first_seen_; }
    Seconds horizon() const { return horizon_; }

    std::optional<EntityState> last_state(const std::string& url_id, Entity e) const;
    /// Earliest removed event of `e` for the URL.
    std::optional<Timestamp> first_removed(const std::string& url_id, Entity e) const;

    /// Events sorted by (timestamp, url, entity); order within the file is
    /// not significant to any statistic.
    std::vector<ObservationEvent> canonical_events() const;

    std::string to_jsonl() const;
    static ObservationLog from_jsonl(std::string_view text, Seconds horizon = Seconds{7 * 24 * 3600});
    void save(const std::string& path) const;
    static ObservationLog load(const std::string& path, Seconds horizon = Seconds{7 * 24 * 3600});

private:
    Seconds horizon_;
    std::vector<ObservationEvent> events_;
    std::vector<PollNote> notes_;
    std::map<std::string, Timestamp> first_seen_;
    std::map<std::pair<std::string, Entity>, std::size_t> last_;  // index of last event per pair
};

// ---------------------------------------------------------------------------
// Host-side liveness

enum class Activity { active, removed };
std::string_view to_string(Activity a);

/// removed for 404/410 or a body carrying one of the FHD's takedown
/// fingerprints, active otherwise.
Activity is_active(const HttpResponse& response, const FhdEntry* entry);

/// Fetches and classifies. An unresolvable host counts as removed; other
/// transport errors propagate.
Activity is_active(const CanonicalUrl& url, Fetcher& fetcher, const Registry& registry);

// ---------------------------------------------------------------------------
// Entity clients

/// Reports the current state of a URL at one entity. May throw TransportError.
class EntityClient {
public:
    virtual ~EntityClient() = default;
    virtual Entity entity() const = 0;
    virtual EntityState query(const CanonicalUrl& url, Timestamp now) = 0;
};

/// Plays back a per-URL timeline of state changes. Before the first change a
/// URL is in the family's default state (not_listed, active, detections:0).
/// A change whose state is nullopt makes queries fail until the next change.
class TimelineClient final : public EntityClient {
public:
    struct Change {
        Timestamp at{};
        std::optional<EntityState> state;
    };

    explicit TimelineClient(Entity entity) : entity_(entity) {}
    void add(const std::string& url, Timestamp at, std::optional<EntityState> state);

    Entity entity() const override { return entity_; }
    EntityState query(const CanonicalUrl& url, Timestamp now) override;

private:
    Entity entity_;
    std::map<std::string, std::vector<Change>> timeline_;
};

/// Host liveness via a fetcher and is_active, reported as a takedown entity.
class FetchClient final : public EntityClient {
public:
    FetchClient(Entity entity, std::shared_ptr<Fetcher> fetcher, Registry registry);
    Entity entity() const override { return entity_; }
    EntityState query(const CanonicalUrl& url, Timestamp now) override;

private:
    Entity entity_;
    std::shared_ptr<Fetcher> fetcher_;
    Registry registry_;
};

struct Target {
    CanonicalUrl url;
    Timestamp first_seen{};
};

/// JSONL: {"url": ..., "first_seen": ...} per line.
std::vector<Target> load_targets(const std::string& path);

/// Client config (JSON): {"clients": [{"entity": "gsb", "type": "timeline",
/// "timeline": {"<url>": [{"after": "3h", "state": "listed"}, ...]}},
/// {"entity": "registrar", "type": "fetch", "fixtures": "<dir>"}]}.
/// "after" is relative to the target's first_seen; "at" is absolute. A
/// "state" of null makes the client fail from then on. Relative fixture
/// paths resolve against the config file's directory.
std::vector<std::unique_ptr<EntityClient>> load_clients(const std::string& path, const std::vector<Target>& targets,
                                                        const Registry& registry);

// ---------------------------------------------------------------------------
// Polling

struct PollResult {
    std::vector<ObservationEvent> events;
    std::vector<PollNote> notes;
};

/// One observation per (target, client) at clock.now(), skipping targets
/// past the log's horizon, and for takedown entities targets the registrar
/// (or that entity itself) has already seen removed. Clients are polled
/// concurrently; results are appended in (target, client) order.
PollResult poll_cycle(const std::vector<Target>& targets, const std::vector<EntityClient*>& clients,
                      const Clock& clock, ObservationLog& log);

class MonitorScheduler {
public:
    MonitorScheduler(std::vector<Target> targets, std::vector<EntityClient*> clients, Clock& clock,
                     ObservationLog& log, Seconds interval = Seconds{600});

    PollResult run_cycle();
    /// True once every target is past the horizon.
    bool done() const;
    /// Cycles every `interval` until done() or `stop` returns true.
    void run(const std::function<bool()>& stop = {}, const std::function<void(const PollResult&)>& on_cycle = {});

private:
    std::vector<Target> targets_;
    std::vector<EntityClient*> clients_;
    Clock& clock_;
    ObservationLog& log_;
    Seconds interval_;
};

// ---------------------------------------------------------------------------
// Statistics

inline const std::vector<double> kDefaultCurveHours = {1, 3, 6, 12, 16, 24, 48, 96, 168};

struct CoverageReport {
    Entity entity = Entity::gsb;
    std::size_t n_urls = 0;
    std::size_t covered = 0;
    double coverage_fraction = 0.0;
    std::optional<double> median_response_seconds;
    std::vector<std::pair<double, double>> curve;  // (hours since first_seen, cumulative fraction)

    std::string median_hhmm() const;
};

/// Response time of a URL is its first covering event minus first_seen
/// (clamped at 0); covered means that time is within `horizon`.
CoverageReport coverage(const ObservationLog& log, Entity entity, Seconds horizon,
                        const std::vector<double>& curve_hours = kDefaultCurveHours, int min_detections = 1);

std::string format_coverage(const CoverageReport& r);

/// Per-FHD breakdown of coverage for one entity.
std::map<std::string, CoverageReport> coverage_by_fhd(const ObservationLog& log, Entity entity, Seconds horizon,
                                                      const Registry& registry, int min_detections = 1);

class DegenerateTestError : public Error {
public:
    explicit DegenerateTestError(const std::string& message) : Error("degenerate", message) {}
};

struct MannWhitneyResult {
    double u = 0.0;  // for sample_a
    double z = 0.0;
    double p_two_sided = 1.0;
};

/// Normal approximation with tie correction and continuity correction.
/// Throws DegenerateTestError when every value is tied.
MannWhitneyResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b);

struct PairedTResult {
    double t = 0.0;
    double df = 0.0;
    double p_two_sided = 1.0;
};

/// Throws DegenerateTestError when the differences have zero variance.
PairedTResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

/// "<1e-12" below the clamp, otherwise 4 significant digits.
std::string format_p_value(double p);

}  // namespace freephish

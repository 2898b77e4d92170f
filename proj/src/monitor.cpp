#include "freephish/monitor.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <thread>
#include <variant>

namespace freephish {

using nlohmann::json;

std::string_view to_string(Entity e) {
    switch (e) {
        case Entity::gsb: return "gsb";
        case Entity::phishtank: return "phishtank";
        case Entity::openphish: return "openphish";
        case Entity::ecrimex: return "ecrimex";
        case Entity::virustotal: return "virustotal";
        case Entity::platform_twitter: return "platform_twitter";
        case Entity::platform_facebook: return "platform_facebook";
        case Entity::registrar: return "registrar";
    }
    return "gsb";
}

const std::vector<Entity>& all_entities() {
    static const std::vector<Entity> all = {Entity::gsb,        Entity::phishtank,        Entity::openphish,
                                            Entity::ecrimex,    Entity::virustotal,       Entity::platform_twitter,
                                            Entity::platform_facebook, Entity::registrar};
    return all;
}

Entity entity_from(std::string_view s) {
    for (Entity e : all_entities())
        if (to_string(e) == s) return e;
    throw ParseError(fmt::format("unknown entity '{}'", s));
}

EntityFamily family_of(Entity e) {
    switch (e) {
        case Entity::virustotal: return EntityFamily::scanner;
        case Entity::platform_twitter:
        case Entity::platform_facebook:
        case Entity::registrar: return EntityFamily::takedown;
        default: return EntityFamily::blocklist;
    }
}

namespace {

EntityFamily family_of(StateKind k) {
    switch (k) {
        case StateKind::listed:
        case StateKind::not_listed: return EntityFamily::blocklist;
        case StateKind::active:
        case StateKind::removed: return EntityFamily::takedown;
        case StateKind::detections: return EntityFamily::scanner;
    }
    return EntityFamily::blocklist;
}

EntityState default_state(Entity e) {
    switch (family_of(e)) {
        case EntityFamily::blocklist: return EntityState::not_listed();
        case EntityFamily::takedown: return EntityState::active();
        case EntityFamily::scanner: return EntityState::detected(0);
    }
    return EntityState::not_listed();
}

}  // namespace

bool EntityState::covers(int min_detections) const {
    switch (kind) {
        case StateKind::listed:
        case StateKind::removed: return true;
        case StateKind::detections: return detections >= min_detections;
        default: return false;
    }
}

std::string EntityState::str() const {
    switch (kind) {
        case StateKind::listed: return "listed";
        case StateKind::not_listed: return "not_listed";
        case StateKind::active: return "active";
        case StateKind::removed: return "removed";
        case StateKind::detections: return fmt::format("detections:{}", detections);
    }
    return "not_listed";
}

EntityState parse_state(std::string_view s) {
    if (s == "listed") return EntityState::listed();
    if (s == "not_listed") return EntityState::not_listed();
    if (s == "active") return EntityState::active();
    if (s == "removed") return EntityState::removed();
    if (s.starts_with("detections:")) {
        const auto digits = s.substr(11);
        int n = -1;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
        if (ec == std::errc{} && ptr == digits.data() + digits.size() && n >= 0) return EntityState::detected(n);
    }
    throw ParseError(fmt::format("unknown state '{}'", s));
}

// ---------------------------------------------------------------------------
// Log

void ObservationLog::set_first_seen(const std::string& url_id, Timestamp t) {
    auto [it, inserted] = first_seen_.emplace(url_id, t);
    if (!inserted && t < it->second) it->second = t;
}

void ObservationLog::append(ObservationEvent e) {
    if (family_of(e.state.kind) != family_of(e.entity))
        throw LogInvariantError(fmt::format("{} cannot report state {}", to_string(e.entity), e.state.str()));
    if (e.state.kind == StateKind::detections && e.state.detections < 0)
        throw LogInvariantError("negative detection count");
    const auto key = std::make_pair(e.url_id, e.entity);
    if (const auto it = last_.find(key); it != last_.end()) {
        const ObservationEvent& prev = events_[it->second];
        if (e.timestamp < prev.timestamp)
            throw LogInvariantError(fmt::format("{} {}: event at {} precedes {}", e.url_id, to_string(e.entity),
                                                format_timestamp(e.timestamp), format_timestamp(prev.timestamp)));
        const bool was_sticky = prev.state.kind == StateKind::listed || prev.state.kind == StateKind::removed;
        const bool falls_back = e.state.kind == StateKind::not_listed || e.state.kind == StateKind::active;
        const auto fs = first_seen_.find(e.url_id);
        const bool within = fs == first_seen_.end() || e.timestamp - fs->second <= horizon_;
        if (was_sticky && falls_back && within && !e.revert)
            throw LogInvariantError(fmt::format("{} {}: {} -> {} without revert flag", e.url_id, to_string(e.entity),
                                                prev.state.str(), e.state.str()));
    }
    last_[key] = events_.size();
    events_.push_back(std::move(e));
}

std::optional<EntityState> ObservationLog::last_state(const std::string& url_id, Entity e) const {
    const auto it = last_.find({url_id, e});
    if (it == last_.end()) return std::nullopt;
    return events_[it->second].state;
}

std::optional<Timestamp> ObservationLog::first_removed(const std::string& url_id, Entity e) const {
    std::optional<Timestamp> best;
    for (const auto& ev : events_)
        if (ev.url_id == url_id && ev.entity == e && ev.state.kind == StateKind::removed &&
            (!best || ev.timestamp < *best))
            best = ev.timestamp;
    return best;
}

std::vector<ObservationEvent> ObservationLog::canonical_events() const {
    std::vector<ObservationEvent> out = events_;
    std::stable_sort(out.begin(), out.end(), [](const ObservationEvent& a, const ObservationEvent& b) {
        return std::tie(a.timestamp, a.url_id, a.entity) < std::tie(b.timestamp, b.url_id, b.entity);
    });
    return out;
}

std::string ObservationLog::to_jsonl() const {
    std::string out;
    for (const auto& [url, t] : first_seen_)
        out += json{{"type", "first_seen"}, {"url", url}, {"at", format_timestamp(t)}}.dump() + "\n";
    for (const auto& e : events_) {
        json j = {{"type", "event"},
                  {"url", e.url_id},
                  {"entity", to_string(e.entity)},
                  {"at", format_timestamp(e.timestamp)},
                  {"state", e.state.str()}};
        if (e.revert) j["revert"] = true;
        if (e.note) j["note"] = *e.note;
        out += j.dump() + "\n";
    }
    for (const auto& n : notes_)
        out += json{{"type", "note"},
                    {"url", n.url_id},
                    {"entity", to_string(n.entity)},
                    {"at", format_timestamp(n.timestamp)},
                    {"message", n.message}}
                   .dump() +
               "\n";
    return out;
}

ObservationLog ObservationLog::from_jsonl(std::string_view text, Seconds horizon) {
    ObservationLog log(horizon);
    std::vector<std::pair<std::size_t, json>> records;
    std::size_t line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line.starts_with("#")) continue;
        try {
            records.emplace_back(line_no, json::parse(line));
        } catch (const json::parse_error& e) {
            throw ParseError(fmt::format("log line {}: {}", line_no, e.what()));
        }
    }
    // first_seen lines may come anywhere; they must be known before events are checked
    for (const auto& [n, j] : records) {
        try {
            if (j.at("type") == "first_seen")
                log.set_first_seen(j.at("url").get<std::string>(), parse_timestamp(j.at("at").get<std::string>()));
        } catch (const json::exception& e) {
            throw ParseError(fmt::format("log line {}: {}", n, e.what()));
        }
    }
    for (const auto& [n, j] : records) {
        try {
            const std::string type = j.at("type").get<std::string>();
            if (type == "event") {
                ObservationEvent e;
                e.url_id = j.at("url").get<std::string>();
                e.entity = entity_from(j.at("entity").get<std::string>());
                e.timestamp = parse_timestamp(j.at("at").get<std::string>());
                e.state = parse_state(j.at("state").get<std::string>());
                e.revert = j.value("revert", false);
                if (j.contains("note")) e.note = j["note"].get<std::string>();
                log.append(std::move(e));
            } else if (type == "note") {
                log.add_note({j.at("url").get<std::string>(), entity_from(j.at("entity").get<std::string>()),
                              parse_timestamp(j.at("at").get<std::string>()), j.value("message", std::string{})});
            } else if (type != "first_seen") {
                throw ParseError(fmt::format("unknown record type '{}'", type));
            }
        } catch (const json::exception& e) {
            throw ParseError(fmt::format("log line {}: {}", n, e.what()));
        } catch (const Error& e) {
            if (e.code() == "log_invariant") throw LogInvariantError(fmt::format("log line {}: {}", n, e.what()));
            throw ParseError(fmt::format("log line {}: {}", n, e.what()));
        }
    }
    return log;
}

void ObservationLog::save(const std::string& path) const { write_file(path, to_jsonl()); }

ObservationLog ObservationLog::load(const std::string& path, Seconds horizon) {
    return from_jsonl(read_file(path), horizon);
}

// ---------------------------------------------------------------------------
// Liveness

std::string_view to_string(Activity a) { return a == Activity::active ? "active" : "removed"; }

Activity is_active(const HttpResponse& response, const FhdEntry* entry) {
    if (response.status == 404 || response.status == 410) return Activity::removed;
    if (entry)
        for (const auto& fp : entry->takedown_fingerprints)
            if (icontains(response.body, fp)) return Activity::removed;
    if (response.status >= 400)
        spdlog::info("status {} without a takedown fingerprint{}; treating as active", response.status,
                     entry ? fmt::format(" ({})", entry->name) : std::string{});
    return Activity::active;
}

Activity is_active(const CanonicalUrl& url, Fetcher& fetcher, const Registry& registry) {
    HttpResponse resp;
    try {
        resp = fetcher.fetch(url);
    } catch (const TransportError& e) {
        if (e.kind() == TransportErrorKind::dns) return Activity::removed;
        throw;
    }
    const auto m = registry.match(url);
    return is_active(resp, m ? m->entry : nullptr);
}

// ---------------------------------------------------------------------------
// Clients

void TimelineClient::add(const std::string& url, Timestamp at, std::optional<EntityState> state) {
    if (state && family_of(state->kind) != family_of(entity_))
        throw PreconditionError(fmt::format("{} cannot report state {}", to_string(entity_), state->str()));
    auto& changes = timeline_[canonicalize(url).serialized()];
    changes.push_back({at, state});
    std::stable_sort(changes.begin(), changes.end(), [](const Change& a, const Change& b) { return a.at < b.at; });
}

EntityState TimelineClient::query(const CanonicalUrl& url, Timestamp now) {
    EntityState state = default_state(entity_);
    const auto it = timeline_.find(url.serialized());
    if (it == timeline_.end()) return state;
    const Change* current = nullptr;
    for (const auto& c : it->second)
        if (c.at <= now) current = &c;
    if (!current) return state;
    if (!current->state)
        throw TransportError(TransportErrorKind::timeout,
                             fmt::format("{} unavailable for {}", to_string(entity_), url.serialized()));
    return *current->state;
}

FetchClient::FetchClient(Entity entity, std::shared_ptr<Fetcher> fetcher, Registry registry)
    : entity_(entity), fetcher_(std::move(fetcher)), registry_(std::move(registry)) {
    if (family_of(entity) != EntityFamily::takedown)
        throw PreconditionError(fmt::format("fetch client cannot act as {}", to_string(entity)));
}

EntityState FetchClient::query(const CanonicalUrl& url, Timestamp) {
    return is_active(url, *fetcher_, registry_) == Activity::removed ? EntityState::removed() : EntityState::active();
}

std::vector<Target> load_targets(const std::string& path) {
    std::vector<Target> out;
    std::size_t line_no = 0;
    for (const auto& raw : split(read_file(path), '\n')) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line.starts_with("#")) continue;
        try {
            const json j = json::parse(line);
            out.push_back({canonicalize(j.at("url").get<std::string>()),
                           parse_timestamp(j.at("first_seen").get<std::string>())});
        } catch (const std::exception& e) {
            throw ParseError(fmt::format("{}:{}: {}", path, line_no, e.what()));
        }
    }
    return out;
}

std::vector<std::unique_ptr<EntityClient>> load_clients(const std::string& path, const std::vector<Target>& targets,
                                                        const Registry& registry) {
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    std::map<std::string, Timestamp> first_seen;
    for (const auto& t : targets) first_seen[t.url.serialized()] = t.first_seen;

    std::vector<std::unique_ptr<EntityClient>> out;
    try {
        const json j = json::parse(read_file(path));
        for (const auto& c : j.at("clients")) {
            const Entity entity = entity_from(c.at("entity").get<std::string>());
            const std::string type = c.at("type").get<std::string>();
            if (type == "timeline") {
                auto client = std::make_unique<TimelineClient>(entity);
                for (const auto& [url, changes] : c.at("timeline").items()) {
                    const std::string key = canonicalize(url).serialized();
                    for (const auto& ch : changes) {
                        Timestamp at;
                        if (ch.contains("at")) {
                            at = parse_timestamp(ch["at"].get<std::string>());
                        } else {
                            const auto fs = first_seen.find(key);
                            if (fs == first_seen.end())
                                throw ParseError(fmt::format("'after' used for {} which is not a target", url));
                            at = fs->second + parse_duration(ch.at("after").get<std::string>());
                        }
                        std::optional<EntityState> state;
                        if (!ch.at("state").is_null()) state = parse_state(ch["state"].get<std::string>());
                        client->add(key, at, state);
                    }
                }
                out.push_back(std::move(client));
            } else if (type == "fetch") {
                std::filesystem::path dir = c.at("fixtures").get<std::string>();
                if (dir.is_relative()) dir = base / dir;
                out.push_back(std::make_unique<FetchClient>(entity, std::make_shared<FixtureFetcher>(dir.string()),
                                                            registry));
            } else {
                throw ParseError(fmt::format("unknown client type '{}'", type));
            }
        }
    } catch (const json::exception& e) {
        throw ParseError(fmt::format("{}: {}", path, e.what()));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Polling

PollResult poll_cycle(const std::vector<Target>& targets, const std::vector<EntityClient*>& clients,
                      const Clock& clock, ObservationLog& log) {
    const Timestamp now = clock.now();
    for (const auto& t : targets) log.set_first_seen(t.url.serialized(), t.first_seen);

    // which (target, client) pairs are still being watched
    std::vector<std::vector<bool>> due(targets.size(), std::vector<bool>(clients.size(), false));
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const auto& t = targets[i];
        if (now < t.first_seen || now - t.first_seen > log.horizon()) continue;
        const std::string id = t.url.serialized();
        const bool registrar_removed = log.first_removed(id, Entity::registrar).has_value();
        for (std::size_t c = 0; c < clients.size(); ++c) {
            const Entity e = clients[c]->entity();
            if (family_of(e) == EntityFamily::takedown && (registrar_removed || log.first_removed(id, e))) continue;
            due[i][c] = true;
        }
    }

    using Outcome = std::variant<std::monostate, EntityState, std::string>;
    std::vector<std::vector<Outcome>> results(targets.size(), std::vector<Outcome>(clients.size()));
    auto poll_client = [&](std::size_t c) {
        for (std::size_t i = 0; i < targets.size(); ++i) {
            if (!due[i][c]) continue;
            try {
                results[i][c] = clients[c]->query(targets[i].url, now);
            } catch (const TransportError& e) {
                results[i][c] = fmt::format("{}: {}", to_string(e.kind()), e.what());
            }
        }
    };
    if (clients.size() <= 1) {
        for (std::size_t c = 0; c < clients.size(); ++c) poll_client(c);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t c = 0; c < clients.size(); ++c) pool.emplace_back(poll_client, c);
        for (auto& th : pool) th.join();
    }

    PollResult out;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        for (std::size_t c = 0; c < clients.size(); ++c) {
            const auto& r = results[i][c];
            const std::string id = targets[i].url.serialized();
            const Entity e = clients[c]->entity();
            if (const auto* s = std::get_if<EntityState>(&r)) {
                ObservationEvent ev{id, e, now, *s, false, std::nullopt};
                // a takedown entity is not expected to bring a site back; blocklists may delist
                if (const auto prev = log.last_state(id, e);
                    prev && prev->covers() && !s->covers() && s->kind != StateKind::detections) {
                    ev.revert = true;
                    ev.note = "state reverted";
                }
                log.append(ev);
                out.events.push_back(std::move(ev));
            } else if (const auto* msg = std::get_if<std::string>(&r)) {
                PollNote n{id, e, now, *msg};
                spdlog::warn("poll {} {}: {}", to_string(e), id, *msg);
                log.add_note(n);
                out.notes.push_back(std::move(n));
            }
        }
    }
    return out;
}

MonitorScheduler::MonitorScheduler(std::vector<Target> targets, std::vector<EntityClient*> clients, Clock& clock,
                                   ObservationLog& log, Seconds interval)
    : targets_(std::move(targets)), clients_(std::move(clients)), clock_(clock), log_(log), interval_(interval) {
    if (interval.count() <= 0) throw PreconditionError("poll interval must be positive");
}

PollResult MonitorScheduler::run_cycle() { return poll_cycle(targets_, clients_, clock_, log_); }

bool MonitorScheduler::done() const {
    const Timestamp now = clock_.now();
    return std::all_of(targets_.begin(), targets_.end(),
                       [&](const Target& t) { return now - t.first_seen > log_.horizon(); });
}

void MonitorScheduler::run(const std::function<bool()>& stop, const std::function<void(const PollResult&)>& on_cycle) {
    while (!done()) {
        const Timestamp started = clock_.now();
        const PollResult r = run_cycle();
        if (on_cycle) on_cycle(r);
        if (stop && stop()) return;
        clock_.sleep_until(started + interval_);
    }
}

// ---------------------------------------------------------------------------
// Coverage

std::string CoverageReport::median_hhmm() const {
    if (!median_response_seconds) return "n/a";
    return format_hhmm(Seconds{static_cast<Seconds::rep>(std::llround(*median_response_seconds))});
}

namespace {

CoverageReport coverage_over(const std::vector<ObservationEvent>& events,
                             const std::map<std::string, Timestamp>& first_seen, Entity entity, Seconds horizon,
                             const std::vector<double>& curve_hours, int min_detections) {
    CoverageReport r;
    r.entity = entity;
    r.n_urls = first_seen.size();
    std::map<std::string, Timestamp> first_cover;
    for (const auto& e : events) {
        if (e.entity != entity || !e.state.covers(min_detections) || !first_seen.count(e.url_id)) continue;
        auto [it, inserted] = first_cover.emplace(e.url_id, e.timestamp);
        if (!inserted && e.timestamp < it->second) it->second = e.timestamp;
    }
    std::vector<double> gaps;
    for (const auto& [url, t] : first_cover) {
        const Seconds gap = std::max(Seconds{0}, t - first_seen.at(url));
        if (gap <= horizon) gaps.push_back(static_cast<double>(gap.count()));
    }
    std::sort(gaps.begin(), gaps.end());
    r.covered = gaps.size();
    const double n = static_cast<double>(r.n_urls);
    r.coverage_fraction = r.n_urls == 0 ? 0.0 : static_cast<double>(r.covered) / n;
    if (!gaps.empty()) r.median_response_seconds = median(gaps);

    const double horizon_hours = static_cast<double>(horizon.count()) / 3600.0;
    auto fraction_by = [&](double hours) {
        if (r.n_urls == 0) return 0.0;
        const double limit = hours * 3600.0;
        const auto k = std::upper_bound(gaps.begin(), gaps.end(), limit) - gaps.begin();
        return static_cast<double>(k) / n;
    };
    for (double h : curve_hours)
        if (h < horizon_hours) r.curve.emplace_back(h, fraction_by(h));
    r.curve.emplace_back(horizon_hours, r.coverage_fraction);
    return r;
}

}  // namespace

CoverageReport coverage(const ObservationLog& log, Entity entity, Seconds horizon,
                        const std::vector<double>& curve_hours, int min_detections) {
    return coverage_over(log.canonical_events(), log.first_seen(), entity, horizon, curve_hours, min_detections);
}

std::map<std::string, CoverageReport> coverage_by_fhd(const ObservationLog& log, Entity entity, Seconds horizon,
                                                      const Registry& registry, int min_detections) {
    std::map<std::string, std::map<std::string, Timestamp>> groups;
    std::map<std::string, std::string> group_of;
    for (const auto& [url, t] : log.first_seen()) {
        std::string name = "(not fhd)";
        try {
            if (const auto m = registry.match(canonicalize(url))) name = m->entry->name;
        } catch (const UrlError&) {
        }
        groups[name][url] = t;
        group_of[url] = name;
    }
    const auto events = log.canonical_events();
    std::map<std::string, CoverageReport> out;
    for (const auto& [name, fs] : groups)
        out[name] = coverage_over(events, fs, entity, horizon, kDefaultCurveHours, min_detections);
    return out;
}

std::string format_coverage(const CoverageReport& r) {
    std::string out = fmt::format("entity\t{}\nurls\t{}\ncovered\t{}\ncoverage\t{:.1f}%\nmedian_response\t{}\n",
                                  to_string(r.entity), r.n_urls, r.covered, 100.0 * r.coverage_fraction,
                                  r.median_hhmm());
    out += "curve_hours\tfraction\n";
    for (const auto& [h, f] : r.curve) out += fmt::format("{:g}\t{:.4f}\n", h, f);
    return out;
}

// ---------------------------------------------------------------------------
// Tests

MannWhitneyResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) throw PreconditionError("Mann-Whitney U needs at least 2 values per sample");
    const std::size_t n1 = a.size(), n2 = b.size(), n = n1 + n2;
    std::vector<std::pair<double, bool>> all;  // value, from a
    for (double v : a) all.emplace_back(v, true);
    for (double v : b) all.emplace_back(v, false);
    std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    double rank_a = 0, tie_term = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && all[j + 1].first == all[i].first) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        for (std::size_t k = i; k <= j; ++k)
            if (all[k].second) rank_a += avg;
        i = j + 1;
    }
    const double dn1 = double(n1), dn2 = double(n2), dn = double(n);
    MannWhitneyResult r;
    r.u = rank_a - dn1 * (dn1 + 1) / 2.0;
    const double mu = dn1 * dn2 / 2.0;
    const double var = dn1 * dn2 / 12.0 * ((dn + 1) - tie_term / (dn * (dn - 1)));
    if (var <= 0) throw DegenerateTestError("every value is tied; the rank statistic has zero variance");
    const double dev = std::max(0.0, std::abs(r.u - mu) - 0.5);
    r.z = (r.u >= mu ? dev : -dev) / std::sqrt(var);
    r.p_two_sided = std::min(1.0, std::erfc(std::abs(r.z) / std::sqrt(2.0)));
    return r;
}

PairedTResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw PreconditionError("paired t-test needs samples of equal length");
    if (a.size() < 2) throw PreconditionError("paired t-test needs at least 2 pairs");
    const std::size_t n = a.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / double(n);
    double ss = 0;
    for (double v : d) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / double(n - 1));
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean))))
        throw DegenerateTestError("differences have zero variance; t is undefined");
    PairedTResult r;
    r.df = double(n - 1);
    r.t = mean / (sd / std::sqrt(double(n)));
    const boost::math::students_t dist(r.df);
    r.p_two_sided = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))));
    return r;
}

std::string format_p_value(double p) {
    if (p < 1e-12) return "<1e-12";
    return fmt::format("{:.4g}", p);
}

}  // namespace freephish

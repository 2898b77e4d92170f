#include "support.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>

#include <unistd.h>

#ifndef FREEPHISH_FIXTURE_DIR
#error "FREEPHISH_FIXTURE_DIR must be defined"
#endif

namespace fptest {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fixture_path(const std::string& rel) { return (fs::path(FREEPHISH_FIXTURE_DIR) / rel).string(); }

std::string temp_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    const auto dir = fs::temp_directory_path() /
                     fmt::format("freephish-{}-{}-{}", tag, static_cast<long>(::getpid()), counter++);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

// ---------------------------------------------------------------------------

namespace {

double parse_fraction(const json& v) {
    if (v.is_number()) return v.get<double>();
    const std::string s = v.get<std::string>();
    const auto slash = s.find('/');
    if (slash == std::string::npos) return std::stod(s);
    return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
}

}  // namespace

std::vector<GoldenPage> load_golden_manifest() {
    const json j = json::parse(read_file(fixture_path("golden/manifest.json")));
    std::vector<GoldenPage> out;
    for (const auto& p : j.at("pages")) {
        GoldenPage g;
        g.name = p.at("name").get<std::string>();
        g.url = p.at("url").get<std::string>();
        g.label = label_from(p.at("label").get<std::string>());
        const auto& e = p.at("expected");
        std::array<double, kFeatureCount> v{};
        for (std::size_t i = 0; i < kFeatureCount; ++i) v[i] = parse_fraction(e.at(std::string(feature_names()[i])));
        g.expected = FeatureVector::from_values(v);
        if (!p.at("target_brand").is_null()) g.target_brand = p["target_brand"].get<std::string>();
        g.expected.target_brand = g.target_brand;
        out.push_back(std::move(g));
    }
    return out;
}

FeatureVector extract_golden(const GoldenPage& page, FixtureFetcher& fetcher, FixtureScanner& scanner,
                             const ExtractorConfig& config) {
    const CanonicalUrl url = canonicalize(page.url);
    const Snapshot snap =
        make_snapshot(url, fetcher.fetch(url), parse_timestamp("2022-04-01T12:00:00Z"),
                      Discovery{DiscoverySource::file, std::nullopt, parse_timestamp("2022-04-01T11:50:00Z")});
    ExtractionContext ctx{Registry::builtin(), config, &fetcher, &scanner, nullptr};
    return extract_features(snap, ctx);
}

std::string describe(const FeatureVector& v) {
    std::string s = "(";
    const auto vals = v.values();
    for (std::size_t i = 0; i < vals.size(); ++i) s += fmt::format("{}{:g}", i ? "," : "", vals[i]);
    return s + ") brand=" + v.target_brand.value_or("-");
}

// ---------------------------------------------------------------------------

std::size_t levenshtein_table(const std::string& a, const std::string& b) {
    std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i)
        for (std::size_t j = 1; j <= b.size(); ++j)
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u)});
    return d[a.size()][b.size()];
}

double auc_pair_count(const std::vector<double>& scores, const std::vector<Label>& labels) {
    double wins = 0, pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != Label::phishing) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != Label::benign) continue;
            pairs += 1;
            if (scores[i] > scores[j]) wins += 1;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / pairs;
}

double mann_whitney_pair_count(const std::vector<double>& a, const std::vector<double>& b) {
    double u = 0;
    for (double x : a)
        for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
    return u;
}

namespace {

double tag_sim(const std::string& t, const std::string& u) {
    const double m = static_cast<double>(std::max(t.size(), u.size()));
    if (m == 0) return 1.0;
    return 1.0 - static_cast<double>(levenshtein_table(t, u)) / m;
}

double direction(const TagSequence& a, const TagSequence& b) {
    std::vector<double> tmax;
    for (const auto& t : a) {
        double best = 0;
        for (const auto& u : b) best = std::max(best, tag_sim(t, u));
        tmax.push_back(best);
    }
    std::sort(tmax.begin(), tmax.end());
    const std::size_t n = tmax.size();
    return n % 2 ? tmax[n / 2] : (tmax[n / 2 - 1] + tmax[n / 2]) / 2.0;
}

}  // namespace

double site_similarity_oracle(const TagSequence& a, const TagSequence& b) {
    return (direction(a, b) + direction(b, a)) / 2.0;
}

// ---------------------------------------------------------------------------

const std::vector<double> kPairedA = {4.12, 7.85, 2.33, 9.41, 5.06, 6.78, 3.90, 8.27, 1.64, 7.12};
const std::vector<double> kPairedB = {5.30, 8.02, 4.11, 9.96, 6.48, 6.91, 5.72, 9.15, 2.08, 8.63};
const double kPairedT = -4.85669367159172424523696403924;
const double kPairedP = 0.000899945890582734913241956845668;

// ---------------------------------------------------------------------------

namespace {

constexpr Seconds kHorizon{7 * 24 * 3600};

Seconds hm(int h, int m) { return Seconds{h * 3600 + m * 60}; }

/// `count` gaps whose median is exactly `median`, all within [0, limit].
std::vector<Seconds> gaps_with_median(std::size_t count, Seconds median, Seconds limit, Rng& rng) {
    std::vector<Seconds> g;
    if (count == 0) return g;
    const std::size_t middles = count % 2 ? 1 : 2;
    const std::size_t side = (count - middles) / 2;
    for (std::size_t i = 0; i < side; ++i) g.emplace_back(static_cast<Seconds::rep>(rng.below(median.count())));
    for (std::size_t i = 0; i < middles; ++i) g.push_back(median);
    for (std::size_t i = 0; i < side; ++i)
        g.emplace_back(median.count() + 1 + static_cast<Seconds::rep>(rng.below(limit.count() - median.count())));
    for (std::size_t i = g.size(); i > 1; --i) std::swap(g[i - 1], g[rng.below(i)]);
    return g;
}

const char* const kHosts[] = {"weebly.com", "000webhostapp.com", "wixsite.com", "duckdns.org",
                              "blogspot.com", "glitch.me",       "netlify.app", "firebaseapp.com"};

EntityState covering_state(Entity e) {
    switch (family_of(e)) {
        case EntityFamily::blocklist: return EntityState::listed();
        case EntityFamily::takedown: return EntityState::removed();
        case EntityFamily::scanner: return EntityState::detected(3);
    }
    return EntityState::listed();
}

EntityState initial_state(Entity e) {
    switch (family_of(e)) {
        case EntityFamily::blocklist: return EntityState::not_listed();
        case EntityFamily::takedown: return EntityState::active();
        case EntityFamily::scanner: return EntityState::detected(0);
    }
    return EntityState::not_listed();
}

}  // namespace

const std::vector<CoverageRow>& coverage_rows() {
    static const std::vector<CoverageRow> rows = {
        {Entity::phishtank, 99, hm(5, 41), "PhishTank"},
        {Entity::openphish, 163, hm(13, 42), "OpenPhish"},
        {Entity::gsb, 483, hm(7, 11), "GSB"},
        {Entity::ecrimex, 242, hm(11, 55), "eCrimeX"},
        {Entity::platform_twitter, 397, hm(16, 11), "Social Media"},
        {Entity::registrar, 236, hm(12, 8), "Domain Registrar"},
    };
    return rows;
}

ObservationLog make_coverage_log(std::uint64_t seed) {
    ObservationLog log(kHorizon);
    const Timestamp t0 = parse_timestamp("2022-03-01T00:00:00Z");
    std::vector<std::string> urls;
    for (std::size_t i = 0; i < kCoverageUrls; ++i) {
        urls.push_back(canonicalize(fmt::format("http://cov-{:04}.{}/", i, kHosts[i % std::size(kHosts)])).serialized());
        log.set_first_seen(urls.back(), t0 + Seconds{static_cast<Seconds::rep>(i) * 600});
    }
    struct Plan {
        std::string url;
        Entity entity;
        std::optional<Seconds> gap;
    };
    std::vector<Plan> plans;
    std::uint64_t k = 0;
    for (const auto& row : coverage_rows()) {
        Rng rng(mix_seed(seed, k++));
        std::vector<std::size_t> order(kCoverageUrls);
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        const auto gaps = gaps_with_median(row.covered, row.median, kHorizon, rng);
        for (std::size_t i = 0; i < kCoverageUrls; ++i) {
            std::optional<Seconds> gap;
            if (i < row.covered) gap = gaps[i];
            else if (i % 3 == 0) gap = kHorizon + Seconds{1 + static_cast<Seconds::rep>(rng.below(3 * 86400))};
            plans.push_back({urls[order[i]], row.entity, gap});
        }
    }
    for (const auto& p : plans) {
        const Timestamp fs = log.first_seen().at(p.url);
        if (!p.gap || *p.gap > Seconds{0}) log.append({p.url, p.entity, fs, initial_state(p.entity), false, {}});
        if (p.gap) log.append({p.url, p.entity, fs + *p.gap, covering_state(p.entity), false, {}});
    }
    return log;
}

ObservationLog random_log(std::uint64_t seed, std::size_t n_urls) {
    Rng rng(seed);
    ObservationLog log(kHorizon);
    const Timestamp t0 = parse_timestamp("2022-05-01T00:00:00Z");
    const auto& entities = all_entities();
    for (std::size_t i = 0; i < n_urls; ++i) {
        const std::string url =
            canonicalize(fmt::format("http://rnd-{}-{}.{}/", seed, i, kHosts[rng.below(std::size(kHosts))]))
                .serialized();
        const Timestamp fs = t0 + Seconds{static_cast<Seconds::rep>(rng.below(14 * 86400))};
        log.set_first_seen(url, fs);
        for (Entity e : entities) {
            if (rng.coin()) continue;
            // a few observations before first_seen exercise the clamp at zero
            Timestamp t = fs - Seconds{static_cast<Seconds::rep>(rng.below(4) == 0 ? rng.below(3600) : 0)};
            const std::size_t n_events = 1 + rng.below(6);
            int detections = 0;
            bool covered = false;
            for (std::size_t k = 0; k < n_events; ++k) {
                EntityState s = initial_state(e);
                if (family_of(e) == EntityFamily::scanner) {
                    detections += static_cast<int>(rng.below(3));
                    s = EntityState::detected(detections);
                } else if (covered || rng.below(3) == 0) {
                    s = covering_state(e);
                    covered = true;
                }
                log.append({url, e, t, s, false, {}});
                t += Seconds{static_cast<Seconds::rep>(rng.below(3 * 86400))};
            }
        }
    }
    return log;
}

// ---------------------------------------------------------------------------

const std::vector<RemovalRow>& removal_rows() {
    static const std::vector<RemovalRow> rows = {
        {"Hostinger", "000webhost", 122, 108, 101, 39, hm(1, 9), hm(5, 13)},
        {"Netlify", "Netlify", 41, 28, 37, 5, hm(2, 31), hm(8, 49)},
        {"Wix", "Wix", 108, 72, 79, 31, hm(1, 47), hm(3, 12)},
        {"glitch.me", "glitch.me", 57, 33, 42, 5, hm(3, 27), hm(14, 5)},
        {"Weebly", "Weebly", 84, 51, 37, 22, hm(7, 24), hm(6, 12)},
        {"DuckDNS", "DuckDNS", 48, 40, 11, 15, hm(5, 9), hm(5, 57)},
        {"Yolasite", "Yolasite", 51, 47, 14, 9, hm(11, 19), hm(13, 48)},
        {"Google", "Google Sites", 53, 37, 41, 8, hm(5, 22), hm(19, 7)},
        {"Herokuapp", "Herokuapp", 25, 19, 4, 7, hm(10, 11), hm(7, 34)},
        {"Square up", "Square up", 57, 32, 18, 11, hm(9, 41), hm(8, 2)},
    };
    return rows;
}

RemovalFixture make_removal_fixture(std::uint64_t seed) {
    RemovalFixture f{ObservationLog(kHorizon), {}};
    const Registry& registry = Registry::builtin();
    const Timestamp t0 = parse_timestamp("2022-09-05T08:00:00Z");
    std::size_t serial = 0;
    std::uint64_t k = 0;
    for (const auto& row : removal_rows()) {
        const FhdEntry* entry = registry.find_by_name(row.fhd);
        if (!entry) throw PreconditionError("removal fixture: unknown FHD " + row.fhd);
        for (Arm arm : {Arm::reported, Arm::control}) {
            Rng rng(mix_seed(seed, k++));
            const bool rep = arm == Arm::reported;
            const std::size_t n = rep ? row.n_reported : row.n_control;
            const std::size_t removed = rep ? row.removed_reported : row.removed_control;
            const auto gaps = gaps_with_median(removed, rep ? row.median_reported : row.median_control, kHorizon, rng);
            for (std::size_t i = 0; i < n; ++i, ++serial) {
                const std::string slug = fmt::format("rm-{}-{}", serial, rep ? "r" : "c");
                const std::string raw = entry->subdomain_scheme == SubdomainScheme::path_suffix
                                            ? fmt::format("https://{}/view/{}", entry->base_domain, slug)
                                            : fmt::format("https://{}.{}/", slug, entry->base_domain);
                AbuseReport r;
                r.url = canonicalize(raw);
                r.fhd = *entry;
                r.discovered_at = t0 + Seconds{static_cast<Seconds::rep>(serial) * 420};
                r.created_at = r.discovered_at + Seconds{1800};
                r.arm = arm;
                if (rep) r.sent_to = entry->abuse_contact.value_or("abuse@" + entry->base_domain);
                r.score = 0.9;
                r.model_version = "rf-fixture";
                const std::string id = r.url.serialized();
                f.log.set_first_seen(id, r.discovered_at);
                f.log.append({id, Entity::registrar, r.created_at, EntityState::active(), false, {}});
                std::optional<Seconds> gap;
                if (i < removed) gap = gaps[i];
                else if (i % 4 == 0) gap = kHorizon + Seconds{3600};
                if (gap) {
                    const Timestamp at = r.created_at + *gap;
                    f.log.append({id, Entity::registrar, at, EntityState::removed(), false, {}});
                    r.removal_observed_at = at;
                }
                f.reports.push_back(std::move(r));
            }
        }
    }
    return f;
}

// ---------------------------------------------------------------------------

namespace {

const char* const kWords[] = {"alpha", "river", "stone", "maple", "orbit", "pixel", "cedar", "lumen",
                              "quartz", "harbor", "ember", "delta", "tundra", "violet", "cobalt", "saffron"};

std::string rand_token(Rng& rng, std::size_t min_len, std::size_t max_len) {
    static const char alphabet[] = "abcdefghijklmnopqrstuvwxyz0123456789-_";
    const std::size_t len = min_len + rng.below(max_len - min_len + 1);
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s += alphabet[rng.below(sizeof(alphabet) - 1)];
    return s;
}

}  // namespace

std::string template_page(std::uint64_t seed) {
    Rng rng(seed);
    // builder skeleton, identical on every page
    std::string h = R"(<!DOCTYPE html><html lang="en"><head><meta charset="utf-8">
<meta name="viewport" content="width=device-width, initial-scale=1">
<link id="wsite-base-style" rel="stylesheet" type="text/css" href="//cdn2.editmysite.com/css/sites.css?buildTime=1650">
<link rel="stylesheet" type="text/css" href="/files/main_style.css?1650000000">
<script type="text/javascript" src="//cdn2.editmysite.com/js/jquery-1.8.3.min.js"></script>
<script type="text/javascript" src="//cdn2.editmysite.com/js/site/main.js?buildTime=1650"></script>
</head><body class="header-page wsite-theme-light wsite-page-index">
<div class="wrapper"><div class="dusk-header"><div class="nav-wrap"><div class="container">
<a class="hamburger" aria-label="Menu" href="#"><span></span></a>
<div class="logo"><span class="wsite-logo"><a href="/"><span id="wsite-title">Site</span></a></span></div>
<div id="navmobile" class="nav"><ul class="wsite-menu-default">
<li id="active" class="wsite-menu-item-wrap"><a href="/" class="wsite-menu-item">Home</a></li>
<li id="pg1" class="wsite-menu-item-wrap"><a href="/about.html" class="wsite-menu-item">About</a></li>
<li id="pg2" class="wsite-menu-item-wrap"><a href="/contact.html" class="wsite-menu-item">Contact</a></li>
</ul></div></div></div></div>
<div class="banner-wrap"><div class="container"><div class="banner"><h2><span class="wsite-text wsite-headline">Welcome</span></h2></div></div></div>
<div class="main-wrap"><div class="container"><div id="wsite-content" class="wsite-elements wsite-not-footer">
<div class="paragraph" style="text-align:left;">
)";
    // page-specific content, roughly 30% of the tags
    const std::size_t extra = 10 + rng.below(6);
    for (std::size_t i = 0; i < extra; ++i) {
        switch (rng.below(4)) {
            case 0: h += fmt::format("<p>{} {}</p>\n", kWords[rng.below(16)], kWords[rng.below(16)]); break;
            case 1: h += fmt::format("<img src=\"/uploads/{}/{}.jpg\" alt=\"{}\">\n", rng.below(9), rand_token(rng, 6, 10), kWords[rng.below(16)]); break;
            case 2: h += fmt::format("<h2 class=\"wsite-content-title\">{}</h2>\n", kWords[rng.below(16)]); break;
            default: h += fmt::format("<a href=\"/{}.html\">{}</a>\n", rand_token(rng, 4, 8), kWords[rng.below(16)]); break;
        }
    }
    h += R"(</div></div></div></div>
<div class="footer-wrap"><div class="container"><div class="footer"><div class="wsite-elements wsite-footer">
<div class="paragraph" style="text-align:center;">Copyright</div></div></div></div></div>
<div class="weebly-footer"><a class="weebly-link" href="https://www.weebly.com/signup?utm_source=internal">Weebly</a></div>
</div></body></html>
)";
    return h;
}

std::string freeform_page(std::uint64_t seed) {
    Rng rng(seed);
    static const char* const names[] = {"div", "span", "section", "a", "img", "p", "ul", "li", "table", "td",
                                        "form", "input", "button", "nav", "header", "footer", "h1", "h3"};
    std::string h = "<html><body>\n";
    const std::size_t n = 35 + rng.below(20);
    for (std::size_t i = 0; i < n; ++i) {
        const char* name = names[rng.below(std::size(names))];
        std::string attrs;
        const std::size_t n_attr = 1 + rng.below(3);
        for (std::size_t k = 0; k < n_attr; ++k) {
            switch (rng.below(4)) {
                case 0: attrs += fmt::format(" class=\"{}\"", rand_token(rng, 6, 14)); break;
                case 1: attrs += fmt::format(" id=\"{}\"", rand_token(rng, 5, 12)); break;
                case 2: attrs += fmt::format(" data-{}=\"{}\"", rand_token(rng, 3, 6), rand_token(rng, 4, 10)); break;
                default: attrs += fmt::format(" style=\"margin:{}px;color:#{}\"", rng.below(40), rand_token(rng, 6, 6)); break;
            }
        }
        h += fmt::format("<{}{}>{}</{}>\n", name, attrs, kWords[rng.below(16)], name);
    }
    return h + "</body></html>\n";
}

std::string random_html(std::uint64_t seed, std::size_t n_tags) {
    Rng rng(seed);
    static const char* const fragments[] = {
        "<a href=\"#\">x</a>", "<a href=\"https://other.example.com/p\">o</a>", "<a href=\"/local\">l</a>",
        "<a>none</a>", "<a href=\"javascript:void(0)\">v</a>", "<A HREF=\"mailto:x@y.z\">m</A>",
        "<input name=\"password\">", "<INPUT TYPE=\"text\" NAME=\"q\">", "<form>", "</form>",
        "<label>Email <input></label>", "<!-- comment <a href=\"#\"> -->", "<div class=\"weebly-footer\" style=\"display:none\">",
        "</div>", "<meta name=\"robots\" content=\"NOINDEX\">", "<p>text & more</p>", "<iframe src=\"//frame.example.net/\">",
        "<button onclick=\"location.href='/next'\">go</button>", "<div", "<<<>>>", "<img src=x onerror=alert(1)>",
        "<script>var a = '<a href=#>';</script>", "<style>.x{opacity:0}</style>", "&amp;&lt;&#65;",
    };
    std::string h;
    for (std::size_t i = 0; i < n_tags; ++i) h += fragments[rng.below(std::size(fragments))];
    return h;
}

const std::vector<ConfusionCase>& confusion_cases() {
    static const std::vector<ConfusionCase> cases = {
        {{90, 10, 10, 90}, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9},
        {{50, 0, 50, 100}, 0.75, 1.0, 0.5, 2.0 / 3.0, 2.0 / 3.0, 1.0, 0.8},
        {{0, 0, 10, 10}, 0.5, 0.0, 0.0, 0.0, 0.5, 1.0, 2.0 / 3.0},
        {{30, 20, 0, 0}, 0.6, 0.6, 1.0, 0.75, 0.0, 0.0, 0.0},
        {{7, 3, 1, 9}, 0.8, 0.7, 0.875, 7.0 / 9.0, 0.9, 0.75, 9.0 / 11.0},
    };
    return cases;
}

ScoreFixture auc_fixture() {
    const auto P = Label::phishing, B = Label::benign;
    return {{0.9, 0.8, 0.8, 0.7, 0.6, 0.55, 0.5, 0.5, 0.4, 0.3, 0.3, 0.1},
            {P, P, B, P, B, P, B, P, B, B, P, B}};
}

LabeledDataset separable_dataset(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    LabeledDataset d;
    for (std::size_t i = 0; i < n; ++i) {
        LabeledRow r;
        r.id = fmt::format("sep-{}", i);
        r.y = i % 2 ? Label::phishing : Label::benign;
        for (std::size_t f = 0; f < kFeatureCount; ++f)
            r.x[f] = is_ratio_feature(f) ? rng.uniform() : static_cast<double>(rng.coin());
        r.x[1] = r.y == Label::phishing ? 1.0 : 0.0;
        d.rows.push_back(r);
    }
    return d;
}

}  // namespace fptest

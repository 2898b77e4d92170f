#include "freephish/features.hpp"

#include "freephish/html.hpp"
#include "freephish/similarity.hpp"

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

namespace freephish {

using nlohmann::json;

const std::array<std::string_view, kFeatureCount>& feature_names() {
    static const std::array<std::string_view, kFeatureCount> names = {
        "is_fhd_hosted",   "has_credential_fields", "banner_obfuscated", "noindex_present",
        "target_identified", "links_external_phish", "malicious_download", "url_keyword_hit",
        "external_link_ratio", "empty_link_ratio",
    };
    return names;
}

std::size_t feature_index(std::string_view name) {
    const auto& names = feature_names();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    throw ParseError(fmt::format("unknown feature '{}'", name));
}

std::array<double, kFeatureCount> FeatureVector::values() const {
    return {double(is_fhd_hosted),     double(has_credential_fields), double(banner_obfuscated),
            double(noindex_present),   double(target_identified),     double(links_external_phish),
            double(malicious_download), double(url_keyword_hit),      external_link_ratio,
            empty_link_ratio};
}

FeatureVector FeatureVector::from_values(const std::array<double, kFeatureCount>& v) {
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        if (is_ratio_feature(i) ? !(v[i] >= 0.0 && v[i] <= 1.0) : !(v[i] == 0.0 || v[i] == 1.0))
            throw ParseError(fmt::format("feature {} out of range: {}", feature_names()[i], v[i]));
    }
    FeatureVector f;
    f.is_fhd_hosted = v[0] != 0;
    f.has_credential_fields = v[1] != 0;
    f.banner_obfuscated = v[2] != 0;
    f.noindex_present = v[3] != 0;
    f.target_identified = v[4] != 0;
    f.links_external_phish = v[5] != 0;
    f.malicious_download = v[6] != 0;
    f.url_keyword_hit = v[7] != 0;
    f.external_link_ratio = v[8];
    f.empty_link_ratio = v[9];
    return f;
}

// ---------------------------------------------------------------------------
// Config

namespace {

void lower_dedup(std::vector<std::string>& words, std::string_view what) {
    std::set<std::string> seen;
    std::vector<std::string> out;
    for (const auto& w : words) {
        std::string l = to_lower(trim(w));
        if (l.empty()) throw PreconditionError(fmt::format("empty entry in {}", what));
        if (seen.insert(l).second) out.push_back(std::move(l));
    }
    words = std::move(out);
}

}  // namespace

void ExtractorConfig::normalize() {
    lower_dedup(credential_keywords, "credential_keywords");
    lower_dedup(url_keywords, "url_keywords");
    for (const auto& b : brands)
        if (trim(b.name).empty() || trim(b.official_domain).empty())
            throw PreconditionError("brand entries need a name and an official domain");
    if (!(brand_match_threshold > 0.0)) throw PreconditionError("brand_match_threshold must be positive");
    if (follow_depth < 0) throw PreconditionError("follow_depth must be >= 0");
    if (download_detection_threshold <= 0) throw PreconditionError("download_detection_threshold must be positive");
}

ExtractorConfig parse_extractor_config(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(fmt::format("extractor config: {}", e.what()));
    }
    if (!j.is_object()) throw ParseError("extractor config must be a JSON object");
    ExtractorConfig c = ExtractorConfig::defaults();
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "credential_keywords") c.credential_keywords = value.get<std::vector<std::string>>();
            else if (key == "url_keywords") c.url_keywords = value.get<std::vector<std::string>>();
            else if (key == "brands") {
                c.brands.clear();
                for (const auto& b : value)
                    c.brands.push_back({b.at("name").get<std::string>(), b.at("official_domain").get<std::string>()});
            } else if (key == "brand_match_threshold") c.brand_match_threshold = value.get<double>();
            else if (key == "follow_depth") c.follow_depth = value.get<int>();
            else if (key == "download_detection_threshold") c.download_detection_threshold = value.get<int>();
            else throw ParseError(fmt::format("extractor config: unknown key '{}'", key));
        }
    } catch (const json::exception& e) {
        throw ParseError(fmt::format("extractor config: {}", e.what()));
    }
    c.normalize();
    return c;
}

ExtractorConfig load_extractor_config(const std::string& path) { return parse_extractor_config(read_file(path)); }

std::string extractor_config_to_json(const ExtractorConfig& c) {
    json brands = json::array();
    for (const auto& b : c.brands) brands.push_back({{"name", b.name}, {"official_domain", b.official_domain}});
    const json j = {
        {"credential_keywords", c.credential_keywords},
        {"url_keywords", c.url_keywords},
        {"brands", brands},
        {"brand_match_threshold", c.brand_match_threshold},
        {"follow_depth", c.follow_depth},
        {"download_detection_threshold", c.download_detection_threshold},
    };
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Scanner

FixtureScanner FixtureScanner::load(const std::string& path) {
    FixtureScanner s;
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ParseError(fmt::format("{}: {}", path, e.what()));
    }
    if (!j.is_object()) throw ParseError(fmt::format("{}: expected an object of hash -> count", path));
    for (const auto& [hash, count] : j.items()) {
        if (count.is_null()) s.set_error(hash);
        else if (count.is_number_integer() && count.get<int>() >= 0) s.set(hash, count.get<int>());
        else throw ParseError(fmt::format("{}: bad detection count for {}", path, hash));
    }
    return s;
}

std::optional<int> FixtureScanner::detections(const std::string& content_hash) {
    if (std::find(errors_.begin(), errors_.end(), content_hash) != errors_.end())
        throw TransportError(TransportErrorKind::timeout, fmt::format("scanner lookup failed for {}", content_hash));
    const auto it = counts_.find(content_hash);
    if (it == counts_.end()) return std::nullopt;
    return it->second;
}

// ---------------------------------------------------------------------------
// Credential fields

namespace {

std::string alnum_lower(std::string_view s) {
    std::string out;
    for (char c : s)
        if (std::isalnum(static_cast<unsigned char>(c)))
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::vector<std::string> alnum_runs(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

struct InputField {
    std::vector<std::string> texts;
    std::optional<std::size_t> label;  // enclosing <label>
    std::string id;
};

}  // namespace

bool detect_credential_fields(std::string_view body, const std::vector<std::string>& keywords) {
    std::vector<std::string> needles;
    for (const auto& k : keywords)
        if (auto n = alnum_lower(k); !n.empty()) needles.push_back(std::move(n));
    if (needles.empty()) return false;

    std::vector<std::string> label_text;
    std::vector<std::optional<std::string>> label_for;
    std::vector<std::size_t> open_labels;
    std::vector<InputField> inputs;

    for (const auto& t : html::tokenize(body)) {
        switch (t.kind) {
            case html::TokenKind::start_tag:
                if (t.name == "label") {
                    label_text.emplace_back();
                    label_for.push_back(t.attr("for"));
                    if (!t.self_closing) open_labels.push_back(label_text.size() - 1);
                } else if (t.name == "input") {
                    if (to_lower(trim(t.attr("type").value_or(""))) == "hidden") break;
                    InputField f;
                    for (const char* a : {"name", "id", "placeholder", "type", "aria-label"})
                        if (auto v = t.attr(a)) f.texts.push_back(*v);
                    f.id = t.attr("id").value_or("");
                    if (!open_labels.empty()) f.label = open_labels.back();
                    inputs.push_back(std::move(f));
                }
                break;
            case html::TokenKind::end_tag:
                if (t.name == "label" && !open_labels.empty()) open_labels.pop_back();
                break;
            case html::TokenKind::text:
                for (auto i : open_labels) label_text[i] += " " + t.text;
                break;
            case html::TokenKind::comment:
                break;
        }
    }

    for (auto& f : inputs) {
        if (f.label) f.texts.push_back(label_text[*f.label]);
        if (!f.id.empty())
            for (std::size_t i = 0; i < label_for.size(); ++i)
                if (label_for[i] && trim(*label_for[i]) == trim(f.id)) f.texts.push_back(label_text[i]);
        for (const auto& text : f.texts) {
            const std::string hay = alnum_lower(text);
            for (const auto& n : needles)
                if (hay.find(n) != std::string::npos) return true;
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Banner

namespace {

bool is_zero_length(std::string_view v) {
    std::string s(v);
    for (const char* unit : {"px", "em", "rem", "%", "vh", "vw", "pt"})
        if (s.size() > std::string_view(unit).size() && s.ends_with(unit)) {
            s.resize(s.size() - std::string_view(unit).size());
            break;
        }
    double d = 1.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
    return ec == std::errc{} && ptr == s.data() + s.size() && d == 0.0;
}

bool declarations_hide(std::string_view decls) {
    for (const auto& decl : split(decls, ';')) {
        const auto colon = decl.find(':');
        if (colon == std::string::npos) continue;
        const std::string prop = to_lower(trim(decl.substr(0, colon)));
        std::string value = to_lower(trim(decl.substr(colon + 1)));
        if (auto bang = value.find("!important"); bang != std::string::npos) value = trim(value.substr(0, bang));
        if (prop == "visibility" && value == "hidden") return true;
        if (prop == "display" && value == "none") return true;
        if ((prop == "height" || prop == "opacity") && is_zero_length(value)) return true;
    }
    return false;
}

std::string strip_css_comments(std::string_view css) {
    std::string out;
    std::size_t i = 0;
    while (i < css.size()) {
        if (css.substr(i, 2) == "/*") {
            const auto end = css.find("*/", i + 2);
            if (end == std::string_view::npos) break;
            i = end + 2;
        } else {
            out += css[i++];
        }
    }
    return out;
}

bool stylesheet_hides(std::string_view css, const std::vector<std::string>& markers) {
    const std::string clean = strip_css_comments(css);
    for (const auto& rule : split(clean, '}')) {
        const auto brace = rule.find('{');
        if (brace == std::string::npos) continue;
        const std::string_view selector = std::string_view(rule).substr(0, brace);
        const std::string_view decls = std::string_view(rule).substr(brace + 1);
        for (const auto& m : markers)
            if (icontains(selector, m) && declarations_hide(decls)) return true;
    }
    return false;
}

}  // namespace

bool detect_banner_obfuscation(std::string_view body, const FhdEntry& entry) {
    const auto& markers = entry.banner_markers;
    if (markers.empty()) return false;
    bool in_style = false;
    for (const auto& t : html::tokenize(body)) {
        if (t.kind == html::TokenKind::start_tag) {
            in_style = t.name == "style" && !t.self_closing;
            const std::string ident = t.attr("class").value_or("") + " " + t.attr("id").value_or("");
            const bool is_banner = std::any_of(markers.begin(), markers.end(),
                                               [&](const std::string& m) { return icontains(ident, m); });
            if (is_banner && declarations_hide(t.attr("style").value_or(""))) return true;
        } else if (t.kind == html::TokenKind::end_tag) {
            in_style = false;
        } else if (t.kind == html::TokenKind::text && in_style) {
            if (stylesheet_hides(t.text, markers)) return true;
        } else if (t.kind == html::TokenKind::comment) {
            for (const auto& m : markers)
                if (icontains(t.text, m)) return true;
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// noindex

bool detect_noindex(std::string_view body) {
    for (const auto& t : html::tokenize(body)) {
        if (t.kind != html::TokenKind::start_tag) continue;
        if (t.name == "noindex") return true;
        if (t.name != "meta") continue;
        if (to_lower(trim(t.attr("name").value_or(""))) != "robots") continue;
        for (const auto& tok : alnum_runs(t.attr("content").value_or("")))
            if (tok == "noindex") return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Target brand

namespace {

std::vector<std::string> host_tokens(std::string_view host) {
    auto labels = split(host, '.');
    if (labels.size() > 1) labels.pop_back();
    std::vector<std::string> out;
    for (const auto& l : labels) {
        if (l == "www") continue;
        for (auto& r : alnum_runs(l)) out.push_back(std::move(r));
    }
    return out;
}

std::string first_label(std::string_view domain) {
    const auto dot = domain.find('.');
    return alnum_lower(domain.substr(0, dot));
}

}  // namespace

std::vector<std::string> url_tokens(const CanonicalUrl& url, const Registry& registry) {
    std::vector<std::string> out;
    if (const auto m = registry.match(url)) {
        if (m->entry->subdomain_scheme == SubdomainScheme::subdomain_prefix) out = alnum_runs(m->site_slug);
    } else {
        out = host_tokens(url.host);
    }
    for (auto& r : alnum_runs(url.path)) out.push_back(std::move(r));
    return out;
}

std::optional<BrandMatch> identify_target(const CanonicalUrl& url, std::string_view body,
                                          const ExtractorConfig& config, const Registry& registry,
                                          TextExtractor* text_extractor) {
    if (config.brands.empty()) throw PreconditionError("brand list is empty");
    std::vector<std::string> tokens = url_tokens(url, registry);
    if (text_extractor)
        for (auto& r : alnum_runs(text_extractor->extract(body))) tokens.push_back(std::move(r));
    if (tokens.empty()) return std::nullopt;
    std::string joined;
    for (const auto& t : tokens) joined += t;

    std::optional<BrandMatch> best;
    for (const auto& brand : config.brands) {
        std::set<std::string> names = {alnum_lower(brand.name), first_label(brand.official_domain)};
        double d = 2.0;
        for (const auto& name : names) {
            if (name.empty()) continue;
            if (name.size() >= 4 && joined.find(name) != std::string::npos) d = 0.0;
            for (const auto& tok : tokens) d = std::min(d, normalized_distance(tok, name));
        }
        if (d > config.brand_match_threshold) continue;
        if (!best || d < best->distance || (d == best->distance && brand.name < best->brand))
            best = BrandMatch{brand.name, d};
    }
    return best;
}

// ---------------------------------------------------------------------------
// URL keywords

bool url_keyword_hit(const CanonicalUrl& url, const Registry& registry, const ExtractorConfig& config) {
    std::string text;
    if (const auto m = registry.match(url)) {
        if (m->entry->subdomain_scheme == SubdomainScheme::subdomain_prefix) text = m->site_slug;
    } else {
        text = url.host;
    }
    text += url.path;
    if (url.query) text += "?" + *url.query;
    text = to_lower(text);
    for (const auto& k : config.url_keywords)
        if (!k.empty() && text.find(to_lower(k)) != std::string::npos) return true;
    return false;
}

// ---------------------------------------------------------------------------
// Link ratios

namespace {

std::string registrable_guess(std::string_view host) {
    const auto labels = split(host, '.');
    if (labels.size() <= 2) return std::string(host);
    return labels[labels.size() - 2] + "." + labels.back();
}

bool is_void_pseudo_link(std::string_view href) {
    std::string rest = to_lower(trim(href.substr(std::string_view("javascript:").size())));
    return rest.empty() || rest == ";" || rest.starts_with("void");
}

}  // namespace

LinkRatios link_ratios(std::string_view body, const CanonicalUrl& page, const Registry& registry) {
    const auto m = registry.match(page);
    const std::string base = m ? m->entry->base_domain : registrable_guess(page.host);
    std::size_t total = 0, external = 0, empty = 0;
    for (const auto& t : html::tokenize(body)) {
        if (t.kind != html::TokenKind::start_tag || t.name != "a") continue;
        ++total;
        const auto href_attr = t.attr("href");
        const std::string href = trim(href_attr.value_or(""));
        if (href.empty() || href == "#") {
            ++empty;
            continue;
        }
        if (starts_with_icase(href, "javascript:")) {
            if (is_void_pseudo_link(href)) ++empty;
            continue;
        }
        const auto target = resolve_href(page, href);
        if (target && !host_within(target->host, base)) ++external;
    }
    if (total == 0) return {};
    return {static_cast<double>(external) / static_cast<double>(total),
            static_cast<double>(empty) / static_cast<double>(total)};
}

// ---------------------------------------------------------------------------
// Two-step phish

bool detect_external_phish_link(const Snapshot& snapshot, Fetcher& fetcher, const Registry& registry,
                                const ExtractorConfig& config) {
    if (config.follow_depth <= 0) return false;
    if (detect_credential_fields(snapshot.body, config.credential_keywords)) return false;

    std::set<std::string> visited = {snapshot.url.serialized()};
    std::vector<std::pair<CanonicalUrl, std::vector<LinkedTarget>>> frontier = {
        {snapshot.url, snapshot.linked_targets}};

    for (int depth = 1; depth <= config.follow_depth && !frontier.empty(); ++depth) {
        std::vector<std::pair<CanonicalUrl, std::vector<LinkedTarget>>> next;
        for (const auto& [base, targets] : frontier) {
            for (const auto& target : targets) {
                if (target.kind == LinkKind::anchor) continue;
                const auto url = resolve_href(base, target.href);
                if (!url || !visited.insert(url->serialized()).second) continue;
                HttpResponse resp;
                try {
                    resp = fetcher.fetch(*url);
                } catch (const TransportError& e) {
                    spdlog::warn("following {} from {} failed: {}", url->serialized(), snapshot.url.serialized(),
                                 e.what());
                    continue;
                }
                if (resp.status >= 400) continue;
                if (detect_credential_fields(resp.body, config.credential_keywords) &&
                    (registry.match(*url) || identify_target(*url, resp.body, config, registry)))
                    return true;
                next.emplace_back(*url, extract_linked_targets(resp.body));
            }
        }
        frontier = std::move(next);
    }
    return false;
}

// ---------------------------------------------------------------------------
// Downloads

bool detect_malicious_download(const Snapshot& snapshot, Scanner* scanner, const ExtractorConfig& config) {
    if (!snapshot.download || !scanner) return false;
    try {
        const auto count = scanner->detections(snapshot.download->content_hash);
        return count && *count >= config.download_detection_threshold;
    } catch (const TransportError& e) {
        spdlog::warn("scanner lookup for {} failed: {}", snapshot.download->content_hash, e.what());
        return false;
    }
}

// ---------------------------------------------------------------------------

FeatureVector extract_features(const Snapshot& snapshot, const ExtractionContext& ctx) {
    FeatureVector f;
    const auto match = ctx.registry.match(snapshot.url);
    f.is_fhd_hosted = match.has_value();
    f.has_credential_fields = detect_credential_fields(snapshot.body, ctx.config.credential_keywords);
    f.banner_obfuscated = match && detect_banner_obfuscation(snapshot.body, *match->entry);
    f.noindex_present = detect_noindex(snapshot.body);
    if (!ctx.config.brands.empty()) {
        if (auto b = identify_target(snapshot.url, snapshot.body, ctx.config, ctx.registry, ctx.text_extractor)) {
            f.target_identified = true;
            f.target_brand = b->brand;
        }
    }
    if (!f.has_credential_fields && ctx.fetcher)
        f.links_external_phish = detect_external_phish_link(snapshot, *ctx.fetcher, ctx.registry, ctx.config);
    f.malicious_download = detect_malicious_download(snapshot, ctx.scanner, ctx.config);
    f.url_keyword_hit = url_keyword_hit(snapshot.url, ctx.registry, ctx.config);
    const auto ratios = link_ratios(snapshot.body, snapshot.url, ctx.registry);
    f.external_link_ratio = ratios.external;
    f.empty_link_ratio = ratios.empty;
    return f;
}

// ---------------------------------------------------------------------------
// TSV

namespace {

std::string header_row() {
    std::string h = "id\turl";
    for (auto n : feature_names()) h += fmt::format("\t{}", n);
    return h + "\ttarget_brand";
}

void check_field(std::string_view s, std::string_view what) {
    if (s.find_first_of("\t\n\r") != std::string_view::npos)
        throw PreconditionError(fmt::format("{} contains a tab or newline", what));
}

double parse_value(const std::string& s, std::size_t line) {
    double d = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError(fmt::format("features line {}: bad number '{}'", line, s));
    return d;
}

}  // namespace

std::string features_to_tsv(const std::vector<FeatureRow>& rows) {
    std::string out = fmt::format("# {}\n{}\n", kFeatureSchema, header_row());
    for (const auto& r : rows) {
        check_field(r.id, "id");
        check_field(r.url, "url");
        if (r.vector.target_brand) check_field(*r.vector.target_brand, "target_brand");
        out += r.id + "\t" + r.url;
        const auto v = r.vector.values();
        for (std::size_t i = 0; i < kFeatureCount; ++i)
            out += is_ratio_feature(i) ? fmt::format("\t{}", v[i]) : fmt::format("\t{}", int(v[i]));
        out += "\t" + r.vector.target_brand.value_or("") + "\n";
    }
    return out;
}

std::vector<FeatureRow> features_from_tsv(std::string_view text) {
    auto lines = split(text, '\n');
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty() || trim(lines[0]) != fmt::format("# {}", kFeatureSchema))
        throw ParseError(fmt::format("features file: expected schema line '# {}'", kFeatureSchema));
    if (lines.size() < 2 || trim(lines[1]) != header_row())
        throw ParseError("features file: header row does not match the feature schema");
    std::vector<FeatureRow> rows;
    for (std::size_t i = 2; i < lines.size(); ++i) {
        std::string line = lines[i];
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto cols = split(line, '\t');
        if (cols.size() != kFeatureCount + 3)
            throw ParseError(fmt::format("features line {}: expected {} columns, got {}", i + 1, kFeatureCount + 3,
                                         cols.size()));
        std::array<double, kFeatureCount> v{};
        for (std::size_t k = 0; k < kFeatureCount; ++k) v[k] = parse_value(cols[k + 2], i + 1);
        FeatureRow row;
        row.id = cols[0];
        row.url = cols[1];
        try {
            row.vector = FeatureVector::from_values(v);
        } catch (const ParseError& e) {
            throw ParseError(fmt::format("features line {}: {}", i + 1, e.what()));
        }
        if (!cols.back().empty()) row.vector.target_brand = cols.back();
        rows.push_back(std::move(row));
    }
    return rows;
}

void save_features(const std::string& path, const std::vector<FeatureRow>& rows) {
    write_file(path, features_to_tsv(rows));
}

std::vector<FeatureRow> load_features(const std::string& path) { return features_from_tsv(read_file(path)); }

// ---------------------------------------------------------------------------
// Keyword derivation

std::vector<std::string> slug_tokens(const CanonicalUrl& url, const Registry& registry) {
    std::vector<std::string> raw;
    if (const auto m = registry.match(url)) raw = alnum_runs(m->site_slug);
    else raw = host_tokens(url.host);
    std::vector<std::string> out;
    for (auto& t : raw)
        if (!std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
            out.push_back(std::move(t));
    return out;
}

std::vector<std::pair<std::string, std::size_t>> top_keywords(const std::vector<CanonicalUrl>& urls,
                                                              const Registry& registry, std::size_t k) {
    std::map<std::string, std::size_t> counts;
    for (const auto& u : urls)
        for (const auto& t : slug_tokens(u, registry)) ++counts[t];
    std::vector<std::pair<std::string, std::size_t>> out(counts.begin(), counts.end());
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    if (out.size() > k) out.resize(k);
    return out;
}

}  // namespace freephish

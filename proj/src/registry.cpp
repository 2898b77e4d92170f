#include "freephish/registry.hpp"

#include "registry_data.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

namespace freephish {

using nlohmann::json;

std::string_view to_string(SubdomainScheme s) {
    return s == SubdomainScheme::subdomain_prefix ? "subdomain_prefix" : "path_suffix";
}

// ---------------------------------------------------------------------------
// URLs

std::string CanonicalUrl::serialized() const {
    std::string out = scheme + "://" + host;
    if (port) out += ":" + std::to_string(*port);
    out += path;
    if (query) out += "?" + *query;
    return out;
}

namespace {

bool valid_scheme(std::string_view s) {
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
    });
}

bool valid_host_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '-' || c == '.' || c == '_' || u >= 0x80;
}

std::optional<std::uint16_t> default_port(std::string_view scheme) {
    if (scheme == "http") return 80;
    if (scheme == "https") return 443;
    if (scheme == "ftp") return 21;
    return std::nullopt;
}

}  // namespace

CanonicalUrl canonicalize(std::string_view raw) {
    const std::string input = trim(raw);
    if (input.empty()) throw UrlError("empty URL");
    CanonicalUrl url;
    url.original = std::string(raw);

    std::string_view rest = input;
    const auto sep = rest.find("://");
    bool had_scheme = false;
    if (sep != std::string_view::npos && valid_scheme(rest.substr(0, sep))) {
        url.scheme = to_lower(rest.substr(0, sep));
        rest.remove_prefix(sep + 3);
        had_scheme = true;
    } else if (rest.starts_with("//")) {
        url.scheme = "http";
        rest.remove_prefix(2);
        had_scheme = true;
    } else {
        url.scheme = "http";
    }

    const auto auth_end = rest.find_first_of("/?#\\");
    std::string_view authority = rest.substr(0, auth_end);
    rest = auth_end == std::string_view::npos ? std::string_view{} : rest.substr(auth_end);

    if (const auto at = authority.rfind('@'); at != std::string_view::npos)
        authority.remove_prefix(at + 1);

    std::string_view host_part = authority;
    if (authority.starts_with("[")) {
        const auto close = authority.find(']');
        if (close == std::string_view::npos) throw UrlError(fmt::format("unparseable URL '{}'", raw));
        host_part = authority.substr(0, close + 1);
        const std::string_view after = authority.substr(close + 1);
        if (!after.empty()) {
            if (after[0] != ':') throw UrlError(fmt::format("unparseable URL '{}'", raw));
            host_part = authority.substr(0, close + 1);
            authority = after;  // ":port"
        } else {
            authority = {};
        }
    } else if (const auto colon = authority.rfind(':'); colon != std::string_view::npos) {
        host_part = authority.substr(0, colon);
        authority = authority.substr(colon);
    } else {
        authority = {};
    }

    if (!authority.empty()) {
        const std::string_view digits = authority.substr(1);
        if (!digits.empty()) {
            unsigned value = 0;
            auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
            if (ec != std::errc{} || ptr != digits.data() + digits.size() || value == 0 || value > 65535)
                throw UrlError(fmt::format("bad port in URL '{}'", raw));
            if (default_port(url.scheme) != value) url.port = static_cast<std::uint16_t>(value);
        }
    }

    std::string host = to_lower(host_part);
    while (!host.empty() && host.back() == '.') host.pop_back();
    if (host.empty()) throw UrlError(fmt::format("unparseable URL '{}': no host", raw));
    if (!host.starts_with("[")) {
        if (!std::all_of(host.begin(), host.end(), valid_host_char) || host.front() == '.')
            throw UrlError(fmt::format("unparseable URL '{}': bad host", raw));
        if (!had_scheme && host.find('.') == std::string::npos)
            throw UrlError(fmt::format("unparseable URL '{}': no host", raw));
    }
    url.host = std::move(host);

    // path[?query][#fragment]
    if (const auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);
    std::string_view path = rest;
    if (const auto q = rest.find('?'); q != std::string_view::npos) {
        path = rest.substr(0, q);
        const std::string_view query = rest.substr(q + 1);
        if (!query.empty()) url.query = std::string(query);
    }
    url.path = path.empty() ? "/" : std::string(path);
    std::replace(url.path.begin(), url.path.end(), '\\', '/');
    return url;
}

std::optional<CanonicalUrl> resolve_href(const CanonicalUrl& base, std::string_view href_raw) {
    const std::string href = trim(href_raw);
    if (href.empty() || href.starts_with("#")) return std::nullopt;
    try {
        const auto sep = href.find("://");
        if (sep != std::string::npos && valid_scheme(std::string_view(href).substr(0, sep))) {
            auto u = canonicalize(href);
            if (u.scheme != "http" && u.scheme != "https") return std::nullopt;
            return u;
        }
        if (const auto colon = href.find(':'); colon != std::string::npos &&
                                               valid_scheme(std::string_view(href).substr(0, colon)) &&
                                               href.find('/') > colon)
            return std::nullopt;  // javascript:, mailto:, tel:, data: ...
        std::string origin = base.scheme + "://" + base.host;
        if (base.port) origin += ":" + std::to_string(*base.port);
        if (href.starts_with("//")) return canonicalize(base.scheme + ":" + href);
        if (href.starts_with("/")) return canonicalize(origin + href);
        if (href.starts_with("?")) return canonicalize(origin + base.path + href);
        const auto slash = base.path.rfind('/');
        const std::string dir = slash == std::string::npos ? "/" : base.path.substr(0, slash + 1);
        return canonicalize(origin + dir + href);
    } catch (const UrlError&) {
        return std::nullopt;
    }
}

bool host_within(std::string_view host, std::string_view domain) {
    if (host == domain) return true;
    return host.size() > domain.size() && host.ends_with(domain) &&
           host[host.size() - domain.size() - 1] == '.';
}

// ---------------------------------------------------------------------------
// Registry file

namespace {

const std::set<std::string, std::less<>> kKnownKeys{
    "name",          "base_domain", "subdomain_scheme",       "tld",
    "has_template_builder", "abuse_contact", "registrar", "domain_created",
    "takedown_fingerprints", "banner_markers"};

[[noreturn]] void fail(std::string_view source, std::size_t line, std::string_view field,
                       std::string_view what) {
    if (field.empty()) throw ParseError(fmt::format("{}:{}: {}", source, line, what));
    throw ParseError(fmt::format("{}:{}: field '{}': {}", source, line, field, what));
}

std::string require_string(const json& obj, const char* key, std::string_view src, std::size_t line) {
    if (!obj.contains(key)) fail(src, line, key, "missing");
    if (!obj[key].is_string()) fail(src, line, key, "expected string");
    return obj[key].get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* key, std::string_view src,
                                           std::size_t line) {
    if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
    if (!obj[key].is_string()) fail(src, line, key, "expected string");
    return obj[key].get<std::string>();
}

std::vector<std::string> string_list(const json& obj, const char* key, bool required,
                                     std::string_view src, std::size_t line) {
    if (!obj.contains(key)) {
        if (required) fail(src, line, key, "missing");
        return {};
    }
    if (!obj[key].is_array()) fail(src, line, key, "expected array of strings");
    std::vector<std::string> out;
    for (const auto& v : obj[key]) {
        if (!v.is_string()) fail(src, line, key, "expected array of strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

FhdEntry parse_entry(const json& obj, std::string_view src, std::size_t line) {
    if (!obj.is_object()) fail(src, line, "", "expected one JSON object per line");
    for (const auto& [key, _] : obj.items())
        if (!kKnownKeys.contains(key)) fail(src, line, key, "unknown key");

    FhdEntry e;
    e.name = require_string(obj, "name", src, line);
    if (e.name.empty()) fail(src, line, "name", "empty");
    e.base_domain = require_string(obj, "base_domain", src, line);
    const auto& bd = e.base_domain;
    if (bd != to_lower(bd)) fail(src, line, "base_domain", "must be lowercase");
    if (bd.find('.') == std::string::npos) fail(src, line, "base_domain", "must contain a dot");
    if (bd.find("://") != std::string::npos || bd.find('/') != std::string::npos ||
        bd.find(':') != std::string::npos)
        fail(src, line, "base_domain", "must be a bare domain (no scheme, path or port)");
    if (!std::all_of(bd.begin(), bd.end(), valid_host_char) || bd.front() == '.' || bd.back() == '.')
        fail(src, line, "base_domain", "invalid domain");

    const std::string scheme = require_string(obj, "subdomain_scheme", src, line);
    if (scheme == "subdomain_prefix") e.subdomain_scheme = SubdomainScheme::subdomain_prefix;
    else if (scheme == "path_suffix") e.subdomain_scheme = SubdomainScheme::path_suffix;
    else fail(src, line, "subdomain_scheme", "expected subdomain_prefix or path_suffix");

    e.tld = require_string(obj, "tld", src, line);
    if (e.tld != bd.substr(bd.rfind('.') + 1))
        fail(src, line, "tld", fmt::format("'{}' does not match base_domain '{}'", e.tld, bd));

    if (!obj.contains("has_template_builder")) fail(src, line, "has_template_builder", "missing");
    if (!obj["has_template_builder"].is_boolean())
        fail(src, line, "has_template_builder", "expected boolean");
    e.has_template_builder = obj["has_template_builder"].get<bool>();

    e.abuse_contact = optional_string(obj, "abuse_contact", src, line);
    if (e.abuse_contact && e.abuse_contact->find('@') == std::string::npos)
        fail(src, line, "abuse_contact", "not an email address");
    e.registrar = optional_string(obj, "registrar", src, line);
    if (auto created = optional_string(obj, "domain_created", src, line)) {
        try {
            const auto ts = parse_timestamp(*created + "T00:00:00Z");
            e.domain_created = std::chrono::year_month_day{std::chrono::floor<std::chrono::days>(ts)};
        } catch (const ParseError&) {
            fail(src, line, "domain_created", "expected YYYY-MM-DD");
        }
    }
    e.takedown_fingerprints = string_list(obj, "takedown_fingerprints", true, src, line);
    e.banner_markers = string_list(obj, "banner_markers", false, src, line);
    return e;
}

}  // namespace

Registry Registry::parse(std::string_view text, std::string_view source_name) {
    auto entries = std::make_shared<std::vector<FhdEntry>>();
    std::set<std::string, std::less<>> names, domains;
    std::size_t line_no = 0;
    for (const auto& raw_line : split(text, '\n')) {
        ++line_no;
        const std::string line = trim(raw_line);
        if (line.empty() || line.starts_with("#")) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            fail(source_name, line_no, "", fmt::format("invalid JSON: {}", e.what()));
        }
        FhdEntry entry = parse_entry(obj, source_name, line_no);
        if (domains.contains(entry.base_domain))
            throw DuplicateEntryError(fmt::format("{}:{}: duplicate base_domain '{}'", source_name,
                                                  line_no, entry.base_domain));
        if (names.contains(entry.name))
            throw DuplicateEntryError(
                fmt::format("{}:{}: duplicate name '{}'", source_name, line_no, entry.name));
        domains.insert(entry.base_domain);
        names.insert(entry.name);
        entries->push_back(std::move(entry));
    }
    if (entries->empty()) throw ParseError(fmt::format("{}: registry has no entries", source_name));
    Registry r;
    r.entries_ = std::move(entries);
    return r;
}

Registry Registry::load(const std::string& path) { return parse(read_file(path), path); }

const Registry& Registry::builtin() {
    static const Registry r = parse(detail::kBuiltinRegistry, "builtin registry");
    return r;
}

const std::vector<FhdEntry>& Registry::entries() const {
    static const std::vector<FhdEntry> empty;
    return entries_ ? *entries_ : empty;
}

const FhdEntry* Registry::find_by_name(std::string_view name) const {
    for (const auto& e : entries())
        if (e.name == name) return &e;
    return nullptr;
}

const FhdEntry* Registry::find_by_base_domain(std::string_view base_domain) const {
    for (const auto& e : entries())
        if (e.base_domain == base_domain) return &e;
    return nullptr;
}

std::optional<FhdMatch> Registry::match(const CanonicalUrl& url) const {
    for (const auto& e : entries()) {
        if (e.subdomain_scheme == SubdomainScheme::subdomain_prefix) {
            if (url.host.size() <= e.base_domain.size() + 1 || !host_within(url.host, e.base_domain))
                continue;
            std::string slug = url.host.substr(0, url.host.size() - e.base_domain.size() - 1);
            if (slug.starts_with("www.")) slug.erase(0, 4);
            if (slug.empty() || slug == "www") return std::nullopt;
            return FhdMatch{&e, std::move(slug)};
        }
        if (url.host != e.base_domain) continue;
        std::string_view p = url.path;
        while (!p.empty() && p.front() == '/') p.remove_prefix(1);
        while (!p.empty() && p.back() == '/') p.remove_suffix(1);
        if (p.empty()) return std::nullopt;
        return FhdMatch{&e, std::string(p)};
    }
    return std::nullopt;
}

std::string Registry::to_text() const {
    std::string out;
    for (const auto& e : entries()) {
        json obj;
        obj["name"] = e.name;
        obj["base_domain"] = e.base_domain;
        obj["subdomain_scheme"] = to_string(e.subdomain_scheme);
        obj["tld"] = e.tld;
        obj["has_template_builder"] = e.has_template_builder;
        if (e.abuse_contact) obj["abuse_contact"] = *e.abuse_contact;
        if (e.registrar) obj["registrar"] = *e.registrar;
        if (e.domain_created) {
            const auto& d = *e.domain_created;
            obj["domain_created"] = fmt::format("{:04}-{:02}-{:02}", static_cast<int>(d.year()),
                                                static_cast<unsigned>(d.month()),
                                                static_cast<unsigned>(d.day()));
        }
        obj["takedown_fingerprints"] = e.takedown_fingerprints;
        obj["banner_markers"] = e.banner_markers;
        out += obj.dump() + "\n";
    }
    return out;
}

Registry load_registry(const std::string& path) { return Registry::load(path); }

std::optional<FhdMatch> match_fhd(const CanonicalUrl& url, const Registry& registry) {
    return registry.match(url);
}

}  // namespace freephish

#pragma once

#include "freephish/common.hpp"

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace freephish {

class UrlError : public Error {
public:
    explicit UrlError(const std::string& message) : Error("url", message) {}
};

class DuplicateEntryError : public Error {
public:
    explicit DuplicateEntryError(const std::string& message) : Error("duplicate", message) {}
};

/// Where the free site's name lives in a hosted URL.
enum class SubdomainScheme {
    subdomain_prefix,  // name.weebly.com
    path_suffix,       // sites.google.com/view/name
};

std::string_view to_string(SubdomainScheme s);

/// One free web-hosting domain.
struct FhdEntry {
    std::string name;
    std::string base_domain;
    SubdomainScheme subdomain_scheme = SubdomainScheme::subdomain_prefix;
    std::string tld;
    bool has_template_builder = false;
    std::optional<std::string> abuse_contact;
    std::optional<std::string> registrar;
    std::optional<std::chrono::year_month_day> domain_created;
    /// Body substrings of the host's "site removed" page (case-insensitive).
    std::vector<std::string> takedown_fingerprints;
    /// class/id fragments of the host's free-site banner element.
    std::vector<std::string> banner_markers;
};

struct CanonicalUrl {
    std::string scheme;
    std::string host;
    std::optional<std::uint16_t> port;
    std::string path;
    std::optional<std::string> query;
    std::string original;

    std::string serialized() const;

    friend bool operator==(const CanonicalUrl& a, const CanonicalUrl& b) {
        return a.scheme == b.scheme && a.host == b.host && a.port == b.port && a.path == b.path &&
               a.query == b.query;
    }
};

/// Lowercases scheme and host, drops fragment, userinfo and default ports.
/// Scheme-less input ("foo.weebly.com/x") is accepted when the host has a dot.
/// Throws UrlError when no host can be found.
CanonicalUrl canonicalize(std::string_view raw);

/// Resolves an href found on `base` (absolute, scheme-relative, or relative).
/// Returns nullopt for non-http(s) schemes and unparseable hrefs.
std::optional<CanonicalUrl> resolve_href(const CanonicalUrl& base, std::string_view href);

struct FhdMatch {
    const FhdEntry* entry = nullptr;
    std::string site_slug;
};

/// Immutable set of FHD entries. Copies share storage, so FhdEntry pointers
/// handed out by match() stay valid for the lifetime of any copy.
class Registry {
public:
    Registry() = default;

    static Registry parse(std::string_view text, std::string_view source_name = "<registry>");
    static Registry load(const std::string& path);
    /// The 24-entry registry shipped in data/registry.jsonl, compiled in.
    static const Registry& builtin();

    const std::vector<FhdEntry>& entries() const;
    std::size_t size() const { return entries().size(); }
    const FhdEntry* find_by_name(std::string_view name) const;
    const FhdEntry* find_by_base_domain(std::string_view base_domain) const;

    std::optional<FhdMatch> match(const CanonicalUrl& url) const;

    /// Serializes back to the registry file format.
    std::string to_text() const;

private:
    std::shared_ptr<const std::vector<FhdEntry>> entries_;
};

Registry load_registry(const std::string& path);

std::optional<FhdMatch> match_fhd(const CanonicalUrl& url, const Registry& registry);

/// True when host equals domain or is a subdomain of it.
bool host_within(std::string_view host, std::string_view domain);

}  // namespace freephish

#pragma once

#include "freephish/registry.hpp"
#include "freephish/snapshot.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace freephish {

inline constexpr std::string_view kFeatureSchema = "freephish-features/1";
inline constexpr std::size_t kFeatureCount = 10;

/// Column names in vector order.
const std::array<std::string_view, kFeatureCount>& feature_names();
/// Index of a feature by name; throws ParseError for unknown names.
std::size_t feature_index(std::string_view name);
/// The last two features are real-valued ratios, everything else is 0/1.
constexpr bool is_ratio_feature(std::size_t index) { return index >= 8; }

struct Brand {
    std::string name;
    std::string official_domain;

    friend bool operator==(const Brand&, const Brand&) = default;
};

struct ExtractorConfig {
    std::vector<std::string> credential_keywords;
    std::vector<std::string> url_keywords;
    std::vector<Brand> brands;
    double brand_match_threshold = 0.25;
    int follow_depth = 1;
    int download_detection_threshold = 4;

    /// Shipped keyword lists and brand list.
    static ExtractorConfig defaults();

    /// Lowercases and deduplicates keyword lists (first occurrence wins) and
    /// checks thresholds. Throws PreconditionError.
    void normalize();
};

/// Reads a JSON config. Keys that are absent keep their default value.
ExtractorConfig load_extractor_config(const std::string& path);
ExtractorConfig parse_extractor_config(std::string_view json_text);
std::string extractor_config_to_json(const ExtractorConfig& config);

struct FeatureVector {
    bool is_fhd_hosted = false;
    bool has_credential_fields = false;
    bool banner_obfuscated = false;
    bool noindex_present = false;
    bool target_identified = false;
    bool links_external_phish = false;
    bool malicious_download = false;
    bool url_keyword_hit = false;
    double external_link_ratio = 0.0;
    double empty_link_ratio = 0.0;

    std::optional<std::string> target_brand;

    std::array<double, kFeatureCount> values() const;
    static FeatureVector from_values(const std::array<double, kFeatureCount>& v);

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// ---------------------------------------------------------------------------
// Pluggable contracts

/// Maps a download's content hash to an antivirus detection count.
/// nullopt means the hash is unknown. May throw TransportError.
class Scanner {
public:
    virtual ~Scanner() = default;
    virtual std::optional<int> detections(const std::string& content_hash) = 0;
};

class FixtureScanner final : public Scanner {
public:
    FixtureScanner() = default;
    /// JSON object {"<sha256>": count, ...}; a count of null marks a
    /// hash whose lookup fails with a transport error.
    static FixtureScanner load(const std::string& path);

    void set(std::string hash, int count) { counts_[std::move(hash)] = count; }
    void set_error(std::string hash) { errors_.push_back(std::move(hash)); }
    std::optional<int> detections(const std::string& content_hash) override;

private:
    std::map<std::string, int, std::less<>> counts_;
    std::vector<std::string> errors_;
};

/// Pulls brand-bearing text out of a page (e.g. OCR of a header image).
class TextExtractor {
public:
    virtual ~TextExtractor() = default;
    virtual std::string extract(std::string_view body) = 0;
};

class NullTextExtractor final : public TextExtractor {
public:
    std::string extract(std::string_view) override { return {}; }
};

// ---------------------------------------------------------------------------
// Individual features

/// Any visible input whose name/id/placeholder/type/aria-label/label text
/// contains a keyword. Matching ignores case and non-alphanumerics.
bool detect_credential_fields(std::string_view body, const std::vector<std::string>& keywords);

/// The FHD banner (class or id containing a marker) hidden by inline style,
/// by a <style> rule naming the marker, or left only inside a comment.
bool detect_banner_obfuscation(std::string_view body, const FhdEntry& entry);

bool detect_noindex(std::string_view body);

struct BrandMatch {
    std::string brand;
    double distance = 0.0;  // normalized edit distance, 0 for containment
};

/// Tokens a URL contributes to brand matching: the site slug and path for
/// FHD URLs, host labels (minus the TLD) and path otherwise.
std::vector<std::string> url_tokens(const CanonicalUrl& url, const Registry& registry);

std::optional<BrandMatch> identify_target(const CanonicalUrl& url, std::string_view body,
                                          const ExtractorConfig& config, const Registry& registry,
                                          TextExtractor* text_extractor = nullptr);

bool url_keyword_hit(const CanonicalUrl& url, const Registry& registry, const ExtractorConfig& config);

struct LinkRatios {
    double external = 0.0;
    double empty = 0.0;
};

LinkRatios link_ratios(std::string_view body, const CanonicalUrl& page, const Registry& registry);

/// Follows iframe/button targets of a page without credential fields.
/// Transport errors count as 0. Each distinct URL is fetched at most once.
bool detect_external_phish_link(const Snapshot& snapshot, Fetcher& fetcher, const Registry& registry,
                                const ExtractorConfig& config);

bool detect_malicious_download(const Snapshot& snapshot, Scanner* scanner, const ExtractorConfig& config);

struct ExtractionContext {
    const Registry& registry;
    const ExtractorConfig& config;
    Fetcher* fetcher = nullptr;  // no following when null
    Scanner* scanner = nullptr;  // downloads score 0 when null
    TextExtractor* text_extractor = nullptr;
};

FeatureVector extract_features(const Snapshot& snapshot, const ExtractionContext& ctx);

// ---------------------------------------------------------------------------
// Feature files: "# freephish-features/1" line, header row, then one TSV row
// per snapshot: id, url, the ten features, target_brand.

struct FeatureRow {
    std::string id;
    std::string url;
    FeatureVector vector;
};

std::string features_to_tsv(const std::vector<FeatureRow>& rows);
std::vector<FeatureRow> features_from_tsv(std::string_view text);
void save_features(const std::string& path, const std::vector<FeatureRow>& rows);
std::vector<FeatureRow> load_features(const std::string& path);

// ---------------------------------------------------------------------------
// Keyword derivation: most frequent slug tokens across a set of URLs.

/// Lowercase alphanumeric runs of the site slug (host label sequence for
/// non-FHD URLs), purely numeric runs dropped.
std::vector<std::string> slug_tokens(const CanonicalUrl& url, const Registry& registry);

/// Top-k tokens by count, ties broken lexicographically.
std::vector<std::pair<std::string, std::size_t>> top_keywords(const std::vector<CanonicalUrl>& urls,
                                                              const Registry& registry, std::size_t k);

}  // namespace freephish

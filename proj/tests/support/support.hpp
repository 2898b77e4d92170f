#pragma once

// Fixture loaders, generators and brute-force oracles shared by the unit
// tests and the acceptance runner. Oracles deliberately avoid the library
// code they check.

#include "freephish/classifier.hpp"
#include "freephish/features.hpp"
#include "freephish/monitor.hpp"
#include "freephish/reporter.hpp"
#include "freephish/similarity.hpp"
#include "freephish/snapshot.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fptest {

using namespace freephish;

std::string fixture_path(const std::string& rel);

/// Fresh empty directory under the system temp dir.
std::string temp_dir(const std::string& tag);

// ---------------------------------------------------------------------------
// Golden feature corpus

struct GoldenPage {
    std::string name;
    std::string url;
    Label label = Label::benign;
    FeatureVector expected;
    std::optional<std::string> target_brand;
};

/// Reads tests/fixtures/golden/manifest.json. Ratios are stored there as
/// hand-counted fractions like "2/5".
std::vector<GoldenPage> load_golden_manifest();

/// Fetches the page through the golden fixtures and extracts its vector.
FeatureVector extract_golden(const GoldenPage& page, FixtureFetcher& fetcher, FixtureScanner& scanner,
                             const ExtractorConfig& config = ExtractorConfig::defaults());

std::string describe(const FeatureVector& v);

// ---------------------------------------------------------------------------
// Oracles

/// Full (n+1)x(m+1) table, no row reuse.
std::size_t levenshtein_table(const std::string& a, const std::string& b);

/// Exhaustive positive/negative pair count; ties score one half.
double auc_pair_count(const std::vector<double>& scores, const std::vector<Label>& labels);

/// U for sample a by counting every (a_i, b_j) pair; ties score one half.
double mann_whitney_pair_count(const std::vector<double>& a, const std::vector<double>& b);

/// Direct evaluation of the tag-similarity definition with levenshtein_table.
double site_similarity_oracle(const TagSequence& a, const TagSequence& b);

// ---------------------------------------------------------------------------
// Paired t reference: ten pairs, t and two-sided p computed once at 50
// significant digits and frozen here.

extern const std::vector<double> kPairedA;
extern const std::vector<double> kPairedB;
extern const double kPairedT;
extern const double kPairedP;

// ---------------------------------------------------------------------------
// Coverage fixture

struct CoverageRow {
    Entity entity;
    std::size_t covered;    // out of kCoverageUrls
    Seconds median;         // over covered URLs
    std::string label;      // row name in the blocklisting table
};

inline constexpr std::size_t kCoverageUrls = 1000;

/// GSB, PhishTank, OpenPhish, eCrimeX, social media (twitter) and registrar
/// rows of the FHD blocklisting table.
const std::vector<CoverageRow>& coverage_rows();

/// One log covering every row: for each entity, exactly `covered` URLs get a
/// covering event within 7 days whose gaps have the requested median; some
/// of the others are covered only after the horizon.
ObservationLog make_coverage_log(std::uint64_t seed = 11);

/// Random log for property tests.
ObservationLog random_log(std::uint64_t seed, std::size_t n_urls = 40);

// ---------------------------------------------------------------------------
// Removal fixture

struct RemovalRow {
    std::string group;  // as the removal table names it
    std::string fhd;    // registry entry name
    std::size_t n_reported, n_control, removed_reported, removed_control;
    Seconds median_reported, median_control;
};

/// The ten rows of the reported-site removal table.
const std::vector<RemovalRow>& removal_rows();

struct RemovalFixture {
    ObservationLog log;
    std::vector<AbuseReport> reports;
};

RemovalFixture make_removal_fixture(std::uint64_t seed = 5);

// ---------------------------------------------------------------------------
// Similarity corpora

/// Pages built from a shared builder skeleton with a little page-specific
/// content, and pages with no shared structure at all.
std::string template_page(std::uint64_t seed);
std::string freeform_page(std::uint64_t seed);

/// Random markup for property tests (may be malformed).
std::string random_html(std::uint64_t seed, std::size_t n_tags = 40);

// ---------------------------------------------------------------------------
// Classifier data

/// Confusion matrix with metrics worked out by hand.
struct ConfusionCase {
    ConfusionMatrix cm;
    double accuracy;
    double phishing_precision, phishing_recall, phishing_f1;
    double benign_precision, benign_recall, benign_f1;
};

const std::vector<ConfusionCase>& confusion_cases();

/// Twelve scores with ties across classes.
struct ScoreFixture {
    std::vector<double> scores;
    std::vector<Label> labels;
};

ScoreFixture auc_fixture();

/// Two classes separated by has_credential_fields alone.
LabeledDataset separable_dataset(std::size_t n, std::uint64_t seed);

}  // namespace fptest

#pragma once

#include "freephish/classifier.hpp"
#include "freephish/monitor.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace freephish {

enum class Arm { reported, control };

std::string_view to_string(Arm a);
Arm arm_from(std::string_view s);

struct ArmAssignment {
    CanonicalUrl url;
    Arm arm = Arm::control;
};

/// Walks the discovery-ordered list two at a time; one URL of each pair is
/// reported, picked by a seeded coin. A trailing odd URL gets its own coin.
std::vector<ArmAssignment> assign_arm(const std::vector<CanonicalUrl>& urls, std::uint64_t seed);

struct AbuseReport {
    CanonicalUrl url;
    FhdEntry fhd;
    std::optional<std::string> target_brand;
    std::optional<std::string> screenshot_ref;
    Timestamp discovered_at{};
    Timestamp created_at{};
    Arm arm = Arm::control;
    std::optional<std::string> sent_to;
    std::optional<Timestamp> removal_observed_at;
    double score = 0.0;
    std::string model_version;
    std::vector<std::string> warnings;

    bool text_only() const { return !screenshot_ref.has_value(); }
};

/// Requires a phishing verdict. A reported-arm request for an FHD without an
/// abuse contact is moved to the control arm with a warning.
AbuseReport build_report(const Snapshot& snapshot, const Verdict& verdict, const FhdEntry& entry, Arm arm,
                         Timestamp created_at, std::optional<std::string> target_brand = std::nullopt);

struct EmailOptions {
    std::string from = "FreePhish Reports <reports@freephish.invalid>";
    std::string domain = "freephish.invalid";  // right-hand side of Message-ID
};

/// RFC 5322 message with CRLF line endings. `screenshot` holds the image
/// bytes when the report has a screenshot_ref. Control-arm reports raise.
std::string render_email(const AbuseReport& report, const std::optional<std::string>& screenshot,
                         const EmailOptions& opts = {});

/// Loads screenshot_ref from disk and renders.
std::string render_email(const AbuseReport& report, const EmailOptions& opts = {});

struct MessagePart {
    std::map<std::string, std::string> headers;  // lowercase names
    std::string body;                            // transfer-decoded
};

struct ParsedMessage {
    std::map<std::string, std::string> headers;  // lowercase names, unfolded
    std::string text;                            // the text/plain part
    std::vector<MessagePart> attachments;
};

/// Reader for the subset of MIME that render_email produces.
ParsedMessage parse_message(std::string_view message);

/// One report per line, JSON.
std::string reports_to_jsonl(const std::vector<AbuseReport>& reports);
std::vector<AbuseReport> reports_from_jsonl(std::string_view text, const Registry& registry);

// ---------------------------------------------------------------------------
// Removal comparison

enum class HostResponse { responded, automated, none, unknown };
std::string_view to_string(HostResponse r);
HostResponse host_response_from(std::string_view s);

struct ArmSummary {
    std::size_t n = 0;
    std::size_t removed = 0;
    double removal_rate = 0.0;
    std::optional<double> median_removal_seconds;
    /// Time from created_at to removal, censored at the horizon for URLs
    /// never seen removed.
    std::vector<double> censored_times;

    std::string median_hhmm() const;
};

struct TestSummary {
    std::optional<MannWhitneyResult> mann_whitney;
    std::optional<PairedTResult> paired_t;
    std::size_t paired_n = 0;
    std::string note;
};

struct FhdComparison {
    HostResponse response = HostResponse::unknown;
    ArmSummary reported;
    ArmSummary control;
};

struct ComparisonSummary {
    ArmSummary reported;
    ArmSummary control;
    std::map<std::string, FhdComparison> per_fhd;  // by group
    TestSummary tests;
    TestSummary tests_excluding_nonresponding;
};

/// FHD name -> reporting group; hosts run by one company share a group
/// (000webhost is Hostinger, the Google products are Google).
std::map<std::string, std::string> default_report_groups();
/// How each group answered abuse reports in the original experiment.
std::map<std::string, HostResponse> default_host_responses();

struct ComparisonOptions {
    std::uint64_t seed = 1;
    std::size_t paired_sample = 250;
    Entity removal_entity = Entity::registrar;
    /// FHD names missing here form a group of their own.
    std::map<std::string, std::string> groups = default_report_groups();
    /// Host behaviour after a report, by group. Missing groups are unknown.
    std::map<std::string, HostResponse> responses = default_host_responses();
};

/// Removal is the first removed event of `removal_entity` for the URL;
/// removals later than the log horizon after created_at do not count.
ComparisonSummary removal_comparison(const ObservationLog& log, const std::vector<AbuseReport>& reports,
                                     const ComparisonOptions& opts = {});

std::string format_comparison(const ComparisonSummary& s);

}  // namespace freephish

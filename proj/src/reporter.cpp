#include "freephish/reporter.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <filesystem>

namespace freephish {

using nlohmann::json;

std::string_view to_string(Arm a) { return a == Arm::reported ? "reported" : "control"; }

Arm arm_from(std::string_view s) {
    if (s == "reported") return Arm::reported;
    if (s == "control") return Arm::control;
    throw ParseError(fmt::format("unknown arm '{}'", s));
}

std::vector<ArmAssignment> assign_arm(const std::vector<CanonicalUrl>& urls, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<ArmAssignment> out;
    out.reserve(urls.size());
    std::size_t i = 0;
    for (; i + 1 < urls.size(); i += 2) {
        const bool first_reported = rng.coin();
        out.push_back({urls[i], first_reported ? Arm::reported : Arm::control});
        out.push_back({urls[i + 1], first_reported ? Arm::control : Arm::reported});
    }
    if (i < urls.size()) out.push_back({urls[i], rng.coin() ? Arm::reported : Arm::control});
    return out;
}

AbuseReport build_report(const Snapshot& snapshot, const Verdict& verdict, const FhdEntry& entry, Arm arm,
                         Timestamp created_at, std::optional<std::string> target_brand) {
    if (verdict.label != Label::phishing)
        throw PreconditionError(fmt::format("cannot report {}: verdict is {}", snapshot.url.serialized(),
                                            to_string(verdict.label)));
    AbuseReport r;
    r.url = snapshot.url;
    r.fhd = entry;
    r.target_brand = std::move(target_brand);
    r.screenshot_ref = snapshot.screenshot_ref;
    r.discovered_at = snapshot.discovery.first_seen;
    r.created_at = created_at;
    r.arm = arm;
    r.score = verdict.score;
    r.model_version = verdict.model_version;
    if (arm == Arm::reported) {
        if (entry.abuse_contact) {
            r.sent_to = entry.abuse_contact;
        } else {
            r.arm = Arm::control;
            r.warnings.push_back(fmt::format("{} has no abuse contact; moved to control arm", entry.name));
            spdlog::warn("{}: {} has no abuse contact; moved to control arm", snapshot.url.serialized(), entry.name);
        }
    }
    if (r.text_only()) r.warnings.emplace_back("no screenshot; text-only report");
    return r;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

constexpr std::string_view kCrlf = "\r\n";

std::string rfc5322_date(Timestamp t) { return fmt::format("{:%a, %d %b %Y %H:%M:%S} +0000", t); }

std::string content_type_for(const std::string& filename) {
    const std::string ext = to_lower(std::filesystem::path(filename).extension().string());
    if (ext == ".png") return "image/png";
    if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
    if (ext == ".gif") return "image/gif";
    if (ext == ".webp") return "image/webp";
    return "application/octet-stream";
}

std::string wrap76(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); i += 76) {
        out += s.substr(i, 76);
        out += kCrlf;
    }
    return out;
}

std::string with_crlf(std::string_view text) {
    std::string out;
    for (char c : text) {
        if (c == '\n') out += kCrlf;
        else out += c;
    }
    return out;
}

std::string report_text(const AbuseReport& r, const std::optional<std::string>& attachment_name) {
    std::string t;
    t += fmt::format("To the {} abuse team,\n\n", r.fhd.name);
    t += "We found a phishing website hosted on your service.\n\n";
    t += fmt::format("URL: {}\n", r.url.serialized());
    t += fmt::format("Targeted organization: {}\n", r.target_brand.value_or("not identified"));
    t += fmt::format("First seen: {}\n", format_timestamp(r.discovered_at));
    t += fmt::format("Reported at: {}\n", format_timestamp(r.created_at));
    t += fmt::format("Classifier score: {:.2f} (model {})\n\n", r.score, r.model_version);
    if (attachment_name) t += fmt::format("Screenshot: attached as {}\n\n", *attachment_name);
    else t += "Screenshot: not available for this report.\n\n";
    t += "Please review the site and take it down.\n";
    return t;
}

}  // namespace

std::string render_email(const AbuseReport& r, const std::optional<std::string>& screenshot,
                         const EmailOptions& opts) {
    if (r.arm != Arm::reported) throw PreconditionError("control-arm reports are never rendered");
    if (!r.sent_to) throw PreconditionError("reported-arm report has no recipient");
    const std::string key = sha256_hex(r.url.serialized() + "\n" + format_timestamp(r.created_at));
    const bool attach = r.screenshot_ref.has_value() && screenshot.has_value();
    const std::optional<std::string> filename =
        attach ? std::optional<std::string>(std::filesystem::path(*r.screenshot_ref).filename().string())
               : std::nullopt;

    std::string m;
    m += fmt::format("From: {}\r\n", opts.from);
    m += fmt::format("To: {}\r\n", *r.sent_to);
    m += fmt::format("Subject: Phishing website on {}\r\n", r.url.host);
    m += fmt::format("Date: {}\r\n", rfc5322_date(r.created_at));
    m += fmt::format("Message-ID: <{}@{}>\r\n", key.substr(0, 32), opts.domain);
    m += fmt::format("X-FreePhish-URL: {}\r\n", r.url.serialized());
    m += fmt::format("X-FreePhish-Target: {}\r\n", r.target_brand.value_or(""));
    m += fmt::format("X-FreePhish-First-Seen: {}\r\n", format_timestamp(r.discovered_at));
    m += "MIME-Version: 1.0\r\n";
    const std::string text = with_crlf(report_text(r, filename));
    if (!attach) {
        m += "Content-Type: text/plain; charset=utf-8\r\n";
        m += "Content-Transfer-Encoding: 8bit\r\n\r\n";
        m += text;
        return m;
    }
    const std::string boundary = "fp-" + key.substr(32, 24);
    m += fmt::format("Content-Type: multipart/mixed; boundary=\"{}\"\r\n\r\n", boundary);
    m += "This is a multi-part message in MIME format.\r\n";
    m += fmt::format("--{}\r\n", boundary);
    m += "Content-Type: text/plain; charset=utf-8\r\n";
    m += "Content-Transfer-Encoding: 8bit\r\n\r\n";
    m += text;
    m += fmt::format("--{}\r\n", boundary);
    m += fmt::format("Content-Type: {}; name=\"{}\"\r\n", content_type_for(*filename), *filename);
    m += fmt::format("Content-Disposition: attachment; filename=\"{}\"\r\n", *filename);
    m += "Content-Transfer-Encoding: base64\r\n\r\n";
    m += wrap76(base64_encode(*screenshot));
    m += fmt::format("--{}--\r\n", boundary);
    return m;
}

std::string render_email(const AbuseReport& r, const EmailOptions& opts) {
    std::optional<std::string> shot;
    if (r.screenshot_ref) shot = read_file(*r.screenshot_ref);
    return render_email(r, shot, opts);
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

std::string normalize_newlines(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\r' && i + 1 < s.size() && s[i + 1] == '\n') continue;
        out += s[i];
    }
    return out;
}

std::map<std::string, std::string> parse_headers(std::string_view block) {
    std::map<std::string, std::string> out;
    std::string last;
    for (const auto& line : split(block, '\n')) {
        if (line.empty()) continue;
        if ((line[0] == ' ' || line[0] == '\t') && !last.empty()) {
            out[last] += " " + trim(line);
            continue;
        }
        const auto colon = line.find(':');
        if (colon == std::string::npos) throw ParseError(fmt::format("bad header line '{}'", line));
        last = to_lower(trim(line.substr(0, colon)));
        out[last] = trim(line.substr(colon + 1));
    }
    return out;
}

std::pair<std::map<std::string, std::string>, std::string> split_entity(std::string_view s) {
    const auto sep = s.find("\n\n");
    if (sep == std::string_view::npos) return {parse_headers(s), {}};
    return {parse_headers(s.substr(0, sep)), std::string(s.substr(sep + 2))};
}

std::optional<std::string> header_param(const std::string& value, std::string_view name) {
    const std::string lower = to_lower(value);
    const auto pos = lower.find(std::string(name) + "=");
    if (pos == std::string::npos) return std::nullopt;
    std::string rest = value.substr(pos + name.size() + 1);
    if (!rest.empty() && rest[0] == '"') {
        const auto end = rest.find('"', 1);
        return rest.substr(1, end == std::string::npos ? std::string::npos : end - 1);
    }
    return trim(rest.substr(0, rest.find(';')));
}

std::string decode_part(const std::map<std::string, std::string>& headers, const std::string& body) {
    const auto it = headers.find("content-transfer-encoding");
    if (it != headers.end() && to_lower(it->second) == "base64") return base64_decode(body);
    return body;
}

}  // namespace

ParsedMessage parse_message(std::string_view message) {
    const std::string msg = normalize_newlines(message);
    auto [headers, body] = split_entity(msg);
    ParsedMessage out;
    out.headers = headers;
    const std::string ctype = headers.count("content-type") ? headers["content-type"] : "text/plain";
    if (!starts_with_icase(ctype, "multipart/")) {
        out.text = decode_part(headers, body);
        return out;
    }
    const auto boundary = header_param(ctype, "boundary");
    if (!boundary) throw ParseError("multipart message without boundary");
    const std::string delim = "--" + *boundary;
    std::size_t pos = body.find(delim);
    if (pos == std::string::npos) throw ParseError("multipart body has no parts");
    while (true) {
        pos += delim.size();
        if (body.compare(pos, 2, "--") == 0) break;
        if (body.compare(pos, 1, "\n") == 0) ++pos;
        const auto next = body.find("\n" + delim, pos);
        if (next == std::string::npos) throw ParseError("unterminated multipart body");
        auto [ph, pb] = split_entity(std::string_view(body).substr(pos, next + 1 - pos));
        MessagePart part{ph, decode_part(ph, pb)};
        const bool is_attachment =
            ph.count("content-disposition") && starts_with_icase(ph["content-disposition"], "attachment");
        if (!is_attachment && out.text.empty()) out.text = part.body;
        else out.attachments.push_back(std::move(part));
        pos = next + 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Report files

std::string reports_to_jsonl(const std::vector<AbuseReport>& reports) {
    std::string out;
    auto opt = [](const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); };
    for (const auto& r : reports) {
        json j = {{"url", r.url.serialized()},
                  {"url_original", r.url.original},
                  {"fhd", r.fhd.name},
                  {"target_brand", opt(r.target_brand)},
                  {"screenshot_ref", opt(r.screenshot_ref)},
                  {"discovered_at", format_timestamp(r.discovered_at)},
                  {"created_at", format_timestamp(r.created_at)},
                  {"arm", to_string(r.arm)},
                  {"sent_to", opt(r.sent_to)},
                  {"removal_observed_at",
                   r.removal_observed_at ? json(format_timestamp(*r.removal_observed_at)) : json(nullptr)},
                  {"score", r.score},
                  {"model_version", r.model_version},
                  {"warnings", r.warnings}};
        out += j.dump() + "\n";
    }
    return out;
}

std::vector<AbuseReport> reports_from_jsonl(std::string_view text, const Registry& registry) {
    std::vector<AbuseReport> out;
    std::size_t line_no = 0;
    auto opt = [](const json& j, const char* key) -> std::optional<std::string> {
        if (!j.contains(key) || j[key].is_null()) return std::nullopt;
        return j[key].get<std::string>();
    };
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            AbuseReport r;
            r.url = canonicalize(j.at("url").get<std::string>());
            r.url.original = j.value("url_original", r.url.serialized());
            const std::string fhd = j.at("fhd").get<std::string>();
            const FhdEntry* e = registry.find_by_name(fhd);
            if (!e) throw ParseError(fmt::format("unknown FHD '{}'", fhd));
            r.fhd = *e;
            r.target_brand = opt(j, "target_brand");
            r.screenshot_ref = opt(j, "screenshot_ref");
            r.discovered_at = parse_timestamp(j.at("discovered_at").get<std::string>());
            r.created_at = parse_timestamp(j.at("created_at").get<std::string>());
            r.arm = arm_from(j.at("arm").get<std::string>());
            r.sent_to = opt(j, "sent_to");
            if (auto t = opt(j, "removal_observed_at")) r.removal_observed_at = parse_timestamp(*t);
            r.score = j.value("score", 0.0);
            r.model_version = j.value("model_version", std::string{});
            r.warnings = j.value("warnings", std::vector<std::string>{});
            if (r.arm == Arm::reported && !r.sent_to) throw ParseError("reported arm without sent_to");
            if (r.removal_observed_at && *r.removal_observed_at < r.created_at)
                throw ParseError("removal_observed_at precedes created_at");
            out.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw ParseError(fmt::format("reports line {}: {}", line_no, e.what()));
        } catch (const Error& e) {
            throw ParseError(fmt::format("reports line {}: {}", line_no, e.what()));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Comparison

std::string_view to_string(HostResponse r) {
    switch (r) {
        case HostResponse::responded: return "R";
        case HostResponse::automated: return "R'";
        case HostResponse::none: return "NR";
        case HostResponse::unknown: return "?";
    }
    return "?";
}

HostResponse host_response_from(std::string_view s) {
    if (s == "R" || s == "responded") return HostResponse::responded;
    if (s == "R'" || s == "automated") return HostResponse::automated;
    if (s == "NR" || s == "none") return HostResponse::none;
    if (s == "?" || s == "unknown") return HostResponse::unknown;
    throw ParseError(fmt::format("unknown host response '{}'", s));
}

std::map<std::string, std::string> default_report_groups() {
    return {{"000webhost", "Hostinger"}, {"Google Sites", "Google"}, {"Google Forms", "Google"},
            {"Blogspot", "Google"}};
}

std::map<std::string, HostResponse> default_host_responses() {
    return {{"Hostinger", HostResponse::responded}, {"Netlify", HostResponse::responded},
            {"Wix", HostResponse::responded},       {"glitch.me", HostResponse::responded},
            {"Weebly", HostResponse::none},         {"DuckDNS", HostResponse::none},
            {"Yolasite", HostResponse::none},       {"Google", HostResponse::automated},
            {"Herokuapp", HostResponse::automated}, {"Square up", HostResponse::automated}};
}

std::string ArmSummary::median_hhmm() const {
    if (!median_removal_seconds) return "n/a";
    return format_hhmm(Seconds{static_cast<Seconds::rep>(std::llround(*median_removal_seconds))});
}

namespace {

struct Outcome {
    const AbuseReport* report;
    std::optional<double> removal_seconds;
};

ArmSummary summarize(const std::vector<Outcome>& outcomes, Arm arm, double censor_at) {
    ArmSummary s;
    std::vector<double> removed;
    for (const auto& o : outcomes) {
        if (o.report->arm != arm) continue;
        ++s.n;
        if (o.removal_seconds) {
            removed.push_back(*o.removal_seconds);
            s.censored_times.push_back(*o.removal_seconds);
        } else {
            s.censored_times.push_back(censor_at);
        }
    }
    s.removed = removed.size();
    s.removal_rate = s.n == 0 ? 0.0 : static_cast<double>(s.removed) / static_cast<double>(s.n);
    if (!removed.empty()) s.median_removal_seconds = median(removed);
    return s;
}

TestSummary run_tests(const ArmSummary& reported, const ArmSummary& control, const ComparisonOptions& opts) {
    TestSummary t;
    const auto& a = reported.censored_times;
    const auto& b = control.censored_times;
    if (a.size() < 2 || b.size() < 2) {
        t.note = "fewer than 2 reports in an arm";
        return t;
    }
    try {
        t.mann_whitney = mann_whitney_u(a, b);
    } catch (const DegenerateTestError& e) {
        t.note = fmt::format("Mann-Whitney degenerate: {}", e.what());
    }

    // Paired protocol: equal-size seeded samples from each arm, paired in draw order.
    auto sample = [&](std::vector<double> v, std::uint64_t stream) {
        Rng rng(mix_seed(opts.seed, stream));
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
        return v;
    };
    const std::size_t k = std::min({opts.paired_sample, a.size(), b.size()});
    auto sa = sample(a, 0), sb = sample(b, 1);
    sa.resize(k);
    sb.resize(k);
    t.paired_n = k;
    try {
        t.paired_t = paired_t_test(sa, sb);
    } catch (const DegenerateTestError& e) {
        if (!t.note.empty()) t.note += "; ";
        t.note += fmt::format("paired t-test degenerate: {}", e.what());
    }
    return t;
}

}  // namespace

ComparisonSummary removal_comparison(const ObservationLog& log, const std::vector<AbuseReport>& reports,
                                     const ComparisonOptions& opts) {
    const double horizon = static_cast<double>(log.horizon().count());
    std::vector<Outcome> outcomes;
    for (const auto& r : reports) {
        const std::string id = r.url.serialized();
        if (!log.last_state(id, opts.removal_entity))
            throw PreconditionError(fmt::format("no {} observations for {}", to_string(opts.removal_entity), id));
        Outcome o{&r, std::nullopt};
        if (const auto removed = log.first_removed(id, opts.removal_entity)) {
            const double gap = static_cast<double>(std::max(Seconds{0}, *removed - r.created_at).count());
            if (gap <= horizon) o.removal_seconds = gap;
        }
        outcomes.push_back(o);
    }
    // never-removed URLs rank after every observed removal
    const double censor_at = horizon + 1.0;

    ComparisonSummary s;
    s.reported = summarize(outcomes, Arm::reported, censor_at);
    s.control = summarize(outcomes, Arm::control, censor_at);

    auto group_of = [&](const AbuseReport& r) {
        const auto it = opts.groups.find(r.fhd.name);
        return it == opts.groups.end() ? r.fhd.name : it->second;
    };
    std::map<std::string, std::vector<Outcome>> by_fhd;
    for (const auto& o : outcomes) by_fhd[group_of(*o.report)].push_back(o);
    for (const auto& [name, group] : by_fhd) {
        FhdComparison c;
        const auto it = opts.responses.find(name);
        c.response = it == opts.responses.end() ? HostResponse::unknown : it->second;
        c.reported = summarize(group, Arm::reported, censor_at);
        c.control = summarize(group, Arm::control, censor_at);
        s.per_fhd[name] = std::move(c);
    }

    s.tests = run_tests(s.reported, s.control, opts);
    std::vector<Outcome> responding;
    for (const auto& o : outcomes) {
        const auto it = opts.responses.find(group_of(*o.report));
        if (it == opts.responses.end() || it->second != HostResponse::none) responding.push_back(o);
    }
    s.tests_excluding_nonresponding =
        run_tests(summarize(responding, Arm::reported, censor_at), summarize(responding, Arm::control, censor_at), opts);
    return s;
}

namespace {

std::string format_tests(const TestSummary& t) {
    std::string out;
    if (t.mann_whitney)
        out += fmt::format("mann_whitney\tU={:g}\tz={:.4f}\tp={}\n", t.mann_whitney->u, t.mann_whitney->z,
                           format_p_value(t.mann_whitney->p_two_sided));
    if (t.paired_t)
        out += fmt::format("paired_t (equal-size random pairing, n={})\tt={:.4f}\tdf={:g}\tp={}\n", t.paired_n,
                           t.paired_t->t, t.paired_t->df, format_p_value(t.paired_t->p_two_sided));
    if (!t.note.empty()) out += fmt::format("note\t{}\n", t.note);
    return out;
}

}  // namespace

std::string format_comparison(const ComparisonSummary& s) {
    std::string out = "group\tresponse\turls_reported\turls_control\tremoved_reported\tremoved_control\t"
                      "median_reported\tmedian_control\n";
    auto row = [](const std::string& name, std::string_view resp, const ArmSummary& r, const ArmSummary& c) {
        return fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", name, resp, r.n, c.n, r.removed, c.removed,
                           r.median_hhmm(), c.median_hhmm());
    };
    for (const auto& [name, c] : s.per_fhd) out += row(name, to_string(c.response), c.reported, c.control);
    out += row("ALL", "-", s.reported, s.control);
    out += fmt::format("removal_rate\treported={:.1f}%\tcontrol={:.1f}%\n", 100 * s.reported.removal_rate,
                       100 * s.control.removal_rate);
    out += "[all hosts]\n" + format_tests(s.tests);
    out += "[excluding non-responding hosts]\n" + format_tests(s.tests_excluding_nonresponding);
    return out;
}

}  // namespace freephish

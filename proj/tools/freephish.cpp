// freephish: command-line front end for the FreePhish toolkit.

#include "freephish/classifier.hpp"
#include "freephish/features.hpp"
#include "freephish/monitor.hpp"
#include "freephish/registry.hpp"
#include "freephish/reporter.hpp"
#include "freephish/service.hpp"
#include "freephish/similarity.hpp"
#include "freephish/snapshot.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <thread>

namespace fs = std::filesystem;
using namespace freephish;

namespace {

std::string env_or(const char* name, std::string fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

Registry open_registry(const std::string& path) {
    return path.empty() ? Registry::builtin() : Registry::load(path);
}

ExtractorConfig open_extractor_config(const std::string& path) {
    return path.empty() ? ExtractorConfig::defaults() : load_extractor_config(path);
}

struct CommonOpts {
    std::string registry;
};

void add_registry_opt(CLI::App* cmd, CommonOpts& o, bool use_env = false) {
    auto* opt = cmd->add_option("--registry", o.registry, "FHD registry file (JSONL); built-in list when omitted");
    if (use_env) opt->envname("FREEPHISH_REGISTRY");
}

// ---------------------------------------------------------------------------

struct IngestOpts : CommonOpts {
    std::string feed, fixtures, corpus;
};

int run_ingest(const IngestOpts& o) {
    const Registry registry = open_registry(o.registry);
    FixtureFetcher fetcher(o.fixtures);
    CorpusWriter corpus(o.corpus);
    std::map<IngestStatus, std::size_t> counts;
    for (const auto& item : load_feed(o.feed)) {
        const auto out = ingest_item(item, fetcher, registry, corpus);
        ++counts[out.status];
        if (out.status == IngestStatus::fetch_failed || out.status == IngestStatus::invalid_url)
            std::cerr << fmt::format("{}\t{}\t{}\n", to_string(out.status), item.url, out.message);
    }
    for (auto s : {IngestStatus::ingested, IngestStatus::duplicate, IngestStatus::not_fhd, IngestStatus::invalid_url,
                   IngestStatus::fetch_failed})
        std::cout << fmt::format("{}\t{}\n", to_string(s), counts[s]);
    return 0;
}

struct FeaturesOpts : CommonOpts {
    std::string corpus, out, config, fixtures, scanner;
    bool lenient = false;
};

int run_features(const FeaturesOpts& o) {
    const Registry registry = open_registry(o.registry);
    const ExtractorConfig config = open_extractor_config(o.config);
    std::unique_ptr<FixtureFetcher> fetcher;
    if (!o.fixtures.empty()) fetcher = std::make_unique<FixtureFetcher>(o.fixtures);
    std::optional<FixtureScanner> scanner;
    if (!o.scanner.empty()) scanner = FixtureScanner::load(o.scanner);
    ExtractionContext ctx{registry, config, fetcher.get(), scanner ? &*scanner : nullptr, nullptr};
    std::vector<FeatureRow> rows;
    CorpusReader reader(o.corpus, o.lenient);
    while (auto s = reader.next()) rows.push_back({s->id, s->url.serialized(), extract_features(*s, ctx)});
    save_features(o.out, rows);
    std::cout << fmt::format("rows\t{}\nskipped\t{}\n", rows.size(), reader.skipped().size());
    return 0;
}

struct TrainOpts {
    std::string features, labels, out, params, test_out;
    std::size_t synthetic = 0;
    std::uint64_t synthetic_seed = 7;
    double train_fraction = 1.0;
    std::uint64_t split_seed = 1;
    unsigned threads = 0;
};

LabeledDataset training_data(const TrainOpts& o) {
    if (o.synthetic > 0) return generate_synthetic(o.synthetic, o.synthetic_seed);
    if (o.features.empty() || o.labels.empty())
        throw PreconditionError("--features and --labels are required unless --synthetic is given");
    return join_labels(load_features(o.features), load_labels(o.labels));
}

int run_train(const TrainOpts& o) {
    const ForestParams params = o.params.empty() ? ForestParams{} : load_forest_params(o.params);
    LabeledDataset data = training_data(o);
    LabeledDataset test;
    if (o.train_fraction < 1.0) std::tie(data, test) = split_train_test(data, o.train_fraction, o.split_seed);
    const unsigned threads = o.threads ? o.threads : std::max(1u, std::thread::hardware_concurrency());
    const Forest forest = train_forest(data, params, threads);
    save_forest(o.out, forest);
    std::cout << fmt::format("model_version\t{}\ntrain_rows\t{}\n", forest.model_version, data.rows.size());
    if (!test.rows.empty()) {
        std::cout << fmt::format("test_rows\t{}\n", test.rows.size()) << format_metrics(evaluate(forest, test));
        if (!o.test_out.empty()) {
            std::vector<std::pair<std::string, Label>> ids;
            for (const auto& r : test.rows) ids.emplace_back(r.id, r.y);
            save_labels(o.test_out, ids);
        }
    }
    return 0;
}

struct EvalOpts {
    std::string model, features, labels;
};

int run_eval(const EvalOpts& o) {
    const Forest forest = load_forest(o.model);
    const auto labels = load_labels(o.labels);
    std::vector<FeatureRow> rows;
    for (auto& r : load_features(o.features))
        if (labels.count(r.id) || labels.count(r.url)) rows.push_back(std::move(r));
    std::cout << format_metrics(evaluate(forest, join_labels(rows, labels)));
    return 0;
}

struct ClassifyOpts : CommonOpts {
    std::string model, url, html, fixtures, scanner;
};

int run_classify(const ClassifyOpts& o) {
    std::shared_ptr<Fetcher> fetcher;
    if (!o.fixtures.empty()) fetcher = std::make_shared<FixtureFetcher>(o.fixtures);
    std::shared_ptr<Scanner> scanner;
    if (!o.scanner.empty()) scanner = std::make_shared<FixtureScanner>(FixtureScanner::load(o.scanner));
    SystemClock clock;
    ClassificationService service(open_registry(o.registry), ServiceConfig{}, clock, fetcher, scanner);
    service.load_model(load_forest(o.model));
    ClassifyRequest req{o.url, std::nullopt, "cli"};
    if (!o.html.empty()) req.html = read_file(o.html);
    const ClassifyResponse r = service.classify(req);
    std::cout << fmt::format("{}\t{}\t{}\tfhd={}\tbrand={}\tmodel={}", r.label,
                             r.score ? fmt::format("{:.4f}", *r.score) : "-", canonicalize(o.url).serialized(),
                             r.fhd_name.value_or("-"), r.target_brand.value_or("-"), r.model_version);
    for (const auto& n : r.notes) std::cout << "\tnote=" << n;
    std::cout << "\n";
    return 0;
}

struct SimilarityOpts {
    std::string a, b;
    std::size_t cap = 5000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    bool per_tag = false;
};

int run_similarity(const SimilarityOpts& o) {
    const TagSequence a = extract_tags(read_file(o.a));
    const TagSequence b = extract_tags(read_file(o.b));
    const SimilarityResult r = site_similarity(a, b, {o.cap, o.seed, o.threads});
    std::cout << fmt::format("overall\t{:.6f}\na_to_b\t{:.6f}\nb_to_a\t{:.6f}\ntags_a\t{}\ntags_b\t{}\napproximate\t{}\n",
                             r.overall, r.sim_a_to_b, r.sim_b_to_a, a.size(), b.size(), r.approximate);
    if (o.per_tag)
        for (std::size_t i = 0; i < r.per_tag_max.size(); ++i)
            std::cout << fmt::format("tag\t{}\t{:.6f}\n", i, r.per_tag_max[i]);
    return 0;
}

struct MonitorOpts : CommonOpts {
    std::string targets, clients, out, interval = "10m", horizon = "7d", clock = "simulated";
};

int run_monitor(const MonitorOpts& o) {
    const Registry registry = open_registry(o.registry);
    const auto targets = load_targets(o.targets);
    if (targets.empty()) throw PreconditionError("no targets");
    auto clients = load_clients(o.clients, targets, registry);
    std::vector<EntityClient*> raw;
    for (auto& c : clients) raw.push_back(c.get());
    ObservationLog log(parse_duration(o.horizon));
    for (const auto& t : targets) log.set_first_seen(t.url.serialized(), t.first_seen);

    std::unique_ptr<Clock> clock;
    if (o.clock == "simulated") {
        Timestamp start = targets.front().first_seen;
        for (const auto& t : targets) start = std::min(start, t.first_seen);
        clock = std::make_unique<ManualClock>(start);
    } else {
        clock = std::make_unique<SystemClock>();
    }
    MonitorScheduler scheduler(targets, raw, *clock, log, parse_duration(o.interval));
    std::size_t cycles = 0;
    scheduler.run({}, [&](const PollResult&) { ++cycles; });
    log.save(o.out);
    std::cout << fmt::format("cycles\t{}\nevents\t{}\nnotes\t{}\n", cycles, log.events().size(), log.notes().size());
    return 0;
}

struct CoverageOpts : CommonOpts {
    std::string log, entity = "gsb", horizon = "7d";
    int min_detections = 1;
    bool by_fhd = false;
};

int run_coverage(const CoverageOpts& o) {
    const Seconds horizon = parse_duration(o.horizon);
    const ObservationLog log = ObservationLog::load(o.log, horizon);
    const Entity entity = entity_from(o.entity);
    std::cout << format_coverage(coverage(log, entity, horizon, kDefaultCurveHours, o.min_detections));
    if (o.by_fhd) {
        const Registry registry = open_registry(o.registry);
        for (const auto& [name, r] : coverage_by_fhd(log, entity, horizon, registry, o.min_detections))
            std::cout << fmt::format("fhd\t{}\t{}/{}\t{:.1f}%\t{}\n", name, r.covered, r.n_urls,
                                     100.0 * r.coverage_fraction, r.median_hhmm());
    }
    return 0;
}

// ---------------------------------------------------------------------------
// report

struct ReportAssignOpts : CommonOpts {
    std::string corpus, out;
    std::uint64_t seed = 1;
};

int run_report_assign(const ReportAssignOpts& o) {
    auto snaps = load_corpus(o.corpus);
    std::stable_sort(snaps.begin(), snaps.end(), [](const Snapshot& a, const Snapshot& b) {
        return a.discovery.first_seen < b.discovery.first_seen;
    });
    std::vector<CanonicalUrl> urls;
    for (const auto& s : snaps) urls.push_back(s.url);
    std::string text;
    for (const auto& a : assign_arm(urls, o.seed)) text += fmt::format("{}\t{}\n", a.url.serialized(), to_string(a.arm));
    write_file(o.out, text);
    std::cout << fmt::format("assigned\t{}\n", urls.size());
    return 0;
}

std::map<std::string, Arm> load_assignments(const std::string& path) {
    std::map<std::string, Arm> out;
    for (const auto& raw : split(read_file(path), '\n')) {
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        const auto f = split(line, '\t');
        if (f.size() != 2) throw ParseError(fmt::format("bad assignment line '{}'", line));
        out[canonicalize(f[0]).serialized()] = arm_from(f[1]);
    }
    return out;
}

struct ReportBuildOpts : CommonOpts {
    std::string corpus, model, assignments, out, created_at, fixtures, scanner, config;
};

int run_report_build(const ReportBuildOpts& o) {
    const Registry registry = open_registry(o.registry);
    const ExtractorConfig config = open_extractor_config(o.config);
    const Forest forest = load_forest(o.model);
    const auto arms = load_assignments(o.assignments);
    std::unique_ptr<FixtureFetcher> fetcher;
    if (!o.fixtures.empty()) fetcher = std::make_unique<FixtureFetcher>(o.fixtures);
    std::optional<FixtureScanner> scanner;
    if (!o.scanner.empty()) scanner = FixtureScanner::load(o.scanner);
    ExtractionContext ctx{registry, config, fetcher.get(), scanner ? &*scanner : nullptr, nullptr};

    std::vector<AbuseReport> reports;
    std::size_t skipped = 0;
    for (const auto& s : load_corpus(o.corpus)) {
        const auto arm = arms.find(s.url.serialized());
        const auto m = registry.match(s.url);
        if (arm == arms.end() || !m) {
            ++skipped;
            continue;
        }
        const FeatureVector fv = extract_features(s, ctx);
        const Verdict v = predict(forest, fv);
        if (v.label != Label::phishing) {
            ++skipped;
            continue;
        }
        const Timestamp created = o.created_at.empty() ? s.fetch_time : parse_timestamp(o.created_at);
        AbuseReport r = build_report(s, v, *m->entry, arm->second, created, fv.target_brand);
        for (const auto& w : r.warnings) std::cerr << fmt::format("warning\t{}\t{}\n", r.url.serialized(), w);
        reports.push_back(std::move(r));
    }
    write_file(o.out, reports_to_jsonl(reports));
    std::cout << fmt::format("reports\t{}\nskipped\t{}\n", reports.size(), skipped);
    return 0;
}

struct ReportRenderOpts : CommonOpts {
    std::string reports, out_dir, screenshot_dir;
};

int run_report_render(const ReportRenderOpts& o) {
    const Registry registry = open_registry(o.registry);
    fs::create_directories(o.out_dir);
    std::size_t rendered = 0;
    for (const auto& r : reports_from_jsonl(read_file(o.reports), registry)) {
        if (r.arm != Arm::reported) continue;
        std::optional<std::string> shot;
        if (r.screenshot_ref) {
            fs::path p(*r.screenshot_ref);
            if (p.is_relative() && !o.screenshot_dir.empty()) p = fs::path(o.screenshot_dir) / p;
            shot = read_file(p.string());
        }
        const std::string name = sha256_hex(r.url.serialized()).substr(0, 16) + ".eml";
        write_file((fs::path(o.out_dir) / name).string(), render_email(r, shot));
        ++rendered;
    }
    std::cout << fmt::format("rendered\t{}\n", rendered);
    return 0;
}

struct ReportCompareOpts : CommonOpts {
    std::string reports, log, responses, groups, horizon = "7d", entity = "registrar";
    std::uint64_t seed = 1;
    std::size_t paired_sample = 250;
};

int run_report_compare(const ReportCompareOpts& o) {
    const Registry registry = open_registry(o.registry);
    const ObservationLog log = ObservationLog::load(o.log, parse_duration(o.horizon));
    ComparisonOptions opts;
    opts.seed = o.seed;
    opts.paired_sample = o.paired_sample;
    opts.removal_entity = entity_from(o.entity);
    if (!o.responses.empty()) {
        opts.responses.clear();
        const auto j = nlohmann::json::parse(read_file(o.responses));
        for (const auto& [name, v] : j.items()) opts.responses[name] = host_response_from(v.get<std::string>());
    }
    if (!o.groups.empty()) {
        opts.groups.clear();
        const auto j = nlohmann::json::parse(read_file(o.groups));
        for (const auto& [name, v] : j.items()) opts.groups[name] = v.get<std::string>();
    }
    std::cout << format_comparison(removal_comparison(log, reports_from_jsonl(read_file(o.reports), registry), opts));
    return 0;
}

// ---------------------------------------------------------------------------

struct ServeOpts : CommonOpts {
    std::string model, host = "127.0.0.1", fixtures, scanner, cache_ttl = "15m";
    int port = 8080;
    int timeout_ms = 10'000;
};

HttpServer* g_server = nullptr;

int run_serve(const ServeOpts& o) {
    if (o.model.empty()) throw PreconditionError("--model or FREEPHISH_MODEL is required");
    std::shared_ptr<Fetcher> fetcher;
    if (!o.fixtures.empty()) fetcher = std::make_shared<FixtureFetcher>(o.fixtures);
    std::shared_ptr<Scanner> scanner;
    if (!o.scanner.empty()) scanner = std::make_shared<FixtureScanner>(FixtureScanner::load(o.scanner));
    ServiceConfig cfg;
    cfg.cache_ttl = parse_duration(o.cache_ttl);
    cfg.request_timeout = std::chrono::milliseconds(o.timeout_ms);
    SystemClock clock;
    ClassificationService service(open_registry(o.registry), cfg, clock, fetcher, scanner);
    service.load_model(load_forest(o.model));
    HttpServer server(service);
    const int port = server.bind(o.host, o.port);
    std::cout << fmt::format("listening\thttp://{}:{}\tmodel={}\n", o.host, port, *service.model_version())
              << std::flush;
    g_server = &server;
    std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
    std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
    server.listen();
    g_server = nullptr;
    return 0;
}

struct KeywordsOpts : CommonOpts {
    std::string corpus, feed;
    std::size_t top = 20;
};

int run_keywords(const KeywordsOpts& o) {
    const Registry registry = open_registry(o.registry);
    std::vector<CanonicalUrl> urls;
    if (!o.corpus.empty())
        for (const auto& s : load_corpus(o.corpus)) urls.push_back(s.url);
    if (!o.feed.empty())
        for (const auto& item : load_feed(o.feed)) urls.push_back(canonicalize(item.url));
    if (urls.empty()) throw PreconditionError("--corpus or --feed with at least one URL is required");
    for (const auto& [token, count] : top_keywords(urls, registry, o.top)) std::cout << token << "\t" << count << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"freephish: phishing detection and measurement on free web-hosting domains"};
    app.require_subcommand(1);
    int status = 0;
    std::function<int()> action;

    IngestOpts ingest;
    auto* c = app.add_subcommand("ingest", "Fetch FHD URLs from a feed into a snapshot corpus");
    c->add_option("--feed", ingest.feed, "Feed file (JSONL)")->required();
    c->add_option("--fixtures", ingest.fixtures, "Fixture directory holding responses.json")->required();
    c->add_option("--out,--corpus", ingest.corpus, "Corpus file to append to")->required();
    add_registry_opt(c, ingest);
    c->callback([&] { action = [&] { return run_ingest(ingest); }; });

    FeaturesOpts features;
    c = app.add_subcommand("features", "Extract feature vectors from a corpus");
    c->add_option("--corpus", features.corpus, "Snapshot corpus")->required();
    c->add_option("--out", features.out, "Output TSV")->required();
    c->add_option("--config", features.config, "Extractor config (JSON)");
    c->add_option("--fixtures", features.fixtures, "Fixture directory for following iframe/button targets");
    c->add_option("--scanner", features.scanner, "Scanner fixture (JSON hash -> detections)");
    c->add_flag("--lenient", features.lenient, "Skip corrupt corpus records");
    add_registry_opt(c, features);
    c->callback([&] { action = [&] { return run_features(features); }; });

    TrainOpts train;
    c = app.add_subcommand("train", "Train a random forest");
    c->add_option("--features", train.features, "Feature TSV");
    c->add_option("--labels", train.labels, "Labels file");
    c->add_option("--synthetic", train.synthetic, "Train on N synthetic rows instead");
    c->add_option("--synthetic-seed", train.synthetic_seed, "Seed for --synthetic");
    c->add_option("--out", train.out, "Model file to write")->required();
    c->add_option("--params", train.params, "Forest parameters (JSON)");
    c->add_option("--train-fraction", train.train_fraction, "Stratified train share; the rest is evaluated")
        ->check(CLI::Range(0.0, 1.0));
    c->add_option("--split-seed", train.split_seed, "Seed for the split");
    c->add_option("--test-out", train.test_out, "Write held-out labels here");
    c->add_option("--threads", train.threads, "Worker threads (0 = all cores)");
    c->callback([&] { action = [&] { return run_train(train); }; });

    EvalOpts eval;
    c = app.add_subcommand("eval", "Evaluate a model on labelled feature rows");
    c->add_option("--model", eval.model, "Model file")->required();
    c->add_option("--features", eval.features, "Feature TSV")->required();
    c->add_option("--labels", eval.labels, "Labels file; rows without a label are ignored")->required();
    c->callback([&] { action = [&] { return run_eval(eval); }; });

    ClassifyOpts classify;
    c = app.add_subcommand("classify", "Classify one URL");
    c->add_option("--model", classify.model, "Model file")->required()->envname("FREEPHISH_MODEL");
    c->add_option("--url", classify.url, "URL to classify")->required();
    c->add_option("--html", classify.html, "Page HTML file; fetched through --fixtures when omitted");
    c->add_option("--fixtures", classify.fixtures, "Fixture directory holding responses.json");
    c->add_option("--scanner", classify.scanner, "Scanner fixture");
    add_registry_opt(c, classify, true);
    c->callback([&] { action = [&] { return run_classify(classify); }; });

    SimilarityOpts sim;
    c = app.add_subcommand("similarity", "Tag-level code similarity of two HTML files");
    c->add_option("a", sim.a, "First HTML file")->required();
    c->add_option("b", sim.b, "Second HTML file")->required();
    c->add_option("--cap", sim.cap, "Sample longer tag sequences down to this size");
    c->add_option("--seed", sim.seed, "Sampling seed");
    c->add_option("--threads", sim.threads, "Worker threads");
    c->add_flag("--per-tag", sim.per_tag, "Also print the per-tag maxima of a against b");
    c->callback([&] { action = [&] { return run_similarity(sim); }; });

    MonitorOpts monitor;
    c = app.add_subcommand("monitor", "Poll entities for each target until the horizon");
    c->add_option("--targets", monitor.targets, "Targets (JSONL)")->required();
    c->add_option("--clients", monitor.clients, "Client config (JSON)")->required();
    c->add_option("--out", monitor.out, "Observation log to write")->required();
    c->add_option("--interval", monitor.interval, "Poll interval");
    c->add_option("--horizon", monitor.horizon, "Observation horizon");
    c->add_option("--clock", monitor.clock, "simulated (jump between cycles) or system")
        ->check(CLI::IsMember({"simulated", "system"}));
    add_registry_opt(c, monitor);
    c->callback([&] { action = [&] { return run_monitor(monitor); }; });

    CoverageOpts cov;
    auto* stats = app.add_subcommand("stats", "Statistics over observation logs");
    stats->require_subcommand(1);
    c = stats->add_subcommand("coverage", "Coverage and median response time of one entity");
    c->add_option("--log", cov.log, "Observation log")->required();
    c->add_option("--entity", cov.entity, "Entity name");
    c->add_option("--horizon", cov.horizon, "Coverage horizon");
    c->add_option("--min-detections", cov.min_detections, "Scanner detections that count as coverage");
    c->add_flag("--by-fhd", cov.by_fhd, "Per-FHD breakdown");
    add_registry_opt(c, cov);
    c->callback([&] { action = [&] { return run_coverage(cov); }; });

    auto* report = app.add_subcommand("report", "Abuse reports and the removal experiment");
    report->require_subcommand(1);
    ReportAssignOpts rassign;
    c = report->add_subcommand("assign", "Split corpus URLs into reported and control arms");
    c->add_option("--corpus", rassign.corpus, "Snapshot corpus")->required();
    c->add_option("--out", rassign.out, "Assignments TSV")->required();
    c->add_option("--seed", rassign.seed, "Seed");
    c->callback([&] { action = [&] { return run_report_assign(rassign); }; });

    ReportBuildOpts rbuild;
    c = report->add_subcommand("build", "Build reports for phishing verdicts");
    c->add_option("--corpus", rbuild.corpus, "Snapshot corpus")->required();
    c->add_option("--model", rbuild.model, "Model file")->required();
    c->add_option("--assignments", rbuild.assignments, "Assignments TSV")->required();
    c->add_option("--out", rbuild.out, "Reports (JSONL)")->required();
    c->add_option("--created-at", rbuild.created_at, "Report time; defaults to each snapshot's fetch time");
    c->add_option("--config", rbuild.config, "Extractor config");
    c->add_option("--fixtures", rbuild.fixtures, "Fixture directory for link following");
    c->add_option("--scanner", rbuild.scanner, "Scanner fixture");
    add_registry_opt(c, rbuild);
    c->callback([&] { action = [&] { return run_report_build(rbuild); }; });

    ReportRenderOpts rrender;
    c = report->add_subcommand("render", "Write one message file per reported-arm report");
    c->add_option("--reports", rrender.reports, "Reports (JSONL)")->required();
    c->add_option("--out-dir", rrender.out_dir, "Output directory")->required();
    c->add_option("--screenshot-dir", rrender.screenshot_dir, "Base for relative screenshot paths");
    add_registry_opt(c, rrender);
    c->callback([&] { action = [&] { return run_report_render(rrender); }; });

    ReportCompareOpts rcompare;
    c = report->add_subcommand("compare", "Removal rates and times, reported vs control");
    c->add_option("--reports", rcompare.reports, "Reports (JSONL)")->required();
    c->add_option("--log", rcompare.log, "Observation log")->required();
    c->add_option("--responses", rcompare.responses, "Host responses (JSON group -> R|R'|NR); built-in table when omitted");
    c->add_option("--groups", rcompare.groups, "FHD grouping (JSON FHD name -> group); built-in when omitted");
    c->add_option("--horizon", rcompare.horizon, "Observation horizon");
    c->add_option("--entity", rcompare.entity, "Entity whose removal counts");
    c->add_option("--seed", rcompare.seed, "Seed for the paired sample");
    c->add_option("--paired-sample", rcompare.paired_sample, "Pairs drawn for the paired t-test");
    add_registry_opt(c, rcompare);
    c->callback([&] { action = [&] { return run_report_compare(rcompare); }; });

    ServeOpts serve;
    serve.port = std::atoi(env_or("FREEPHISH_PORT", "8080").c_str());
    c = app.add_subcommand("serve", "Run the classification service");
    c->add_option("--model", serve.model, "Model file")->envname("FREEPHISH_MODEL");
    c->add_option("--host", serve.host, "Bind address");
    c->add_option("--port", serve.port, "Port (default FREEPHISH_PORT or 8080)");
    c->add_option("--fixtures", serve.fixtures, "Fixture directory used instead of the network");
    c->add_option("--scanner", serve.scanner, "Scanner fixture");
    c->add_option("--cache-ttl", serve.cache_ttl, "Verdict cache lifetime");
    c->add_option("--timeout-ms", serve.timeout_ms, "Per-request classification timeout");
    add_registry_opt(c, serve, true);
    c->callback([&] { action = [&] { return run_serve(serve); }; });

    KeywordsOpts kw;
    c = app.add_subcommand("keywords", "Most frequent URL slug tokens");
    c->add_option("--corpus", kw.corpus, "Snapshot corpus");
    c->add_option("--feed", kw.feed, "Feed file");
    c->add_option("--top", kw.top, "How many tokens");
    add_registry_opt(c, kw);
    c->callback([&] { action = [&] { return run_keywords(kw); }; });

    if (argc > 1 && argv[1][0] != '-') {
        try {
            (void)app.get_subcommand(argv[1]);
        } catch (const CLI::OptionNotFound&) {
            std::cerr << "error: usage: unknown subcommand '" << argv[1] << "'\n" << app.help();
            return 2;
        }
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: usage: " << e.what() << "\n" << app.help();
        return 2;
    }
    try {
        status = action ? action() : 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
    return status;
}

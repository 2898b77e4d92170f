#include "freephish/classifier.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <thread>

namespace freephish {

using nlohmann::json;

std::string_view to_string(Label l) { return l == Label::phishing ? "phishing" : "benign"; }

Label label_from(std::string_view s) {
    const std::string l = to_lower(trim(s));
    if (l == "phishing") return Label::phishing;
    if (l == "benign") return Label::benign;
    throw ParseError(fmt::format("unknown label '{}'", s));
}

std::size_t LabeledDataset::count(Label l) const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [l](const LabeledRow& r) { return r.y == l; }));
}

std::map<std::string, Label> load_labels(const std::string& path) {
    std::map<std::string, Label> out;
    std::size_t line_no = 0;
    for (const auto& raw : split(read_file(path), '\n')) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line.starts_with("#")) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError(fmt::format("{}:{}: expected '<key>\\t<label>'", path, line_no));
        try {
            out[trim(line.substr(0, tab))] = label_from(line.substr(tab + 1));
        } catch (const ParseError& e) {
            throw ParseError(fmt::format("{}:{}: {}", path, line_no, e.what()));
        }
    }
    return out;
}

void save_labels(const std::string& path, const std::vector<std::pair<std::string, Label>>& labels) {
    std::string out;
    for (const auto& [k, l] : labels) out += fmt::format("{}\t{}\n", k, to_string(l));
    write_file(path, out);
}

LabeledDataset join_labels(const std::vector<FeatureRow>& rows, const std::map<std::string, Label>& labels) {
    LabeledDataset ds;
    for (const auto& r : rows) {
        auto it = labels.find(r.id);
        if (it == labels.end()) it = labels.find(r.url);
        if (it == labels.end()) throw ParseError(fmt::format("no label for {} ({})", r.id, r.url));
        ds.rows.push_back({r.id, r.vector.values(), it->second});
    }
    return ds;
}

std::pair<LabeledDataset, LabeledDataset> split_train_test(const LabeledDataset& data, double fraction,
                                                           std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw PreconditionError("split fraction must be in (0, 1)");
    std::vector<bool> in_train(data.rows.size(), false);
    Rng rng(seed);
    for (Label l : {Label::phishing, Label::benign}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < data.rows.size(); ++i)
            if (data.rows[i].y == l) idx.push_back(i);
        for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
        const auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
        for (std::size_t i = 0; i < take; ++i) in_train[idx[i]] = true;
    }
    LabeledDataset train{data.schema, {}}, test{data.schema, {}};
    for (std::size_t i = 0; i < data.rows.size(); ++i) (in_train[i] ? train : test).rows.push_back(data.rows[i]);
    return {std::move(train), std::move(test)};
}

ForestParams parse_forest_params(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(fmt::format("forest params: {}", e.what()));
    }
    if (!j.is_object()) throw ParseError("forest params must be a JSON object");
    ForestParams p;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "n_trees") p.n_trees = value.get<int>();
            else if (key == "max_depth") p.max_depth = value.get<int>();
            else if (key == "min_leaf") p.min_leaf = value.get<int>();
            else if (key == "features_per_split") p.features_per_split = value.get<int>();
            else if (key == "threshold") p.threshold = value.get<double>();
            else if (key == "seed") p.seed = value.get<std::uint64_t>();
            else if (key == "features") p.features = value.get<std::vector<std::string>>();
            else throw ParseError(fmt::format("forest params: unknown key '{}'", key));
        }
    } catch (const json::exception& e) {
        throw ParseError(fmt::format("forest params: {}", e.what()));
    }
    return p;
}

ForestParams load_forest_params(const std::string& path) { return parse_forest_params(read_file(path)); }

// ---------------------------------------------------------------------------
// Trees

Label Tree::vote(const FeatureArray& x) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf())
        i = static_cast<std::size_t>(x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right);
    return nodes[i].phishing >= nodes[i].benign ? Label::phishing : Label::benign;
}

int Tree::depth() const {
    std::vector<std::pair<int, int>> stack = {{0, 0}};
    int best = 0;
    while (!stack.empty()) {
        auto [i, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        if (!nodes[i].is_leaf()) {
            stack.emplace_back(nodes[i].left, d + 1);
            stack.emplace_back(nodes[i].right, d + 1);
        }
    }
    return best;
}

namespace {

double gini(double p, double b) {
    const double n = p + b;
    if (n <= 0) return 0.0;
    const double fp = p / n, fb = b / n;
    return 1.0 - fp * fp - fb * fb;
}

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
};

class TreeGrower {
public:
    TreeGrower(const LabeledDataset& data, const ForestParams& params, const std::vector<std::size_t>& features,
               std::size_t per_split, std::uint64_t seed)
        : data_(data), params_(params), features_(features), per_split_(per_split), rng_(seed) {}

    Tree grow() {
        const std::size_t n = data_.rows.size();
        std::vector<std::uint32_t> sample(n);
        for (auto& s : sample) s = static_cast<std::uint32_t>(rng_.below(n));

        Tree tree;
        struct Work {
            int node;
            std::vector<std::uint32_t> samples;
            int depth;
        };
        tree.nodes.emplace_back();
        std::vector<Work> stack;
        stack.push_back({0, std::move(sample), 0});
        while (!stack.empty()) {
            Work w = std::move(stack.back());
            stack.pop_back();
            double p = 0, b = 0;
            for (auto s : w.samples) (data_.rows[s].y == Label::phishing ? p : b) += 1;
            tree.nodes[w.node].phishing = p;
            tree.nodes[w.node].benign = b;
            const bool depth_capped = params_.max_depth > 0 && w.depth >= params_.max_depth;
            if (p == 0 || b == 0 || depth_capped || w.samples.size() < 2 * static_cast<std::size_t>(params_.min_leaf))
                continue;
            const auto split = choose_split(w.samples, gini(p, b));
            if (!split) continue;

            std::vector<std::uint32_t> left, right;
            for (auto s : w.samples)
                (data_.rows[s].x[split->feature] <= split->threshold ? left : right).push_back(s);
            const int li = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            tree.nodes[w.node].feature = split->feature;
            tree.nodes[w.node].threshold = split->threshold;
            tree.nodes[w.node].left = li;
            tree.nodes[w.node].right = li + 1;
            stack.push_back({li + 1, std::move(right), w.depth + 1});
            stack.push_back({li, std::move(left), w.depth + 1});
        }
        return tree;
    }

private:
    std::optional<SplitChoice> choose_split(const std::vector<std::uint32_t>& samples, double parent) {
        // Random feature order; the first per_split are the candidates. Further
        // features are only consulted when none of those can split the node.
        std::vector<std::size_t> order = features_;
        for (std::size_t i = 0; i < order.size(); ++i)
            std::swap(order[i], order[i + rng_.below(order.size() - i)]);
        std::optional<SplitChoice> best;
        for (std::size_t k = 0; k < order.size(); ++k) {
            if (k >= per_split_ && best) break;
            if (auto s = best_threshold(samples, static_cast<int>(order[k]));
                s && s->impurity < parent - 1e-12 && (!best || s->impurity < best->impurity))
                best = s;
        }
        return best;
    }

    std::optional<SplitChoice> best_threshold(const std::vector<std::uint32_t>& samples, int f) const {
        std::vector<std::pair<double, bool>> xs;
        xs.reserve(samples.size());
        double total_p = 0;
        for (auto s : samples) {
            const bool phish = data_.rows[s].y == Label::phishing;
            xs.emplace_back(data_.rows[s].x[f], phish);
            total_p += phish;
        }
        std::sort(xs.begin(), xs.end());
        const double n = static_cast<double>(xs.size());
        const double total_b = n - total_p;
        const auto min_leaf = static_cast<std::size_t>(params_.min_leaf);
        double lp = 0, lb = 0;
        std::optional<SplitChoice> best;
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
            (xs[i].second ? lp : lb) += 1;
            if (xs[i].first == xs[i + 1].first) continue;
            const std::size_t nl = i + 1, nr = xs.size() - nl;
            if (nl < min_leaf || nr < min_leaf) continue;
            const double rp = total_p - lp, rb = total_b - lb;
            const double imp = (static_cast<double>(nl) * gini(lp, lb) + static_cast<double>(nr) * gini(rp, rb)) / n;
            if (!best || imp < best->impurity) best = SplitChoice{f, (xs[i].first + xs[i + 1].first) / 2.0, imp};
        }
        return best;
    }

    const LabeledDataset& data_;
    const ForestParams& params_;
    const std::vector<std::size_t>& features_;
    std::size_t per_split_;
    Rng rng_;
};

std::vector<std::size_t> resolve_features(const ForestParams& p) {
    std::vector<std::size_t> out;
    if (p.features.empty()) {
        for (std::size_t i = 0; i < kFeatureCount; ++i) out.push_back(i);
        return out;
    }
    std::set<std::size_t> seen;
    for (const auto& name : p.features)
        if (seen.insert(feature_index(name)).second) out.push_back(feature_index(name));
    std::sort(out.begin(), out.end());
    return out;
}

json forest_body_json(const Forest& f) {
    json params = {
        {"n_trees", f.params.n_trees},
        {"max_depth", f.params.max_depth},
        {"min_leaf", f.params.min_leaf},
        {"features_per_split", f.params.features_per_split},
        {"threshold", f.params.threshold},
        {"seed", f.params.seed},
        {"features", f.params.features},
    };
    json trees = json::array();
    for (const auto& t : f.trees) {
        json nodes = json::array();
        for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.benign, n.phishing});
        trees.push_back(std::move(nodes));
    }
    std::vector<std::string> names;
    for (auto i : f.feature_indices) names.emplace_back(feature_names()[i]);
    return {
        {"format", "freephish-forest/1"},
        {"schema", f.schema},
        {"params", params},
        {"features", names},
        {"training", {{"rows", f.training.rows}, {"phishing", f.training.phishing}, {"benign", f.training.benign}}},
        {"trees", trees},
    };
}

std::string compute_model_version(const Forest& f) {
    return "rf-" + sha256_hex(forest_body_json(f).dump()).substr(0, 12);
}

}  // namespace

Forest train_forest(const LabeledDataset& train, const ForestParams& params, unsigned threads) {
    if (train.schema != kFeatureSchema)
        throw SchemaMismatchError(fmt::format("dataset schema '{}' != '{}'", train.schema, kFeatureSchema));
    if (train.rows.empty()) throw PreconditionError("training set is empty");
    if (train.count(Label::phishing) == 0 || train.count(Label::benign) == 0)
        throw SingleClassError("training set needs both phishing and benign rows");
    if (params.n_trees <= 0) throw PreconditionError("n_trees must be positive");
    if (params.max_depth < 0) throw PreconditionError("max_depth must be >= 0");
    if (params.min_leaf <= 0) throw PreconditionError("min_leaf must be positive");
    if (params.features_per_split < 0) throw PreconditionError("features_per_split must be >= 0");
    if (!(params.threshold > 0.0 && params.threshold <= 1.0)) throw PreconditionError("threshold must be in (0, 1]");

    Forest forest;
    forest.params = params;
    forest.feature_indices = resolve_features(params);
    const std::size_t d = forest.feature_indices.size();
    std::size_t per_split = params.features_per_split > 0 ? static_cast<std::size_t>(params.features_per_split)
                                                          : static_cast<std::size_t>(std::ceil(std::sqrt(double(d))));
    per_split = std::min(per_split, d);

    forest.trees.resize(static_cast<std::size_t>(params.n_trees));
    auto grow = [&](std::size_t i) {
        TreeGrower g(train, params, forest.feature_indices, per_split, mix_seed(params.seed, i));
        forest.trees[i] = g.grow();
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    if (threads <= 1) {
        for (std::size_t i = 0; i < forest.trees.size(); ++i) grow(i);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < forest.trees.size(); i += threads) grow(i);
            });
        for (auto& t : pool) t.join();
    }
    forest.training = {train.rows.size(), train.count(Label::phishing), train.count(Label::benign)};
    forest.model_version = compute_model_version(forest);
    return forest;
}

Verdict predict(const Forest& forest, const FeatureArray& x, std::string_view schema) {
    if (schema != forest.schema)
        throw SchemaMismatchError(fmt::format("feature schema '{}' does not match model schema '{}'", schema,
                                              forest.schema));
    if (forest.trees.empty()) throw PreconditionError("forest has no trees");
    std::size_t votes = 0;
    for (const auto& t : forest.trees) votes += t.vote(x) == Label::phishing;
    Verdict v;
    v.score = static_cast<double>(votes) / static_cast<double>(forest.trees.size());
    v.label = v.score >= forest.params.threshold ? Label::phishing : Label::benign;
    v.model_version = forest.model_version;
    v.features = x;
    return v;
}

Verdict predict(const Forest& forest, const FeatureVector& fv, std::string_view schema) {
    return predict(forest, fv.values(), schema);
}

// ---------------------------------------------------------------------------
// Metrics

namespace {

double ratio(double a, double b) { return b == 0 ? 0.0 : a / b; }

ClassMetrics class_metrics(double tp, double fp, double fn) {
    ClassMetrics c;
    c.precision = ratio(tp, tp + fp);
    c.recall = ratio(tp, tp + fn);
    c.f1 = ratio(2 * c.precision * c.recall, c.precision + c.recall);
    c.support = static_cast<std::size_t>(tp + fn);
    return c;
}

}  // namespace

Metrics metrics_from_confusion(const ConfusionMatrix& cm) {
    Metrics m;
    m.confusion = cm;
    const double tp = double(cm.tp), fp = double(cm.fp), fn = double(cm.fn), tn = double(cm.tn);
    m.phishing = class_metrics(tp, fp, fn);
    m.benign = class_metrics(tn, fn, fp);
    m.accuracy = ratio(tp + tn, tp + tn + fp + fn);
    return m;
}

double roc_auc(const std::vector<double>& scores, const std::vector<Label>& labels) {
    if (scores.size() != labels.size()) throw PreconditionError("scores and labels differ in length");
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> rank(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
        i = j + 1;
    }
    double pos = 0, rank_sum = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (labels[i] == Label::phishing) {
            pos += 1;
            rank_sum += rank[i];
        }
    const double neg = static_cast<double>(n) - pos;
    if (pos == 0 || neg == 0) throw PreconditionError("AUC needs both classes");
    return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg);
}

Metrics evaluate(const Forest& forest, const LabeledDataset& test) {
    if (test.rows.empty()) throw PreconditionError("test set is empty");
    ConfusionMatrix cm;
    std::vector<double> scores;
    std::vector<Label> labels;
    for (const auto& r : test.rows) {
        const Verdict v = predict(forest, r.x, test.schema);
        scores.push_back(v.score);
        labels.push_back(r.y);
        if (r.y == Label::phishing) (v.label == Label::phishing ? cm.tp : cm.fn)++;
        else (v.label == Label::phishing ? cm.fp : cm.tn)++;
    }
    Metrics m = metrics_from_confusion(cm);
    if (test.count(Label::phishing) > 0 && test.count(Label::benign) > 0) m.roc_auc = roc_auc(scores, labels);
    return m;
}

std::string format_metrics(const Metrics& m) {
    std::string out;
    out += fmt::format("accuracy\t{:.4f}\n", m.accuracy);
    out += fmt::format("roc_auc\t{}\n", m.roc_auc ? fmt::format("{:.4f}", *m.roc_auc) : std::string("n/a"));
    out += "class\tprecision\trecall\tf1\tsupport\n";
    for (auto [name, c] : {std::pair{"phishing", m.phishing}, std::pair{"benign", m.benign}})
        out += fmt::format("{}\t{:.4f}\t{:.4f}\t{:.4f}\t{}\n", name, c.precision, c.recall, c.f1, c.support);
    out += fmt::format("confusion\ttp={}\tfp={}\tfn={}\ttn={}\n", m.confusion.tp, m.confusion.fp, m.confusion.fn,
                       m.confusion.tn);
    return out;
}

// ---------------------------------------------------------------------------
// Persistence

std::string forest_to_json(const Forest& forest) {
    json j = forest_body_json(forest);
    j["model_version"] = forest.model_version;
    return j.dump() + "\n";
}

Forest forest_from_json(std::string_view text) {
    Forest f;
    try {
        const json j = json::parse(text);
        if (j.at("format").get<std::string>() != "freephish-forest/1")
            throw ParseError(fmt::format("unsupported model format '{}'", j.at("format").get<std::string>()));
        f.schema = j.at("schema").get<std::string>();
        f.params = parse_forest_params(j.at("params").dump());
        for (const auto& name : j.at("features")) f.feature_indices.push_back(feature_index(name.get<std::string>()));
        const auto& t = j.at("training");
        f.training = {t.at("rows").get<std::size_t>(), t.at("phishing").get<std::size_t>(),
                      t.at("benign").get<std::size_t>()};
        for (const auto& tree : j.at("trees")) {
            Tree tr;
            for (const auto& n : tree)
                tr.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                                    n.at(4).get<double>(), n.at(5).get<double>()});
            const int size = static_cast<int>(tr.nodes.size());
            if (size == 0) throw ParseError("empty tree");
            for (const auto& n : tr.nodes) {
                if (n.is_leaf()) {
                    if (n.benign < 0 || n.phishing < 0 || n.benign + n.phishing <= 0)
                        throw ParseError("leaf without counts");
                } else if (n.feature >= static_cast<int>(kFeatureCount) || n.left <= 0 || n.right <= 0 ||
                           n.left >= size || n.right >= size) {
                    throw ParseError("node refers outside the tree or schema");
                }
            }
            f.trees.push_back(std::move(tr));
        }
        f.model_version = j.at("model_version").get<std::string>();
    } catch (const json::exception& e) {
        throw ParseError(fmt::format("model file: {}", e.what()));
    }
    if (compute_model_version(f) != f.model_version)
        throw ParseError("model file: model_version does not match its contents");
    return f;
}

void save_forest(const std::string& path, const Forest& forest) { write_file(path, forest_to_json(forest)); }

Forest load_forest(const std::string& path) { return forest_from_json(read_file(path)); }

// ---------------------------------------------------------------------------
// Synthetic data

LabeledDataset generate_synthetic(std::size_t n, std::uint64_t seed, double phishing_fraction) {
    if (!(phishing_fraction > 0.0 && phishing_fraction < 1.0))
        throw PreconditionError("phishing_fraction must be in (0, 1)");
    // Bernoulli rates for the eight binary features: {phishing, benign}
    static constexpr double kRates[8][2] = {
        {1.00, 1.00},  // is_fhd_hosted
        {0.80, 0.12},  // has_credential_fields
        {0.30, 0.02},  // banner_obfuscated
        {0.35, 0.05},  // noindex_present
        {0.75, 0.06},  // target_identified
        {0.60, 0.01},  // links_external_phish (phishing rate applies to rows without credential fields)
        {0.05, 0.005}, // malicious_download
        {0.65, 0.12},  // url_keyword_hit
    };
    const auto n_phish = static_cast<std::size_t>(std::llround(phishing_fraction * static_cast<double>(n)));
    Rng rng(seed);
    LabeledDataset ds;
    for (std::size_t i = 0; i < n; ++i) {
        const bool phish = i < n_phish;
        const int c = phish ? 0 : 1;
        LabeledRow r;
        r.id = fmt::format("syn-{:05}", i);
        r.y = phish ? Label::phishing : Label::benign;
        for (std::size_t k = 0; k < 8; ++k) {
            double rate = kRates[k][c];
            if (k == 5 && phish && r.x[1] == 1.0) rate = 0.0;
            r.x[k] = rng.uniform() < rate ? 1.0 : 0.0;
        }
        r.x[8] = phish ? 0.2 + 0.8 * rng.uniform() : 0.4 * rng.uniform();
        r.x[9] = phish ? 0.1 + 0.8 * rng.uniform() : 0.3 * rng.uniform();
        ds.rows.push_back(std::move(r));
    }
    for (std::size_t i = ds.rows.size(); i > 1; --i) std::swap(ds.rows[i - 1], ds.rows[rng.below(i)]);
    return ds;
}

}  // namespace freephish

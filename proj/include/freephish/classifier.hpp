#pragma once

#include "freephish/features.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace freephish {

enum class Label { benign, phishing };

std::string_view to_string(Label l);
Label label_from(std::string_view s);

class SchemaMismatchError : public Error {
public:
    explicit SchemaMismatchError(const std::string& message) : Error("schema", message) {}
};

class SingleClassError : public Error {
public:
    explicit SingleClassError(const std::string& message) : Error("single_class", message) {}
};

using FeatureArray = std::array<double, kFeatureCount>;

struct LabeledRow {
    std::string id;
    FeatureArray x{};
    Label y = Label::benign;
};

struct LabeledDataset {
    std::string schema{kFeatureSchema};
    std::vector<LabeledRow> rows;

    std::size_t count(Label l) const;
};

/// Labels file: "<id or url>\t<phishing|benign>" per line, '#' comments.
std::map<std::string, Label> load_labels(const std::string& path);
void save_labels(const std::string& path, const std::vector<std::pair<std::string, Label>>& labels);

/// Joins feature rows with labels by snapshot id, falling back to url.
/// Rows without a label are an error.
LabeledDataset join_labels(const std::vector<FeatureRow>& rows, const std::map<std::string, Label>& labels);

/// Stratified split: per class, round(fraction * n) rows go to train.
std::pair<LabeledDataset, LabeledDataset> split_train_test(const LabeledDataset& data, double fraction,
                                                           std::uint64_t seed);

struct ForestParams {
    int n_trees = 100;
    int max_depth = 0;           // 0 = unbounded
    int min_leaf = 1;
    int features_per_split = 0;  // 0 = ceil(sqrt(d))
    double threshold = 0.5;
    std::uint64_t seed = 1;
    std::vector<std::string> features;  // empty = all ten

    friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

ForestParams load_forest_params(const std::string& path);
ForestParams parse_forest_params(std::string_view json_text);

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // x[feature] <= threshold goes left
    int left = -1;
    int right = -1;
    double benign = 0.0;  // bootstrap counts reaching the node
    double phishing = 0.0;

    bool is_leaf() const { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Tree {
    std::vector<TreeNode> nodes;  // root at 0

    /// Leaf majority, ties to phishing.
    Label vote(const FeatureArray& x) const;
    int depth() const;
    friend bool operator==(const Tree&, const Tree&) = default;
};

struct TrainingInfo {
    std::size_t rows = 0;
    std::size_t phishing = 0;
    std::size_t benign = 0;

    friend bool operator==(const TrainingInfo&, const TrainingInfo&) = default;
};

struct Forest {
    std::string schema{kFeatureSchema};
    ForestParams params;
    std::vector<std::size_t> feature_indices;
    std::vector<Tree> trees;
    TrainingInfo training;
    std::string model_version;

    friend bool operator==(const Forest&, const Forest&) = default;
};

/// Grows params.n_trees trees. Tree i draws all of its randomness from
/// mix_seed(seed, i), so the result is the same for any `threads`.
Forest train_forest(const LabeledDataset& train, const ForestParams& params, unsigned threads = 1);

struct Verdict {
    Label label = Label::benign;
    double score = 0.0;  // fraction of trees voting phishing
    std::string model_version;
    FeatureArray features{};
};

Verdict predict(const Forest& forest, const FeatureArray& x, std::string_view schema = kFeatureSchema);
Verdict predict(const Forest& forest, const FeatureVector& v, std::string_view schema = kFeatureSchema);

struct ConfusionMatrix {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;  // phishing is the positive class

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct Metrics {
    ConfusionMatrix confusion;
    ClassMetrics phishing;
    ClassMetrics benign;
    double accuracy = 0.0;
    std::optional<double> roc_auc;  // absent when the test set has one class
};

/// Precision/recall/F1 per class and accuracy from a confusion matrix.
/// Zero denominators give 0.
Metrics metrics_from_confusion(const ConfusionMatrix& cm);

/// Rank-based AUC with average ranks for tied scores.
double roc_auc(const std::vector<double>& scores, const std::vector<Label>& labels);

Metrics evaluate(const Forest& forest, const LabeledDataset& test);

std::string format_metrics(const Metrics& m);

std::string forest_to_json(const Forest& forest);
Forest forest_from_json(std::string_view text);
void save_forest(const std::string& path, const Forest& forest);
Forest load_forest(const std::string& path);

/// Synthetic FHD corpus: binary features are Bernoulli draws with class
/// dependent rates, ratios are uniform on class dependent ranges (see
/// docs/FORMAT.md for the table). Rows are shuffled.
LabeledDataset generate_synthetic(std::size_t n, std::uint64_t seed, double phishing_fraction = 0.5);

}  // namespace freephish

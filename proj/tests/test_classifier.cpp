#include "support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace fptest;

namespace {

Forest leaf_forest(int phishing_trees, int total) {
    Forest f;
    for (int i = 0; i < total; ++i) {
        Tree t;
        TreeNode leaf;
        (i < phishing_trees ? leaf.phishing : leaf.benign) = 1.0;
        t.nodes.push_back(leaf);
        f.trees.push_back(t);
    }
    f.model_version = "rf-handbuilt";
    return f;
}

double accuracy_on(const Forest& f, const LabeledDataset& d) {
    std::size_t ok = 0;
    for (const auto& r : d.rows) ok += predict(f, r.x).label == r.y;
    return static_cast<double>(ok) / static_cast<double>(d.rows.size());
}

}  // namespace

TEST(Metrics, HandBuiltConfusionMatrices) {
    for (const auto& c : confusion_cases()) {
        const Metrics m = metrics_from_confusion(c.cm);
        EXPECT_NEAR(m.accuracy, c.accuracy, 1e-12);
        EXPECT_NEAR(m.phishing.precision, c.phishing_precision, 1e-12);
        EXPECT_NEAR(m.phishing.recall, c.phishing_recall, 1e-12);
        EXPECT_NEAR(m.phishing.f1, c.phishing_f1, 1e-12);
        EXPECT_NEAR(m.benign.precision, c.benign_precision, 1e-12);
        EXPECT_NEAR(m.benign.recall, c.benign_recall, 1e-12);
        EXPECT_NEAR(m.benign.f1, c.benign_f1, 1e-12);
        EXPECT_EQ(m.phishing.support, c.cm.tp + c.cm.fn);
        EXPECT_EQ(m.benign.support, c.cm.tn + c.cm.fp);
    }
}

TEST(Metrics, AucAgainstPairCount) {
    const auto fx = auc_fixture();
    ASSERT_EQ(fx.scores.size(), 12u);
    EXPECT_NEAR(roc_auc(fx.scores, fx.labels), auc_pair_count(fx.scores, fx.labels), 1e-12);
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> s;
        std::vector<Label> l;
        for (int i = 0; i < 30; ++i) {
            s.push_back(static_cast<double>(rng.below(6)) / 5.0);
            l.push_back(i % 3 ? Label::benign : Label::phishing);
        }
        EXPECT_NEAR(roc_auc(s, l), auc_pair_count(s, l), 1e-12);
    }
}

TEST(Metrics, AucExtremes) {
    const std::vector<Label> l{Label::phishing, Label::phishing, Label::benign, Label::benign};
    EXPECT_EQ(roc_auc({0.9, 0.8, 0.2, 0.1}, l), 1.0);
    EXPECT_EQ(roc_auc({0.1, 0.2, 0.8, 0.9}, l), 0.0);
    EXPECT_EQ(roc_auc({0.5, 0.5, 0.5, 0.5}, l), 0.5);
}

TEST(Metrics, EvaluateIsPermutationInvariant) {
    const auto data = generate_synthetic(400, 3);
    auto [train, test] = split_train_test(data, 0.7, 3);
    ForestParams p;
    p.n_trees = 25;
    const Forest f = train_forest(train, p);
    const Metrics a = evaluate(f, test);
    Rng rng(1);
    for (std::size_t i = test.rows.size(); i > 1; --i) std::swap(test.rows[i - 1], test.rows[rng.below(i)]);
    const Metrics b = evaluate(f, test);
    EXPECT_EQ(a.confusion, b.confusion);
    EXPECT_EQ(a.roc_auc, b.roc_auc);
    const auto& cm = a.confusion;
    EXPECT_DOUBLE_EQ(a.accuracy, static_cast<double>(cm.tp + cm.tn) / static_cast<double>(test.rows.size()));
}

TEST(Metrics, SingleClassTestHasNoAuc) {
    LabeledDataset test;
    test.rows.push_back({"a", {}, Label::benign});
    const Metrics m = evaluate(leaf_forest(0, 3), test);
    EXPECT_FALSE(m.roc_auc);
    EXPECT_EQ(m.confusion.tn, 1u);
}

TEST(Split, StratifiedSeventyThirty) {
    const auto data = separable_dataset(100, 1);
    const auto [train, test] = split_train_test(data, 0.7, 42);
    EXPECT_EQ(train.rows.size(), 70u);
    EXPECT_EQ(test.rows.size(), 30u);
    EXPECT_EQ(train.count(Label::phishing), 35u);
    EXPECT_EQ(train.count(Label::benign), 35u);
    EXPECT_EQ(test.count(Label::phishing), 15u);
    std::set<std::string> ids;
    for (const auto& r : train.rows) ids.insert(r.id);
    for (const auto& r : test.rows) EXPECT_TRUE(ids.insert(r.id).second) << "overlap " << r.id;
    EXPECT_EQ(ids.size(), 100u);
    const auto again = split_train_test(data, 0.7, 42);
    for (std::size_t i = 0; i < train.rows.size(); ++i) EXPECT_EQ(again.first.rows[i].id, train.rows[i].id);
    EXPECT_THROW(split_train_test(data, 0.0, 1), PreconditionError);
    EXPECT_THROW(split_train_test(data, 1.0, 1), PreconditionError);
}

TEST(Train, SeparableDataIsLearnedPerfectly) {
    const auto data = separable_dataset(200, 7);
    ForestParams p;
    p.n_trees = 30;
    const Forest f = train_forest(data, p);
    EXPECT_EQ(accuracy_on(f, data), 1.0);
    for (const auto& t : f.trees) {
        Forest single = f;
        single.trees = {t};
        EXPECT_GE(accuracy_on(f, data), accuracy_on(single, data));
    }
}

TEST(Train, BitIdenticalSerialAndParallel) {
    const auto data = generate_synthetic(500, 11);
    ForestParams p;
    p.n_trees = 40;
    p.seed = 99;
    const Forest a = train_forest(data, p, 1);
    const Forest b = train_forest(data, p, 1);
    const Forest c = train_forest(data, p, 4);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, c);
    EXPECT_EQ(forest_to_json(a), forest_to_json(c));
    p.seed = 100;
    EXPECT_NE(train_forest(data, p).model_version, a.model_version);
}

TEST(Train, SyntheticCorpusHeldOutAccuracy) {
    const auto data = generate_synthetic(2000, 2022);
    EXPECT_EQ(data.count(Label::phishing), 1000u);
    const auto [train, test] = split_train_test(data, 0.7, 5);
    const Forest f = train_forest(train, ForestParams{}, 0);
    const Metrics m = evaluate(f, test);
    EXPECT_GE(m.accuracy, 0.95) << format_metrics(m);
    ASSERT_TRUE(m.roc_auc);
    EXPECT_GT(*m.roc_auc, 0.95);
}

TEST(Train, Preconditions) {
    LabeledDataset one;
    one.rows.push_back({"a", {}, Label::benign});
    one.rows.push_back({"b", {}, Label::benign});
    EXPECT_THROW(train_forest(one, {}), SingleClassError);
    auto data = separable_dataset(20, 1);
    data.schema = "freephish-features/0";
    EXPECT_THROW(train_forest(data, {}), SchemaMismatchError);
    ForestParams bad;
    bad.n_trees = 0;
    EXPECT_THROW(train_forest(separable_dataset(20, 1), bad), PreconditionError);
}

TEST(Train, FeatureSubsetAndDepthLimit) {
    const auto data = generate_synthetic(300, 8);
    ForestParams p;
    p.n_trees = 10;
    p.max_depth = 2;
    p.features = {"has_credential_fields", "target_identified", "external_link_ratio"};
    const Forest f = train_forest(data, p);
    EXPECT_EQ(f.feature_indices, (std::vector<std::size_t>{1, 4, 8}));
    for (const auto& t : f.trees) {
        EXPECT_LE(t.depth(), 2);
        for (const auto& n : t.nodes) {
            if (n.is_leaf()) {
                EXPECT_GT(n.benign + n.phishing, 0.0);
                continue;
            }
            EXPECT_TRUE(n.feature == 1 || n.feature == 4 || n.feature == 8) << n.feature;
        }
    }
}

TEST(Predict, VoteFractionsAndTieRule) {
    const Forest all = leaf_forest(10, 10);
    const auto v = predict(all, FeatureArray{});
    EXPECT_EQ(v.score, 1.0);
    EXPECT_EQ(v.label, Label::phishing);
    const auto half = predict(leaf_forest(5, 10), FeatureArray{});
    EXPECT_EQ(half.score, 0.5);
    EXPECT_EQ(half.label, Label::phishing);
    const auto four = predict(leaf_forest(4, 10), FeatureArray{});
    EXPECT_EQ(four.label, Label::benign);
    EXPECT_THROW(predict(all, FeatureArray{}, "freephish-features/2"), SchemaMismatchError);
}

TEST(Predict, LeafTieVotesPhishing) {
    Tree t;
    TreeNode leaf;
    leaf.benign = 2;
    leaf.phishing = 2;
    t.nodes.push_back(leaf);
    EXPECT_EQ(t.vote(FeatureArray{}), Label::phishing);
}

TEST(ModelFile, RoundTripPredictsIdentically) {
    const auto data = generate_synthetic(300, 21);
    ForestParams p;
    p.n_trees = 15;
    const Forest f = train_forest(data, p);
    EXPECT_EQ(f.model_version.rfind("rf-", 0), 0u);
    EXPECT_EQ(f.model_version.size(), 15u);
    const std::string dir = temp_dir("model");
    save_forest(dir + "/m.json", f);
    const Forest g = load_forest(dir + "/m.json");
    EXPECT_EQ(f, g);
    for (const auto& r : data.rows) EXPECT_EQ(predict(f, r.x).score, predict(g, r.x).score);
    EXPECT_THROW(forest_from_json(R"({"schema": "nope"})"), Error);
}

TEST(Params, ParseAndReject) {
    const auto p = parse_forest_params(R"({"n_trees": 7, "max_depth": 3, "seed": 5})");
    EXPECT_EQ(p.n_trees, 7);
    EXPECT_EQ(p.max_depth, 3);
    EXPECT_EQ(p.seed, 5u);
    EXPECT_EQ(p.min_leaf, 1);
    EXPECT_THROW(parse_forest_params(R"({"n_tress": 7})"), ParseError);
}

TEST(Labels, JoinByIdThenUrl) {
    const std::vector<FeatureRow> rows = {{"id1", "http://a.weebly.com/", {}}, {"id2", "http://b.weebly.com/", {}}};
    const auto d = join_labels(rows, {{"id1", Label::phishing}, {"http://b.weebly.com/", Label::benign}});
    ASSERT_EQ(d.rows.size(), 2u);
    EXPECT_EQ(d.rows[0].y, Label::phishing);
    EXPECT_EQ(d.rows[1].y, Label::benign);
    EXPECT_THROW(join_labels(rows, {{"id1", Label::phishing}}), Error);
    const std::string dir = temp_dir("labels");
    save_labels(dir + "/l.tsv", {{"id1", Label::phishing}, {"id2", Label::benign}});
    const auto back = load_labels(dir + "/l.tsv");
    EXPECT_EQ(back.at("id1"), Label::phishing);
    EXPECT_EQ(back.at("id2"), Label::benign);
}

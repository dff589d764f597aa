#include <cmath>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "humbench/classical.hpp"
#include "humbench/error.hpp"

using namespace humbench;
using namespace humbench::classical;

namespace {

SparseMatrix random_matrix(std::mt19937_64& gen, std::size_t rows, std::size_t cols) {
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    SparseMatrix x(rows);
    for (auto& row : x) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (gen() % 3 == 0) row.entries.emplace_back(c, val(gen));
        }
    }
    return x;
}

std::vector<LabeledText> toy_corpus(std::size_t n, std::uint64_t seed) {
    const std::vector<std::vector<std::string>> vocab{
        {"maybe", "perhaps", "unsure", "wonder", "open"},
        {"obviously", "idiot", "stupid", "always", "never"},
        {"weather", "lunch", "today", "train", "movie"}};
    const std::vector<std::string> names{"IH", "IA", "Neutral"};
    const std::vector<std::string> filler{"the", "and", "this", "that", "is", "it"};
    std::mt19937_64 gen(seed);
    std::vector<LabeledText> out;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t cls = i % 3;
        std::string text;
        for (int w = 0; w < 8; ++w) {
            const bool signal = gen() % 10 < 6;
            const auto& pool = signal ? vocab[cls] : (gen() % 2 ? filler : vocab[gen() % 3]);
            text += pool[gen() % pool.size()] + " ";
        }
        out.push_back({text, names[cls]});
    }
    return out;
}

}  // namespace

TEST(Tokenize, LowercaseAlnumRunsOfTwoOrMore) {
    EXPECT_EQ(tokenize("Don't PANIC: it's 42 a-ok!"),
              (std::vector<std::string>{"don", "panic", "it", "42", "ok"}));
    EXPECT_TRUE(tokenize("a b c ! ?").empty());
}

TEST(Features, BowCountsAndMinDf) {
    const std::vector<std::string> docs{"apple banana apple", "banana cherry", "banana apple", "durian"};
    auto fm = fit_features(docs, FeatureMode::BoW);
    EXPECT_EQ(fm.tokens, (std::vector<std::string>{"apple", "banana"}));
    const auto v = transform(fm, "apple apple apple banana unknown");
    ASSERT_EQ(v.entries.size(), 2u);
    EXPECT_DOUBLE_EQ(v.entries[0].second, 3.0);
    EXPECT_DOUBLE_EQ(v.entries[1].second, 1.0);
    EXPECT_THROW(fit_features(std::vector<std::string>{"a1 b1", "c1 d1"}, FeatureMode::BoW), ValidationError);
}

TEST(Features, TfIdfIsSmoothedAndL2Normalized) {
    const std::vector<std::string> docs{"apple banana", "banana cherry", "apple banana cherry"};
    auto fm = fit_features(docs, FeatureMode::TfIdf);
    ASSERT_EQ(fm.size(), 3u);
    const double n = 3.0;
    EXPECT_NEAR(fm.idf[fm.vocabulary.at("banana")], std::log((1 + n) / (1 + 3)) + 1, 1e-12);
    EXPECT_NEAR(fm.idf[fm.vocabulary.at("apple")], std::log((1 + n) / (1 + 2)) + 1, 1e-12);
    const auto v = transform(fm, "apple apple banana");
    EXPECT_NEAR(v.norm(), 1.0, 1e-12);
    const double a = 2 * fm.idf[fm.vocabulary.at("apple")], b = fm.idf[fm.vocabulary.at("banana")];
    EXPECT_NEAR(v.entries[0].second, a / std::hypot(a, b), 1e-12);
}

// Analytic gradient against central finite differences on random problems.
TEST(LogReg, GradientMatchesFiniteDifferences) {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        std::mt19937_64 gen(seed);
        const std::size_t rows = 12, cols = 6, k = 3;
        const auto x = random_matrix(gen, rows, cols);
        std::vector<int> y(rows);
        for (auto& v : y) v = static_cast<int>(gen() % k);
        std::normal_distribution<double> nd(0.0, 0.5);
        std::vector<double> w(k * (cols + 1));
        for (auto& v : w) v = nd(gen);
        const double lambda = 0.3 + static_cast<double>(seed % 4);
        std::vector<double> grad;
        loss_and_gradient(x, y, k, cols, w, lambda, &grad);
        ASSERT_EQ(grad.size(), w.size());
        const double h = 1e-6;
        for (std::size_t i = 0; i < w.size(); ++i) {
            auto wp = w, wm = w;
            wp[i] += h;
            wm[i] -= h;
            const double fd = (loss_and_gradient(x, y, k, cols, wp, lambda, nullptr) -
                               loss_and_gradient(x, y, k, cols, wm, lambda, nullptr)) /
                              (2 * h);
            EXPECT_NEAR(grad[i], fd, 1e-5) << "seed " << seed << " weight " << i;
        }
    }
}

TEST(LogReg, BiasIsNotRegularized) {
    SparseMatrix x(2);
    std::vector<int> y{0, 1};
    std::vector<double> w{0, 5, 0, -5};  // one feature + bias per class
    const double l0 = loss_and_gradient(x, y, 2, 1, w, 0.0, nullptr);
    const double l1 = loss_and_gradient(x, y, 2, 1, w, 10.0, nullptr);
    EXPECT_DOUBLE_EQ(l0, l1);
}

TEST(LogReg, TrainingDecreasesLossAndSeparatesToyData) {
    const auto data = toy_corpus(90, 4);
    std::vector<std::string> texts;
    std::vector<int> y;
    const std::vector<std::string> names{"IA", "IH", "Neutral"};
    for (const auto& d : data) {
        texts.push_back(d.text);
        y.push_back(static_cast<int>(std::find(names.begin(), names.end(), d.label) - names.begin()));
    }
    auto fm = fit_features(texts, FeatureMode::TfIdf);
    const auto x = transform(fm, texts);
    const std::vector<double> zero((fm.size() + 1) * 3, 0.0);
    const double initial = loss_and_gradient(x, y, 3, fm.size(), zero, 1.0, nullptr);
    auto model = train_logreg(x, y, fm.size(), names);
    EXPECT_LT(model.final_loss, initial);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < x.size(); ++i) correct += predict(model, x[i]) == static_cast<std::size_t>(y[i]);
    EXPECT_GT(correct, 75u);
    const auto p = predict_proba(model, x[0]);
    EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-12);

    const auto top = top_features(model, fm, "IA", 3);
    ASSERT_EQ(top.positive.size(), 3u);
    for (const auto& t : top.positive)
        EXPECT_NE(std::string("obviously idiot stupid always never").find(t), std::string::npos) << t;
    EXPECT_THROW(top_features(model, fm, "XX"), ValidationError);
}

TEST(LogReg, NeedsTwoClasses) {
    SparseMatrix x(3);
    std::vector<int> y{0, 0, 0};
    EXPECT_THROW(train_logreg(x, y, 1, {"a", "b"}), ValidationError);
}

TEST(Folds, StratifiedBalancedAndSeeded) {
    std::vector<std::string> labels;
    for (int i = 0; i < 134; ++i) labels.push_back("IH");
    for (int i = 0; i < 60; ++i) labels.push_back("IA");
    for (int i = 0; i < 156; ++i) labels.push_back("Neutral");
    const auto folds = stratified_folds(labels, 5, 7);
    std::map<std::string, std::array<int, 5>> per;
    std::array<int, 5> sizes{};
    for (std::size_t i = 0; i < labels.size(); ++i) {
        ++per[labels[i]][folds[i]];
        ++sizes[folds[i]];
    }
    for (const auto& [cls, counts] : per) {
        const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
        EXPECT_LE(*hi - *lo, 1) << cls;
    }
    for (int s : sizes) EXPECT_EQ(s, 70);
    EXPECT_EQ(stratified_folds(labels, 5, 7), folds);
    EXPECT_NE(stratified_folds(labels, 5, 8), folds);
}

TEST(CrossValidate, DeterministicAndAboveChanceOnSignal) {
    const auto data = toy_corpus(150, 9);
    const auto a = cross_validate(data, FeatureMode::TfIdf, 5, 3);
    const auto b = cross_validate(data, FeatureMode::TfIdf, 5, 3);
    ASSERT_EQ(a.folds.size(), 5u);
    EXPECT_EQ(a.folds, b.folds);
    EXPECT_GT(a.mean, 0.6);
    const auto bow = cross_validate(data, FeatureMode::BoW, 5, 3);
    EXPECT_GT(bow.mean, 0.6);
}

TEST(Model, SaveLoadRoundTrip) {
    const auto data = toy_corpus(60, 2);
    std::vector<std::string> texts;
    std::vector<int> y;
    for (const auto& d : data) {
        texts.push_back(d.text);
        y.push_back(d.label == "IA" ? 0 : d.label == "IH" ? 1 : 2);
    }
    auto fm = fit_features(texts, FeatureMode::TfIdf);
    auto model = train_logreg(transform(fm, texts), y, fm.size(), {"IA", "IH", "Neutral"});
    const auto path = std::filesystem::temp_directory_path() / "humbench_model.txt";
    save_model(model, fm, path);
    auto [m2, f2] = load_model(path);
    EXPECT_EQ(f2.tokens, fm.tokens);
    EXPECT_EQ(m2.classes, model.classes);
    for (const auto& t : texts) {
        const auto p1 = predict_proba(model, transform(fm, t));
        const auto p2 = predict_proba(m2, transform(f2, t));
        for (std::size_t c = 0; c < p1.size(); ++c) EXPECT_NEAR(p1[c], p2[c], 1e-12);
    }
}

TEST(CoarseDataset, UsesStoredClassAndOptionalContext) {
    GoldRecord r;
    r.target.title = "Title words";
    r.target.submission_text = "Body";
    r.target.target_text = "Target words";
    r.coarse = {Coarse::IA, false};
    const std::vector<GoldRecord> gold{r};
    auto plain = coarse_dataset(gold);
    EXPECT_EQ(plain[0].text, "Target words");
    EXPECT_EQ(plain[0].label, "IA");
    auto ctx = coarse_dataset(gold, true);
    EXPECT_NE(ctx[0].text.find("Title words"), std::string::npos);
    EXPECT_NE(ctx[0].text.find("Target words"), std::string::npos);
}

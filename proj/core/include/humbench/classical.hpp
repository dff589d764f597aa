#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "humbench/gold.hpp"

namespace humbench::classical {

// Lowercase ASCII alphanumeric runs of length >= 2; every other byte separates.
std::vector<std::string> tokenize(std::string_view text);

enum class FeatureMode { BoW, TfIdf };

std::string_view to_string(FeatureMode m);
FeatureMode parse_feature_mode(std::string_view s);

// Sorted by column index, no duplicates.
struct SparseVector {
    std::vector<std::pair<std::size_t, double>> entries;

    double dot(std::span<const double> dense) const;
    double norm() const;
};

using SparseMatrix = std::vector<SparseVector>;

struct FeatureModel {
    FeatureMode mode = FeatureMode::TfIdf;
    std::vector<std::string> tokens;  // column -> token, sorted
    std::map<std::string, std::size_t> vocabulary;
    std::vector<double> idf;  // TfIdf only: ln((1+N)/(1+df)) + 1
    std::size_t min_df = 2;

    std::size_t size() const noexcept { return tokens.size(); }
};

// Keeps tokens that occur in at least min_df documents. Throws when nothing remains.
FeatureModel fit_features(std::span<const std::string> corpus, FeatureMode mode, std::size_t min_df = 2);
// BoW: raw counts. TfIdf: count * idf, then L2-normalized.
SparseVector transform(const FeatureModel& model, std::string_view text);
SparseMatrix transform(const FeatureModel& model, std::span<const std::string> texts);

struct LinearModel {
    std::vector<std::string> classes;
    std::size_t num_features = 0;
    // classes.size() rows of num_features + 1 entries; the last entry is the bias.
    std::vector<double> weights;
    int iterations = 0;
    double final_loss = 0.0;
    double lambda = 0.0;

    double weight(std::size_t cls, std::size_t feature) const { return weights[cls * (num_features + 1) + feature]; }
    double bias(std::size_t cls) const { return weights[cls * (num_features + 1) + num_features]; }
};

struct TrainOptions {
    double lambda = 1.0;
    int max_iter = 500;
    double tol = 1e-6;
};

// Summed multinomial cross-entropy plus lambda/2 * |W|^2 over non-bias
// weights. Fills `grad` (same layout as the weights) when non-null.
double loss_and_gradient(const SparseMatrix& x, std::span<const int> y, std::size_t num_classes,
                         std::size_t num_features, std::span<const double> weights, double lambda,
                         std::vector<double>* grad);

// Full-batch gradient descent with Armijo backtracking, starting from zero.
// y holds indices into class_names; at least two classes must occur.
LinearModel train_logreg(const SparseMatrix& x, std::span<const int> y, std::size_t num_features,
                         std::vector<std::string> class_names, const TrainOptions& opt = {});

std::vector<double> predict_proba(const LinearModel& model, const SparseVector& x);
std::size_t predict(const LinearModel& model, const SparseVector& x);

struct LabeledText {
    std::string text;
    std::string label;
};

// Target comments labelled with their stored coarse class ("IH", "IA",
// "Neutral"); with_context prepends the thread context.
std::vector<LabeledText> coarse_dataset(std::span<const GoldRecord> gold, bool with_context = false);

struct CvResult {
    std::vector<double> folds;  // Macro-F1 per fold
    double mean = 0.0;
    std::uint64_t seed = 0;
};

// Stratified fold index per row: each class is shuffled with its own stream
// and dealt round-robin, continuing where the previous class stopped.
std::vector<std::size_t> stratified_folds(std::span<const std::string> labels, std::size_t k, std::uint64_t seed);

// Features are refit on each training split. Folds run concurrently; the
// result does not depend on scheduling.
CvResult cross_validate(std::span<const LabeledText> data, FeatureMode mode, std::size_t k, std::uint64_t seed,
                        const TrainOptions& opt = {}, std::size_t min_df = 2);

struct TopFeatures {
    std::vector<std::string> positive;  // weight descending, ties by token
    std::vector<std::string> negative;  // weight ascending, ties by token
};

TopFeatures top_features(const LinearModel& model, const FeatureModel& features, const std::string& cls,
                         std::size_t k = 5);

// Whitespace-separated text format, see save_model.
void save_model(const LinearModel& model, const FeatureModel& features, const std::filesystem::path& path);
std::pair<LinearModel, FeatureModel> load_model(const std::filesystem::path& path);

}  // namespace humbench::classical

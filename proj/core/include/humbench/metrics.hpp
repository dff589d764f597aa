#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace humbench::metrics {

// Chance-corrected agreement of two binary annotations of equal length n >= 1.
// When expected agreement is 1 the result is 1.0 if the sequences agree
// everywhere and 0.0 otherwise.
double cohen_kappa(const std::vector<bool>& a, const std::vector<bool>& b);

// Unweighted mean of per-label kappas. Throws on an empty map.
double average_kappa(const std::map<std::string, double>& per_label);

// "moderate" (0.40, 0.60], "substantial" (0.60, 0.80], "almost perfect"
// (0.80, 1.0]; anything lower is "below moderate".
std::string_view interpret_kappa(double kappa);

// Class ids are dense integers in [0, num_classes).
struct Confusion {
    std::size_t num_classes = 0;
    std::vector<std::size_t> cells;  // row = gold, column = predicted

    std::size_t at(std::size_t gold, std::size_t pred) const { return cells[gold * num_classes + pred]; }
};

Confusion confusion(std::span<const int> gold, std::span<const int> pred, std::size_t num_classes);

// Per-class F1 with 0/0 -> 0; classes absent from both gold and prediction
// are excluded from the mean. Throws if no class remains.
double macro_f1(const Confusion& cm);
double macro_f1(std::span<const int> gold, std::span<const int> pred, std::size_t num_classes);
double macro_f1(const std::vector<std::string>& gold, const std::vector<std::string>& pred,
                const std::vector<std::string>& class_set);

// Mean of macro_f1(a as gold, b) and macro_f1(b as gold, a).
double mutual_upper_bound(std::span<const int> a, std::span<const int> b, std::size_t num_classes);
double mutual_upper_bound(const std::vector<std::string>& a, const std::vector<std::string>& b,
                          const std::vector<std::string>& class_set);

// Binary convenience: positives are class 1.
double binary_macro_f1(const std::vector<bool>& gold, const std::vector<bool>& pred);
double binary_mutual_upper_bound(const std::vector<bool>& a, const std::vector<bool>& b);

struct BaselineEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t trials = 0;
};

// Monte-Carlo expectation of macro_f1 when predictions are drawn i.i.d. from
// the empirical class distribution and gold is the dataset itself. Trial t
// uses the stream Rng::derive(seed, t), so results do not depend on how the
// trials are scheduled across threads.
BaselineEstimate distribution_baseline(std::span<const std::size_t> counts, std::size_t trials,
                                       std::uint64_t seed);

}  // namespace humbench::metrics

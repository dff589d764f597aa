#include "humbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "humbench/error.hpp"
#include "humbench/rng.hpp"

namespace humbench::metrics {

double cohen_kappa(const std::vector<bool>& a, const std::vector<bool>& b) {
    if (a.size() != b.size()) throw ValidationError("cohen_kappa: length mismatch");
    if (a.empty()) throw ValidationError("cohen_kappa: empty assignments");
    const double n = static_cast<double>(a.size());
    std::size_t agree = 0, pos_a = 0, pos_b = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        agree += a[i] == b[i];
        pos_a += a[i];
        pos_b += b[i];
    }
    const double p_o = agree / n;
    const double pa = pos_a / n, pb = pos_b / n;
    const double p_e = pa * pb + (1.0 - pa) * (1.0 - pb);
    if (p_e >= 1.0) return p_o >= 1.0 ? 1.0 : 0.0;
    return (p_o - p_e) / (1.0 - p_e);
}

double average_kappa(const std::map<std::string, double>& per_label) {
    if (per_label.empty()) throw ValidationError("average_kappa: no labels");
    double sum = 0.0;
    for (const auto& [k, v] : per_label) sum += v;
    return sum / static_cast<double>(per_label.size());
}

std::string_view interpret_kappa(double kappa) {
    if (!(kappa >= -1.0 && kappa <= 1.0)) throw ValidationError("interpret_kappa: value outside [-1, 1]");
    if (kappa > 0.80) return "almost perfect";
    if (kappa > 0.60) return "substantial";
    if (kappa > 0.40) return "moderate";
    return "below moderate";
}

Confusion confusion(std::span<const int> gold, std::span<const int> pred, std::size_t num_classes) {
    if (gold.size() != pred.size()) throw ValidationError("macro_f1: length mismatch");
    if (gold.empty()) throw ValidationError("macro_f1: empty sequences");
    Confusion cm{num_classes, std::vector<std::size_t>(num_classes * num_classes, 0)};
    for (std::size_t i = 0; i < gold.size(); ++i) {
        const int g = gold[i], p = pred[i];
        if (g < 0 || p < 0 || static_cast<std::size_t>(g) >= num_classes ||
            static_cast<std::size_t>(p) >= num_classes)
            throw ValidationError("macro_f1: class id outside the declared class set");
        ++cm.cells[static_cast<std::size_t>(g) * num_classes + static_cast<std::size_t>(p)];
    }
    return cm;
}

double macro_f1(const Confusion& cm) {
    const std::size_t k = cm.num_classes;
    double sum = 0.0;
    std::size_t present = 0;
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t tp = cm.at(c, c), gold_total = 0, pred_total = 0;
        for (std::size_t j = 0; j < k; ++j) {
            gold_total += cm.at(c, j);
            pred_total += cm.at(j, c);
        }
        if (gold_total == 0 && pred_total == 0) continue;
        ++present;
        // F1 = 2tp / (2tp + fp + fn); this is 0 whenever tp = 0 which also
        // covers the 0/0 precision or recall cases.
        const double denom = static_cast<double>(gold_total + pred_total);
        sum += denom > 0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
    }
    if (present == 0) throw ValidationError("macro_f1: no class present after exclusion");
    return sum / static_cast<double>(present);
}

double macro_f1(std::span<const int> gold, std::span<const int> pred, std::size_t num_classes) {
    return macro_f1(confusion(gold, pred, num_classes));
}

namespace {

std::vector<int> encode(const std::vector<std::string>& seq, const std::vector<std::string>& class_set) {
    std::vector<int> out;
    out.reserve(seq.size());
    for (const auto& s : seq) {
        auto it = std::find(class_set.begin(), class_set.end(), s);
        if (it == class_set.end()) throw ValidationError("macro_f1: '" + s + "' is not in the class set");
        out.push_back(static_cast<int>(it - class_set.begin()));
    }
    return out;
}

std::vector<int> encode(const std::vector<bool>& seq) {
    std::vector<int> out(seq.size());
    for (std::size_t i = 0; i < seq.size(); ++i) out[i] = seq[i] ? 1 : 0;
    return out;
}

}  // namespace

double macro_f1(const std::vector<std::string>& gold, const std::vector<std::string>& pred,
                const std::vector<std::string>& class_set) {
    auto g = encode(gold, class_set);
    auto p = encode(pred, class_set);
    return macro_f1(g, p, class_set.size());
}

double mutual_upper_bound(std::span<const int> a, std::span<const int> b, std::size_t num_classes) {
    return 0.5 * (macro_f1(a, b, num_classes) + macro_f1(b, a, num_classes));
}

double mutual_upper_bound(const std::vector<std::string>& a, const std::vector<std::string>& b,
                          const std::vector<std::string>& class_set) {
    auto ea = encode(a, class_set);
    auto eb = encode(b, class_set);
    return mutual_upper_bound(ea, eb, class_set.size());
}

double binary_macro_f1(const std::vector<bool>& gold, const std::vector<bool>& pred) {
    auto g = encode(gold);
    auto p = encode(pred);
    return macro_f1(g, p, 2);
}

double binary_mutual_upper_bound(const std::vector<bool>& a, const std::vector<bool>& b) {
    auto ea = encode(a);
    auto eb = encode(b);
    return mutual_upper_bound(ea, eb, 2);
}

BaselineEstimate distribution_baseline(std::span<const std::size_t> counts, std::size_t trials,
                                       std::uint64_t seed) {
    if (trials == 0) throw ValidationError("distribution_baseline: trials must be >= 1");
    const std::size_t k = counts.size();
    const std::size_t n = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    if (n == 0) throw ValidationError("distribution_baseline: empty class counts");

    std::vector<int> gold;
    gold.reserve(n);
    std::vector<std::size_t> cumulative(k);
    std::size_t acc = 0;
    for (std::size_t c = 0; c < k; ++c) {
        gold.insert(gold.end(), counts[c], static_cast<int>(c));
        acc += counts[c];
        cumulative[c] = acc;
    }

    std::vector<double> scores(trials);
    auto run = [&](std::size_t begin, std::size_t end) {
        std::vector<int> pred(n);
        for (std::size_t t = begin; t < end; ++t) {
            Rng rng = Rng::derive(seed, t);
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t u = static_cast<std::size_t>(rng.below(n));
                pred[i] = static_cast<int>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                           cumulative.begin());
            }
            scores[t] = macro_f1(gold, pred, k);
        }
    };

    const std::size_t workers =
        std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(1, trials / 1000));
    if (workers <= 1) {
        run(0, trials);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (trials + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t b = w * chunk, e = std::min(trials, b + chunk);
            if (b < e) pool.emplace_back(run, b, e);
        }
        for (auto& th : pool) th.join();
    }

    // Sequential reduction keeps the estimate bit-identical across thread counts.
    double sum = 0.0;
    for (double s : scores) sum += s;
    const double mean = sum / static_cast<double>(trials);
    double ss = 0.0;
    for (double s : scores) ss += (s - mean) * (s - mean);
    const double var = trials > 1 ? ss / static_cast<double>(trials - 1) : 0.0;
    return BaselineEstimate{mean, std::sqrt(var / static_cast<double>(trials)), trials};
}

}  // namespace humbench::metrics

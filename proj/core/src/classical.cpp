#include "humbench/classical.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <numeric>
#include <set>

#include "humbench/error.hpp"
#include "humbench/metrics.hpp"
#include "humbench/rng.hpp"
#include "humbench/text.hpp"

namespace humbench::classical {

std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (cur.size() >= 2) out.push_back(cur);
        cur.clear();
    };
    for (char ch : s) {
        const auto c = static_cast<unsigned char>(ch);
        if (c < 0x80 && std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();
    return out;
}

std::string_view to_string(FeatureMode m) { return m == FeatureMode::BoW ? "bow" : "tfidf"; }

FeatureMode parse_feature_mode(std::string_view s) {
    const std::string v = text::to_lower(s);
    if (v == "bow" || v == "bag-of-words") return FeatureMode::BoW;
    if (v == "tfidf" || v == "tf-idf") return FeatureMode::TfIdf;
    throw ValidationError("unknown feature mode '" + std::string(s) + "'");
}

double SparseVector::dot(std::span<const double> dense) const {
    double s = 0.0;
    for (const auto& [i, v] : entries) s += v * dense[i];
    return s;
}

double SparseVector::norm() const {
    double s = 0.0;
    for (const auto& e : entries) s += e.second * e.second;
    return std::sqrt(s);
}

FeatureModel fit_features(std::span<const std::string> corpus, FeatureMode mode, std::size_t min_df) {
    if (corpus.empty()) throw ValidationError("fit_features: empty corpus");
    std::map<std::string, std::size_t> df;
    for (const auto& doc : corpus) {
        auto toks = tokenize(doc);
        std::set<std::string> uniq(toks.begin(), toks.end());
        for (const auto& t : uniq) ++df[t];
    }
    FeatureModel m;
    m.mode = mode;
    m.min_df = min_df;
    const double n = static_cast<double>(corpus.size());
    for (const auto& [tok, count] : df) {
        if (count < min_df) continue;
        m.vocabulary[tok] = m.tokens.size();
        m.tokens.push_back(tok);
        if (mode == FeatureMode::TfIdf) m.idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
    }
    if (m.tokens.empty()) throw ValidationError("fit_features: vocabulary is empty after document-frequency filtering");
    return m;
}

SparseVector transform(const FeatureModel& model, std::string_view s) {
    std::map<std::size_t, double> counts;
    for (const auto& t : tokenize(s)) {
        if (auto it = model.vocabulary.find(t); it != model.vocabulary.end()) counts[it->second] += 1.0;
    }
    SparseVector v;
    v.entries.assign(counts.begin(), counts.end());
    if (model.mode == FeatureMode::TfIdf) {
        for (auto& [i, x] : v.entries) x *= model.idf[i];
        const double nrm = v.norm();
        if (nrm > 0.0) {
            for (auto& e : v.entries) e.second /= nrm;
        }
    }
    return v;
}

SparseMatrix transform(const FeatureModel& model, std::span<const std::string> texts) {
    SparseMatrix out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(transform(model, t));
    return out;
}

namespace {

// Row-major class scores z = W x + b for one sample.
void scores(const SparseVector& x, std::size_t k, std::size_t v, std::span<const double> w, std::vector<double>& z) {
    const std::size_t stride = v + 1;
    for (std::size_t c = 0; c < k; ++c) z[c] = x.dot(w.subspan(c * stride, v)) + w[c * stride + v];
}

// In-place softmax; returns log-sum-exp.
double softmax(std::vector<double>& z) {
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (auto& s : z) {
        s = std::exp(s - mx);
        sum += s;
    }
    for (auto& s : z) s /= sum;
    return mx + std::log(sum);
}

}  // namespace

double loss_and_gradient(const SparseMatrix& x, std::span<const int> y, std::size_t k, std::size_t v,
                         std::span<const double> w, double lambda, std::vector<double>* grad) {
    if (x.size() != y.size()) throw ValidationError("loss_and_gradient: X and y differ in length");
    const std::size_t stride = v + 1;
    if (w.size() != k * stride) throw ValidationError("loss_and_gradient: weight size mismatch");
    if (grad) grad->assign(w.size(), 0.0);
    double loss = 0.0;
    std::vector<double> z(k);
    for (std::size_t i = 0; i < x.size(); ++i) {
        scores(x[i], k, v, w, z);
        const auto yi = static_cast<std::size_t>(y[i]);
        const double zy = z[yi];
        const double lse = softmax(z);
        loss += lse - zy;
        if (!grad) continue;
        for (std::size_t c = 0; c < k; ++c) {
            const double r = z[c] - (c == yi ? 1.0 : 0.0);
            double* row = grad->data() + c * stride;
            for (const auto& [j, xv] : x[i].entries) row[j] += r * xv;
            row[v] += r;
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t j = 0; j < v; ++j) {
            const double wj = w[c * stride + j];
            loss += 0.5 * lambda * wj * wj;
            if (grad) (*grad)[c * stride + j] += lambda * wj;
        }
    }
    return loss;
}

LinearModel train_logreg(const SparseMatrix& x, std::span<const int> y, std::size_t num_features,
                         std::vector<std::string> class_names, const TrainOptions& opt) {
    const std::size_t k = class_names.size();
    if (x.empty() || x.size() != y.size()) throw ValidationError("train_logreg: X and y must be non-empty and aligned");
    std::set<int> present;
    for (int c : y) {
        if (c < 0 || static_cast<std::size_t>(c) >= k) throw ValidationError("train_logreg: class index out of range");
        present.insert(c);
    }
    if (present.size() < 2) throw ValidationError("train_logreg: at least two classes must be present");
    if (opt.lambda < 0.0 || opt.max_iter < 0) throw ValidationError("train_logreg: invalid options");

    LinearModel m;
    m.classes = std::move(class_names);
    m.num_features = num_features;
    m.lambda = opt.lambda;
    m.weights.assign(k * (num_features + 1), 0.0);

    std::vector<double> grad, trial(m.weights.size());
    double loss = loss_and_gradient(x, y, k, num_features, m.weights, opt.lambda, &grad);
    double step = 1.0;
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        const double gnorm2 = std::inner_product(grad.begin(), grad.end(), grad.begin(), 0.0);
        if (std::sqrt(gnorm2) <= opt.tol) break;
        step = std::min(step * 2.0, 1e6);
        double trial_loss = 0.0;
        for (;;) {
            for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = m.weights[i] - step * grad[i];
            trial_loss = loss_and_gradient(x, y, k, num_features, trial, opt.lambda, nullptr);
            if (std::isfinite(trial_loss) && trial_loss <= loss - 0.5 * step * gnorm2) break;
            step *= 0.5;
            if (step < 1e-20) break;
        }
        if (!std::isfinite(trial_loss))
            throw ValidationError("train_logreg: non-finite loss at iteration " + std::to_string(it + 1));
        if (trial_loss > loss) break;  // no descent possible at machine precision
        m.weights.swap(trial);
        loss = loss_and_gradient(x, y, k, num_features, m.weights, opt.lambda, &grad);
    }
    m.iterations = it;
    m.final_loss = loss;
    return m;
}

std::vector<double> predict_proba(const LinearModel& model, const SparseVector& x) {
    std::vector<double> z(model.classes.size());
    scores(x, model.classes.size(), model.num_features, model.weights, z);
    softmax(z);
    return z;
}

std::size_t predict(const LinearModel& model, const SparseVector& x) {
    auto p = predict_proba(model, x);
    return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

std::vector<std::size_t> stratified_folds(std::span<const std::string> labels, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw ValidationError("cross-validation needs k >= 2");
    if (k > labels.size()) throw ValidationError("cross-validation: k exceeds the number of rows");
    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    std::vector<std::size_t> fold(labels.size());
    std::size_t offset = 0;
    std::uint64_t stream = 0;
    for (auto& [cls, rows] : by_class) {
        if (rows.size() < k)
            throw ValidationError("cannot stratify into " + std::to_string(k) + " folds: class '" + cls +
                                  "' has only " + std::to_string(rows.size()) + " rows");
        Rng rng = Rng::derive(seed, stream++);
        rng.shuffle(std::span<std::size_t>(rows));
        for (std::size_t i = 0; i < rows.size(); ++i) fold[rows[i]] = (offset + i) % k;
        offset += rows.size();
    }
    return fold;
}

CvResult cross_validate(std::span<const LabeledText> data, FeatureMode mode, std::size_t k, std::uint64_t seed,
                        const TrainOptions& opt, std::size_t min_df) {
    std::vector<std::string> labels;
    for (const auto& d : data) labels.push_back(d.label);
    const auto folds = stratified_folds(labels, k, seed);
    std::vector<std::string> classes(labels.begin(), labels.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    std::map<std::string, int> class_index;
    for (std::size_t i = 0; i < classes.size(); ++i) class_index[classes[i]] = static_cast<int>(i);

    auto run_fold = [&](std::size_t f) {
        std::vector<std::string> train_text, test_text, test_gold;
        std::vector<int> train_y;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (folds[i] == f) {
                test_text.push_back(data[i].text);
                test_gold.push_back(data[i].label);
            } else {
                train_text.push_back(data[i].text);
                train_y.push_back(class_index.at(data[i].label));
            }
        }
        const FeatureModel fm = fit_features(train_text, mode, min_df);
        const LinearModel lm = train_logreg(transform(fm, train_text), train_y, fm.size(), classes, opt);
        std::vector<std::string> pred;
        for (const auto& t : test_text) pred.push_back(classes[predict(lm, transform(fm, t))]);
        return metrics::macro_f1(test_gold, pred, classes);
    };

    std::vector<std::future<double>> pending;
    for (std::size_t f = 0; f < k; ++f) pending.push_back(std::async(std::launch::async, run_fold, f));
    CvResult out;
    out.seed = seed;
    for (auto& p : pending) out.folds.push_back(p.get());
    out.mean = std::accumulate(out.folds.begin(), out.folds.end(), 0.0) / static_cast<double>(k);
    return out;
}

TopFeatures top_features(const LinearModel& model, const FeatureModel& features, const std::string& cls,
                         std::size_t k) {
    auto it = std::find(model.classes.begin(), model.classes.end(), cls);
    if (it == model.classes.end()) throw ValidationError("top_features: unknown class '" + cls + "'");
    const auto c = static_cast<std::size_t>(it - model.classes.begin());
    const std::size_t v = features.size();
    if (v != model.num_features) throw ValidationError("top_features: feature model does not match the linear model");
    if (k > v) throw ValidationError("top_features: k exceeds the vocabulary size");

    std::vector<std::pair<double, std::string>> ranked;
    for (std::size_t j = 0; j < v; ++j) ranked.emplace_back(model.weight(c, j), features.tokens[j]);
    TopFeatures out;
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (std::size_t i = 0; i < k; ++i) out.positive.push_back(ranked[i].second);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : a.second < b.second;
    });
    for (std::size_t i = 0; i < k; ++i) out.negative.push_back(ranked[i].second);
    return out;
}

// Layout:
//   humbench-logreg 1
//   mode <bow|tfidf> min_df <n>
//   classes <k> <name>...
//   vocab <V>            followed by V lines "<token> <idf or 1>"
//   meta <iterations> <final_loss> <lambda>
//   weights              followed by k lines of V+1 numbers (bias last)
void save_model(const LinearModel& model, const FeatureModel& features, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write model file " + path.string());
    out.precision(std::numeric_limits<double>::max_digits10);
    out << "humbench-logreg 1\n";
    out << "mode " << to_string(features.mode) << " min_df " << features.min_df << "\n";
    out << "classes " << model.classes.size();
    for (const auto& c : model.classes) out << ' ' << c;
    out << "\nvocab " << features.size() << "\n";
    for (std::size_t j = 0; j < features.size(); ++j)
        out << features.tokens[j] << ' ' << (features.idf.empty() ? 1.0 : features.idf[j]) << "\n";
    out << "meta " << model.iterations << ' ' << model.final_loss << ' ' << model.lambda << "\n";
    out << "weights\n";
    const std::size_t stride = model.num_features + 1;
    for (std::size_t c = 0; c < model.classes.size(); ++c) {
        for (std::size_t j = 0; j < stride; ++j) out << (j ? " " : "") << model.weights[c * stride + j];
        out << "\n";
    }
    if (!out) throw ValidationError("failed writing model file " + path.string());
}

std::pair<LinearModel, FeatureModel> load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read model file " + path.string());
    auto expect = [&](const std::string& word) {
        std::string got;
        if (!(in >> got) || got != word)
            throw ValidationError(path.string() + ": expected '" + word + "', found '" + got + "'");
    };
    int version = 0;
    expect("humbench-logreg");
    in >> version;
    if (version != 1) throw ValidationError(path.string() + ": unsupported model version");
    FeatureModel fm;
    LinearModel lm;
    std::string mode;
    expect("mode");
    in >> mode;
    fm.mode = parse_feature_mode(mode);
    expect("min_df");
    in >> fm.min_df;
    std::size_t k = 0, v = 0;
    expect("classes");
    in >> k;
    lm.classes.resize(k);
    for (auto& c : lm.classes) in >> c;
    expect("vocab");
    in >> v;
    for (std::size_t j = 0; j < v; ++j) {
        std::string tok;
        double idf = 0.0;
        in >> tok >> idf;
        fm.vocabulary[tok] = j;
        fm.tokens.push_back(tok);
        if (fm.mode == FeatureMode::TfIdf) fm.idf.push_back(idf);
    }
    expect("meta");
    in >> lm.iterations >> lm.final_loss >> lm.lambda;
    expect("weights");
    lm.num_features = v;
    lm.weights.resize(k * (v + 1));
    for (auto& w : lm.weights) in >> w;
    if (!in) throw ValidationError(path.string() + ": truncated model file");
    return {std::move(lm), std::move(fm)};
}

std::vector<LabeledText> coarse_dataset(std::span<const GoldRecord> gold, bool with_context) {
    std::vector<LabeledText> out;
    out.reserve(gold.size());
    for (const auto& g : gold) {
        std::string text = with_context ? g.target.context_text() + "\n\n" + g.target.target_text : g.target.target_text;
        out.push_back({std::move(text), std::string(to_string(g.coarse.value))});
    }
    return out;
}

}  // namespace humbench::classical

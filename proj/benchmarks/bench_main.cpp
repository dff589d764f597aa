#include <random>

#include <benchmark/benchmark.h>

#include "humbench/classical.hpp"
#include "humbench/codebook.hpp"
#include "humbench/gateway.hpp"
#include "humbench/metrics.hpp"
#include "humbench/prompt.hpp"

using namespace humbench;

namespace {

std::vector<std::string> synthetic_corpus(std::size_t docs, std::uint64_t seed) {
    static const std::vector<std::string> words{
        "i",      "think", "you",   "are",   "wrong", "maybe",  "could", "be",     "right",  "honestly",
        "always", "never", "every", "idiot", "data",  "source", "feel",  "understand", "point", "view"};
    std::mt19937_64 gen(seed);
    std::vector<std::string> out(docs);
    for (auto& d : out) {
        const std::size_t len = 8 + gen() % 24;
        for (std::size_t i = 0; i < len; ++i) d += words[gen() % words.size()] + " ";
    }
    return out;
}

void BM_MacroF1(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 gen(1);
    std::vector<int> g(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = static_cast<int>(gen() % 3);
        p[i] = static_cast<int>(gen() % 3);
    }
    for (auto _ : state) benchmark::DoNotOptimize(metrics::macro_f1(g, p, 3));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_MacroF1)->Arg(350)->Arg(10000);

void BM_CohenKappa(benchmark::State& state) {
    std::mt19937_64 gen(2);
    std::vector<bool> a(350), b(350);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = gen() % 4 == 0;
        b[i] = gen() % 4 == 0;
    }
    for (auto _ : state) benchmark::DoNotOptimize(metrics::cohen_kappa(a, b));
}
BENCHMARK(BM_CohenKappa);

void BM_DistributionBaseline(benchmark::State& state) {
    const std::vector<std::size_t> counts{134, 60, 156};
    const auto trials = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(metrics::distribution_baseline(counts, trials, 0));
}
BENCHMARK(BM_DistributionBaseline)->Arg(1000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_TfIdfFitTransform(benchmark::State& state) {
    const auto corpus = synthetic_corpus(350, 3);
    for (auto _ : state) {
        const auto model = classical::fit_features(corpus, classical::FeatureMode::TfIdf);
        benchmark::DoNotOptimize(classical::transform(model, corpus));
    }
}
BENCHMARK(BM_TfIdfFitTransform)->Unit(benchmark::kMillisecond);

void BM_TrainLogreg(benchmark::State& state) {
    const auto corpus = synthetic_corpus(280, 4);
    const auto model = classical::fit_features(corpus, classical::FeatureMode::TfIdf);
    const auto x = classical::transform(model, corpus);
    std::mt19937_64 gen(5);
    std::vector<int> y(x.size());
    for (auto& v : y) v = static_cast<int>(gen() % 3);
    for (auto _ : state)
        benchmark::DoNotOptimize(classical::train_logreg(x, y, model.size(), {"IH", "IA", "Neutral"}));
}
BENCHMARK(BM_TrainLogreg)->Unit(benchmark::kMillisecond);

void BM_CacheKey(benchmark::State& state) {
    AnnotationTarget t;
    t.target_id = "t1";
    t.title = "Should homework be banned?";
    t.submission_text = "Teachers keep assigning more.";
    t.target_text = "I see why you think so, even though my experience was different.";
    ChatRequest r;
    r.model_id = "bench";
    r.messages = build_prompt(t, PromptConfig{}, default_codebook(), std::string("AH"));
    for (auto _ : state) benchmark::DoNotOptimize(cache_key(r));
}
BENCHMARK(BM_CacheKey);

void BM_BuildPrompt(benchmark::State& state) {
    AnnotationTarget t;
    t.target_id = "t1";
    t.title = "Is nuclear power worth the risk?";
    t.submission_text = "Trying to decide where I stand on this.";
    t.target_text = "I lean toward yes, but that is just my take.";
    PromptConfig cfg{PromptContent::CodeAndDescription, PromptFormat::MultipleSelection, Task::LabelWise};
    for (auto _ : state) benchmark::DoNotOptimize(build_prompt(t, cfg, default_codebook(), std::nullopt));
}
BENCHMARK(BM_BuildPrompt);

}  // namespace

BENCHMARK_MAIN();

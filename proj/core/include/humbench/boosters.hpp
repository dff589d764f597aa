#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "humbench/gold.hpp"
#include "humbench/pipeline.hpp"

namespace humbench {

enum class Booster { None, FewShot, CoT, FewShotCoT, AutoOptimize, SelfRefine };

std::string_view to_string(Booster b);
Booster parse_booster(std::string_view s);

// Positives carry the label in both annotations; negatives in neither.
struct ExemplarSet {
    std::string label;
    std::vector<AnnotationTarget> positives;
    std::vector<AnnotationTarget> negatives;
    std::vector<std::string> warnings;

    std::size_t size() const noexcept { return positives.size() + negatives.size(); }
    std::set<std::string> target_ids() const;
};

// Seeded uniform draw within each stratum. Short strata return everything
// available plus a warning; zero positives is an error.
ExemplarSet select_exemplars(std::span<const GoldRecord> gold, const std::string& label, std::size_t n_pos,
                             std::size_t n_neg, std::uint64_t seed, const std::set<std::string>& exclude = {});

// FewShot inserts one user/assistant pair per exemplar (positives and
// negatives alternating) before the final user message; CoT appends the
// explain-first instruction to the system message. FewShot variants need a
// label-wise binary config and an exemplar set.
Conversation decorate(const Conversation& base, Booster booster, const PromptConfig& config, const Codebook& cb,
                      const ExemplarSet* exemplars = nullptr);

// --- automatic prompt optimization --------------------------------------

struct ExampleOutcome {
    AnnotationTarget target;
    std::string output;  // raw model text
    bool predicted = false;
    bool gold = false;
};

struct DevEvaluation {
    double score = 0.0;
    std::vector<ExampleOutcome> examples;
};

// Scores a candidate system prompt on the dev split.
using PromptScorer = std::function<DevEvaluation(const std::string& system_prompt)>;

// Binary Macro-F1 of the BQ pipeline with the candidate as system prompt;
// gold positive means the label is in both annotations.
PromptScorer make_bq_scorer(Gateway& gateway, std::span<const GoldRecord> dev, const std::string& label,
                            const Codebook& cb, const PromptConfig& config = {});

struct OptimizationRound {
    std::vector<std::string> candidates;
    std::vector<double> scores;
    std::vector<std::string> summaries;  // at most 200 words each
    std::vector<bool> flagged;           // empty/unusable candidate, scored 0
    std::size_t chosen = 0;              // argmax, first index on ties
    bool adopted = false;                // winner strictly beat the incumbent
    double incumbent_score = 0.0;        // after this round
};

struct OptimizationHistory {
    std::string label;
    std::string seed_prompt;
    double seed_score = 0.0;
    std::vector<OptimizationRound> rounds;
    std::size_t candidate_evaluations = 0;
};

struct OptimizeResult {
    std::string best_prompt;
    double best_score = 0.0;
    OptimizationHistory history;
};

struct OptimizeOptions {
    int rounds = 10;
    int per_round = 3;
    std::size_t max_summary_words = 200;
};

// The seed prompt is scored once to provide the incumbent score and the
// example outputs shown in the first analysis step; every round then makes
// per_round candidates (3 gateway calls each: analysis, refinement,
// summary) and scores each once.
OptimizeResult auto_optimize(const std::string& label, const std::string& seed_prompt,
                             std::span<const GoldRecord> dev, Gateway& gateway, const PromptScorer& scorer,
                             const Codebook& cb, const OptimizeOptions& opt = {});

// Splits per label: n_dev/2 positives and n_dev/2 negatives (agreed gold) go
// to dev, the rest to eval.
struct DevEvalSplit {
    std::vector<GoldRecord> dev;
    std::vector<GoldRecord> eval;
    std::vector<std::string> warnings;
};

DevEvalSplit split_dev_eval(std::span<const GoldRecord> gold, const std::string& label, std::size_t n_dev,
                            std::uint64_t seed);

// --- self-refinement ------------------------------------------------------

struct RefineCycle {
    Verdict prediction;
    std::string feedback;
    Verdict reconsidered;
    bool reconsider_unparseable = false;
};

struct RefinementTranscript {
    std::string target_id;
    std::optional<std::string> label;
    std::vector<RefineCycle> cycles;
    Verdict final;
    bool flagged = false;
    std::vector<std::string> cache_keys;
    std::vector<std::string> notes;
};

// Each cycle is predict -> feedback -> reconsider: exactly 3 gateway calls.
// An unparseable prediction falls back to the previous verdict (the failure
// policy's outcome in cycle 1); an unparseable reconsideration keeps the
// cycle's prediction. Either flags the transcript. Gateway errors propagate.
RefinementTranscript self_refine(const AnnotationTarget& target, const PromptConfig& config, const Codebook& cb,
                                 const std::optional<std::string>& label, Gateway& gateway, int rounds = 2,
                                 const FailurePolicy& policy = {}, const PromptOptions& popt = {});

// --- synthetic sample generation ------------------------------------------

struct SyntheticSample {
    std::string label;
    std::string title;
    std::string content;
    std::string target_comment;
    bool synthetic = true;
};

struct GenerationResult {
    std::vector<SyntheticSample> samples;
    std::size_t shortfall = 0;
    std::vector<std::string> warnings;
};

// Three-shot generation; unusable replies are skipped and counted.
GenerationResult generate_samples(const std::string& label, std::span<const AnnotationTarget> exemplars,
                                  Gateway& gateway, const Codebook& cb, int n);

// Audit records, one JSON object per line.
nlohmann::json history_to_json(const OptimizationHistory& h);
nlohmann::json transcript_to_json(const RefinementTranscript& t);
nlohmann::json sample_to_json(const SyntheticSample& s);

}  // namespace humbench

#include "humbench/boosters.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <sstream>

#include "humbench/error.hpp"
#include "humbench/metrics.hpp"
#include "humbench/rng.hpp"
#include "humbench/text.hpp"

namespace humbench {

using nlohmann::json;

std::string_view to_string(Booster b) {
    switch (b) {
        case Booster::None: return "none";
        case Booster::FewShot: return "few-shot";
        case Booster::CoT: return "cot";
        case Booster::FewShotCoT: return "few-shot-cot";
        case Booster::AutoOptimize: return "auto-optimize";
        case Booster::SelfRefine: return "self-refine";
    }
    return "?";
}

Booster parse_booster(std::string_view s) {
    const std::string v = text::to_lower(s);
    if (v == "none" || v == "original") return Booster::None;
    if (v == "few-shot" || v == "fewshot") return Booster::FewShot;
    if (v == "cot") return Booster::CoT;
    if (v == "few-shot-cot" || v == "fewshot-cot") return Booster::FewShotCoT;
    if (v == "auto-optimize" || v == "auto-optimization") return Booster::AutoOptimize;
    if (v == "self-refine" || v == "self-refinement") return Booster::SelfRefine;
    throw ValidationError("unknown booster '" + std::string(s) + "'");
}

std::set<std::string> ExemplarSet::target_ids() const {
    std::set<std::string> ids;
    for (const auto& t : positives) ids.insert(t.target_id);
    for (const auto& t : negatives) ids.insert(t.target_id);
    return ids;
}

namespace {

bool agreed_positive(const GoldRecord& r, const std::string& label) { return r.agreed.count(label) > 0; }

bool agreed_negative(const GoldRecord& r, const std::string& label) {
    return r.labels_a.count(label) == 0 && r.labels_b.count(label) == 0;
}

// Indices of `pool` drawn without replacement, returned in pool order.
std::vector<std::size_t> draw(std::size_t pool, std::size_t k, Rng rng) {
    auto idx = rng.sample_indices(pool, k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

std::vector<const GoldRecord*> stratum(std::span<const GoldRecord> gold, const std::set<std::string>& exclude,
                                       const std::function<bool(const GoldRecord&)>& keep) {
    std::vector<const GoldRecord*> out;
    for (const auto& r : gold) {
        if (!exclude.count(r.target.target_id) && keep(r)) out.push_back(&r);
    }
    // Order by id so the draw does not depend on file order.
    std::sort(out.begin(), out.end(),
              [](const GoldRecord* a, const GoldRecord* b) { return a->target.target_id < b->target.target_id; });
    return out;
}

}  // namespace

ExemplarSet select_exemplars(std::span<const GoldRecord> gold, const std::string& label, std::size_t n_pos,
                             std::size_t n_neg, std::uint64_t seed, const std::set<std::string>& exclude) {
    if (gold.empty()) throw ValidationError("select_exemplars: gold set is empty");
    ExemplarSet out;
    out.label = label;
    auto pos = stratum(gold, exclude, [&](const GoldRecord& r) { return agreed_positive(r, label); });
    auto neg = stratum(gold, exclude, [&](const GoldRecord& r) { return agreed_negative(r, label); });
    if (pos.empty()) throw ValidationError("no agreed positive examples available for label " + label);
    if (pos.size() < n_pos) {
        out.warnings.push_back("label " + label + ": only " + std::to_string(pos.size()) + " of " +
                               std::to_string(n_pos) + " requested positives available");
    }
    if (neg.size() < n_neg) {
        out.warnings.push_back("label " + label + ": only " + std::to_string(neg.size()) + " of " +
                               std::to_string(n_neg) + " requested negatives available");
    }
    for (auto i : draw(pos.size(), n_pos, Rng::derive(seed, 0))) out.positives.push_back(pos[i]->target);
    for (auto i : draw(neg.size(), n_neg, Rng::derive(seed, 1))) out.negatives.push_back(neg[i]->target);
    return out;
}

Conversation decorate(const Conversation& base, Booster booster, const PromptConfig& config, const Codebook& cb,
                      const ExemplarSet* exemplars) {
    base.validate();
    const bool few_shot = booster == Booster::FewShot || booster == Booster::FewShotCoT;
    const bool cot = booster == Booster::CoT || booster == Booster::FewShotCoT;
    if (!few_shot && !cot) return base;

    Conversation out = base;
    if (cot) out.system().content += "\n" + load_template("cot_instruction");
    if (!few_shot) return out;

    if (!exemplars) throw ValidationError("few-shot decoration needs an exemplar set");
    if (config.task != Task::LabelWise || config.format != PromptFormat::BinaryQuestion)
        throw ValidationError("few-shot decoration needs a label-wise binary-question config");
    const auto& label = cb.at(exemplars->label);

    auto answer = [&](bool yes) {
        if (!cot) return std::string(yes ? "Yes" : "No");
        return render_template(load_template("cot_exemplar_answer"),
                               {{"Verdict_phrase", yes ? "fits" : "does not fit"},
                                {"Code", label_text(label, config.content)},
                                {"Answer", yes ? "Yes" : "No"}});
    };

    std::vector<Message> turns;
    const std::size_t n = std::max(exemplars->positives.size(), exemplars->negatives.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (i < exemplars->positives.size()) {
            turns.push_back({Role::User, user_prompt(exemplars->positives[i], config, cb, &exemplars->label)});
            turns.push_back({Role::Assistant, answer(true)});
        }
        if (i < exemplars->negatives.size()) {
            turns.push_back({Role::User, user_prompt(exemplars->negatives[i], config, cb, &exemplars->label)});
            turns.push_back({Role::Assistant, answer(false)});
        }
    }
    auto last_user = std::find_if(out.messages.rbegin(), out.messages.rend(),
                                  [](const Message& m) { return m.role == Role::User; });
    auto pos = std::prev(last_user.base());
    out.messages.insert(pos, turns.begin(), turns.end());
    return out;
}

// ---------------------------------------------------------------------------

PromptScorer make_bq_scorer(Gateway& gateway, std::span<const GoldRecord> dev, const std::string& label,
                            const Codebook& cb, const PromptConfig& config) {
    PromptConfig bq = config;
    bq.task = Task::LabelWise;
    bq.format = PromptFormat::BinaryQuestion;
    cb.at(label);
    std::vector<GoldRecord> records(dev.begin(), dev.end());
    return [&gateway, &cb, bq, label, records](const std::string& system_prompt) {
        DevEvaluation eval;
        std::vector<bool> gold, pred;
        for (const auto& r : records) {
            Conversation conv;
            conv.messages.push_back({Role::System, system_prompt});
            conv.messages.push_back({Role::User, user_prompt(r.target, bq, cb, &label)});
            Classification c = classify(gateway, conv, bq, cb);
            const bool p = verdict_has_label(c.verdict, label);
            const bool g = r.agreed.count(label) > 0;
            gold.push_back(g);
            pred.push_back(p);
            eval.examples.push_back({r.target, c.verdict.raw_text, p, g});
        }
        eval.score = records.empty() ? 0.0 : metrics::binary_macro_f1(gold, pred);
        return eval;
    };
}

namespace {

std::string truncate_words(const std::string& s, std::size_t max_words) {
    std::istringstream in(s);
    std::vector<std::string> words;
    std::string w;
    while (in >> w) words.push_back(w);
    if (words.size() <= max_words) return text::trim(s);
    words.resize(max_words);
    return text::join(words, " ");
}

// Strips a surrounding code fence or matching quotes from a reply.
std::string unwrap_reply(std::string s) {
    s = text::trim(s);
    if (s.rfind("```", 0) == 0) {
        auto first_nl = s.find('\n');
        auto close = s.rfind("```");
        if (first_nl != std::string::npos && close != std::string::npos && close > first_nl)
            s = text::trim(s.substr(first_nl + 1, close - first_nl - 1));
    }
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
        s = text::trim(s.substr(1, s.size() - 2));
    return s;
}

std::string format_examples(const std::vector<ExampleOutcome>& examples, const PromptConfig& config,
                            const Codebook& cb, const std::string& label) {
    std::vector<std::string> blocks;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const auto& e = examples[i];
        std::ostringstream os;
        os << "### Example " << (i + 1) << "\n"
           << "Input: " << user_prompt(e.target, config, cb, &label) << "\n"
           << "Output: " << (e.output.empty() ? std::string("(no output)") : text::trim(e.output)) << "\n"
           << "Label: " << (e.gold ? "Yes" : "No");
        blocks.push_back(os.str());
    }
    return text::join(blocks, "\n\n");
}

std::string format_history(const OptimizationHistory& h) {
    std::vector<std::string> lines;
    for (const auto& r : h.rounds) {
        if (!r.adopted) continue;
        lines.push_back(r.summaries[r.chosen] + " (accuracy: " + std::to_string(r.scores[r.chosen]) + ")");
    }
    if (lines.empty()) return "(none yet)";
    return text::join(lines, "\n");
}

}  // namespace

OptimizeResult auto_optimize(const std::string& label, const std::string& seed_prompt,
                             std::span<const GoldRecord> dev, Gateway& gateway, const PromptScorer& scorer,
                             const Codebook& cb, const OptimizeOptions& opt) {
    if (opt.rounds < 0 || opt.per_round < 1) throw ValidationError("auto_optimize: invalid round settings");
    cb.at(label);
    OptimizeResult out;
    out.best_prompt = seed_prompt;
    out.history.label = label;
    out.history.seed_prompt = seed_prompt;
    if (opt.rounds == 0) return out;

    const auto positives = std::count_if(dev.begin(), dev.end(), [&](const GoldRecord& r) { return r.agreed.count(label); });
    if (dev.size() < 6 || positives == 0 || positives == static_cast<long>(dev.size()))
        throw ValidationError("auto_optimize needs at least 6 dev records with both outcomes for " + label);

    PromptConfig bq;
    bq.task = Task::LabelWise;
    bq.format = PromptFormat::BinaryQuestion;

    DevEvaluation incumbent_eval = scorer(seed_prompt);
    out.history.seed_score = incumbent_eval.score;
    out.best_score = incumbent_eval.score;
    if (incumbent_eval.examples.empty()) {
        for (const auto& r : dev) incumbent_eval.examples.push_back({r.target, "", false, r.agreed.count(label) > 0});
    }

    const std::string full_template_user = load_template("user");
    for (int round = 1; round <= opt.rounds; ++round) {
        OptimizationRound rec;
        const std::string history_text = format_history(out.history);
        std::vector<DevEvaluation> evals;
        for (int v = 1; v <= opt.per_round; ++v) {
            Conversation conv;
            conv.messages.push_back(
                {Role::System, render_template(load_template("optimize_system"), {{"System_prompt", out.best_prompt}})});
            conv.messages.push_back(
                {Role::User, render_template(load_template("optimize_intro_user"),
                                             {{"Num_examples", std::to_string(incumbent_eval.examples.size())}})});
            conv.messages.push_back({Role::Assistant, load_template("optimize_intro_assistant")});
            conv.messages.push_back(
                {Role::User,
                 render_template(load_template("optimize_analysis_user"),
                                 {{"Curr_prompt", out.best_prompt},
                                  {"Full_template", out.best_prompt + "\n\n" + full_template_user},
                                  {"Examples", format_examples(incumbent_eval.examples, bq, cb, label)},
                                  {"History", history_text}})});
            const std::string analysis = gateway.complete(conv).text;
            conv.messages.push_back({Role::Assistant, analysis});
            conv.messages.push_back({Role::User, render_template(load_template("optimize_refine_user"),
                                                                 {{"Curr_prompt", out.best_prompt},
                                                                  {"History", history_text},
                                                                  {"Variant", std::to_string(v)},
                                                                  {"Num_variants", std::to_string(opt.per_round)}})});
            const std::string raw_candidate = gateway.complete(conv).text;
            conv.messages.push_back({Role::Assistant, raw_candidate});
            conv.messages.push_back({Role::User, render_template(load_template("optimize_summary_user"),
                                                                 {{"Step", std::to_string(round)}})});
            const std::string summary = truncate_words(gateway.complete(conv).text, opt.max_summary_words);

            const std::string candidate = unwrap_reply(raw_candidate);
            rec.candidates.push_back(candidate);
            rec.summaries.push_back(summary);
            if (candidate.empty()) {
                rec.flagged.push_back(true);
                rec.scores.push_back(0.0);
                evals.emplace_back();
                continue;
            }
            DevEvaluation e = scorer(candidate);
            ++out.history.candidate_evaluations;
            rec.flagged.push_back(false);
            rec.scores.push_back(e.score);
            evals.push_back(std::move(e));
        }
        rec.chosen = static_cast<std::size_t>(std::max_element(rec.scores.begin(), rec.scores.end()) -
                                              rec.scores.begin());
        if (!rec.flagged[rec.chosen] && rec.scores[rec.chosen] > out.best_score) {
            rec.adopted = true;
            out.best_prompt = rec.candidates[rec.chosen];
            out.best_score = rec.scores[rec.chosen];
            if (!evals[rec.chosen].examples.empty()) incumbent_eval = std::move(evals[rec.chosen]);
        }
        rec.incumbent_score = out.best_score;
        out.history.rounds.push_back(std::move(rec));
    }
    return out;
}

DevEvalSplit split_dev_eval(std::span<const GoldRecord> gold, const std::string& label, std::size_t n_dev,
                            std::uint64_t seed) {
    DevEvalSplit out;
    auto pos = stratum(gold, {}, [&](const GoldRecord& r) { return agreed_positive(r, label); });
    auto neg = stratum(gold, {}, [&](const GoldRecord& r) { return agreed_negative(r, label); });
    const std::size_t want_pos = n_dev / 2;
    const std::size_t want_neg = n_dev - want_pos;
    if (pos.size() < want_pos || neg.size() < want_neg) {
        out.warnings.push_back("label " + label + ": dev split is short (" + std::to_string(pos.size()) +
                               " positives, " + std::to_string(neg.size()) + " negatives available)");
    }
    std::set<std::string> dev_ids;
    for (auto i : draw(pos.size(), want_pos, Rng::derive(seed, 2))) dev_ids.insert(pos[i]->target.target_id);
    for (auto i : draw(neg.size(), want_neg, Rng::derive(seed, 3))) dev_ids.insert(neg[i]->target.target_id);
    for (const auto& r : gold) (dev_ids.count(r.target.target_id) ? out.dev : out.eval).push_back(r);
    return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string feedback_system(const PromptConfig& config, const Codebook& cb, const std::string* label) {
    auto joined = [&](const std::vector<CodebookLabel>& labels) {
        std::vector<std::string> parts;
        for (const auto& l : labels) parts.push_back(label_text(l, PromptContent::CodeAndDescription));
        return text::join(parts, "; ");
    };
    if (config.task == Task::Coarse) {
        return render_template(load_template("feedback_coarse_system"),
                               {{"IH_code", joined(cb.labels_of(Polarity::IH))},
                                {"IA_code", joined(cb.labels_of(Polarity::IA))}});
    }
    const std::string code =
        label ? label_text(cb.at(*label), PromptContent::CodeAndDescription) : joined(cb.labels());
    return render_template(load_template("feedback_label_system"), {{"Code", code}});
}

}  // namespace

RefinementTranscript self_refine(const AnnotationTarget& target, const PromptConfig& config, const Codebook& cb,
                                 const std::optional<std::string>& label, Gateway& gateway, int rounds,
                                 const FailurePolicy& policy, const PromptOptions& popt) {
    if (rounds < 1) throw ValidationError("self_refine needs at least one round");
    RefinementTranscript t;
    t.target_id = target.target_id;
    t.label = label;
    const std::string* lp = label ? &*label : nullptr;

    const Conversation base = decorate(build_prompt(target, config, cb, label, popt), Booster::CoT, config, cb);
    const std::string user_text = user_prompt(target, config, cb, lp);
    const std::string reconsider_system =
        system_prompt(config, cb, lp, popt) + "\n" + load_template("reconsider_cot_instruction");

    auto call = [&](const Conversation& conv) {
        ChatRequest req = gateway.make_request(conv);
        t.cache_keys.push_back(cache_key(req));
        return gateway.complete(req).text;
    };

    std::optional<Verdict> previous;
    std::string previous_text;
    for (int cycle = 0; cycle < rounds; ++cycle) {
        RefineCycle c;

        Conversation predict = base;
        if (cycle > 0) {
            predict.messages.push_back({Role::Assistant, previous_text});
            predict.messages.push_back({Role::User, load_template("refine_repredict_user")});
        }
        const std::string predicted_text = call(predict);
        try {
            c.prediction = parse_verdict(predicted_text, config, cb);
        } catch (const UnparseableError&) {
            c.prediction = previous ? *previous : fallback_verdict(config, policy);
            c.prediction.raw_text = predicted_text;
            t.flagged = true;
            t.notes.push_back("cycle " + std::to_string(cycle + 1) + ": prediction unparseable");
        }

        Conversation feedback;
        feedback.messages.push_back({Role::System, feedback_system(config, cb, lp)});
        feedback.messages.push_back(
            {Role::User, render_template(load_template("feedback_user"),
                                         {{"User_prompt", user_text}, {"Prediction", text::trim(predicted_text)}})});
        c.feedback = call(feedback);

        Conversation reconsider;
        reconsider.messages.push_back({Role::System, reconsider_system});
        reconsider.messages.push_back({Role::User, reconsider_prompt(target, config, cb, lp, c.feedback)});
        const std::string reconsidered_text = call(reconsider);
        try {
            c.reconsidered = parse_verdict(reconsidered_text, config, cb);
        } catch (const UnparseableError&) {
            c.reconsidered = c.prediction;
            c.reconsidered.raw_text = reconsidered_text;
            c.reconsider_unparseable = true;
            t.flagged = true;
            t.notes.push_back("cycle " + std::to_string(cycle + 1) + ": reconsidered verdict unparseable");
        }
        previous = c.reconsidered;
        previous_text = reconsidered_text;
        t.cycles.push_back(std::move(c));
    }
    t.final = t.cycles.back().reconsidered;
    return t;
}

// ---------------------------------------------------------------------------

namespace {

std::optional<SyntheticSample> parse_generated(const std::string& reply, const std::string& label) {
    const std::size_t title = text::rfind_ci(reply, "post title:");
    const std::size_t content = text::rfind_ci(reply, "content:");
    const std::size_t comment = text::rfind_ci(reply, "target comment:");
    if (title == std::string::npos || content == std::string::npos || comment == std::string::npos) return {};
    if (!(title < content && content < comment)) return {};
    SyntheticSample s;
    s.label = label;
    s.title = text::trim(reply.substr(title + 11, content - title - 11));
    s.content = text::trim(reply.substr(content + 8, comment - content - 8));
    s.target_comment = text::trim(reply.substr(comment + 15));
    if (s.title.empty() || s.target_comment.empty()) return {};
    return s;
}

}  // namespace

GenerationResult generate_samples(const std::string& label, std::span<const AnnotationTarget> exemplars,
                                  Gateway& gateway, const Codebook& cb, int n) {
    if (n < 0) throw ValidationError("generate_samples: n must be non-negative");
    GenerationResult out;
    if (n == 0) return out;
    if (exemplars.size() < 3) throw ValidationError("generate_samples needs 3 exemplars for " + label);
    const auto& l = cb.at(label);

    std::vector<std::string> shown;
    for (std::size_t i = 0; i < 3; ++i) {
        shown.push_back(render_template(load_template("generate_example"),
                                        {{"Index", std::to_string(i + 1)},
                                         {"Post_title", exemplars[i].title},
                                         {"Post_content", exemplars[i].submission_text},
                                         {"Focal_comment", exemplars[i].target_text}}));
    }
    const std::string system =
        render_template(load_template("generate_system"), {{"Code", label_text(l, PromptContent::CodeAndDescription)}});
    for (int i = 1; i <= n; ++i) {
        Conversation conv;
        conv.messages.push_back({Role::System, system});
        conv.messages.push_back({Role::User, render_template(load_template("generate_user"),
                                                             {{"Num_examples", "3"},
                                                              {"Label", l.name},
                                                              {"Examples", text::join(shown, "\n\n")},
                                                              {"Request", std::to_string(i)},
                                                              {"Total", std::to_string(n)}})});
        const std::string reply = gateway.complete(conv).text;
        if (auto s = parse_generated(reply, label)) {
            out.samples.push_back(std::move(*s));
        } else {
            ++out.shortfall;
            out.warnings.push_back("request " + std::to_string(i) + ": reply did not follow the sample format");
        }
    }
    return out;
}

json history_to_json(const OptimizationHistory& h) {
    json rounds = json::array();
    for (std::size_t i = 0; i < h.rounds.size(); ++i) {
        const auto& r = h.rounds[i];
        rounds.push_back({{"round", i + 1},
                          {"candidates", r.candidates},
                          {"scores", r.scores},
                          {"summaries", r.summaries},
                          {"flagged", r.flagged},
                          {"chosen", r.chosen},
                          {"adopted", r.adopted},
                          {"incumbent_score", r.incumbent_score}});
    }
    return {{"label", h.label},
            {"seed_prompt", h.seed_prompt},
            {"seed_score", h.seed_score},
            {"candidate_evaluations", h.candidate_evaluations},
            {"rounds", rounds}};
}

json transcript_to_json(const RefinementTranscript& t) {
    json cycles = json::array();
    for (const auto& c : t.cycles) {
        cycles.push_back({{"prediction", verdict_to_json(c.prediction)},
                          {"feedback", c.feedback},
                          {"reconsidered", verdict_to_json(c.reconsidered)},
                          {"reconsider_unparseable", c.reconsider_unparseable}});
    }
    return {{"target_id", t.target_id},
            {"label", t.label ? json(*t.label) : json(nullptr)},
            {"cycles", cycles},
            {"final", verdict_to_json(t.final)},
            {"flagged", t.flagged},
            {"cache_keys", t.cache_keys},
            {"notes", t.notes}};
}

json sample_to_json(const SyntheticSample& s) {
    return {{"label", s.label},
            {"title", s.title},
            {"content", s.content},
            {"target_comment", s.target_comment},
            {"synthetic", s.synthetic}};
}

}  // namespace humbench

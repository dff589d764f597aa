#include "humbench/runner.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "humbench/error.hpp"
#include "humbench/sha256.hpp"
#include "humbench/text.hpp"

namespace humbench {

using nlohmann::json;

std::string_view to_string(GoldRule r) {
    switch (r) {
        case GoldRule::Intersection: return "intersection";
        case GoldRule::Union: return "union";
        case GoldRule::PerAnnotatorMean: return "per-annotator-mean";
    }
    return "?";
}

GoldRule parse_gold_rule(std::string_view s) {
    const std::string v = text::to_lower(s);
    if (v == "intersection" || v == "agreed") return GoldRule::Intersection;
    if (v == "union") return GoldRule::Union;
    if (v == "per-annotator-mean" || v == "mean") return GoldRule::PerAnnotatorMean;
    throw ValidationError("unknown gold rule '" + std::string(s) + "'");
}

void ExperimentConfig::validate() const {
    prompt.validate();
    if (model_id.empty()) throw ValidationError("experiment config needs a model_id");
    if (mode != GatewayMode::Live && cache.empty())
        throw ValidationError(std::string(to_string(mode)) + " mode needs a cache path");
    if (max_in_flight == 0) throw ValidationError("max_in_flight must be at least 1");
    const bool bq = prompt.task == Task::LabelWise && prompt.format == PromptFormat::BinaryQuestion;
    if ((booster == Booster::FewShot || booster == Booster::FewShotCoT || booster == Booster::AutoOptimize) && !bq)
        throw ValidationError(std::string(to_string(booster)) + " needs a label-wise binary-question prompt");
    if (booster == Booster::AutoOptimize && optimized_prompts.empty())
        throw ValidationError("auto-optimize runs need an optimized_prompts file");
    if (booster == Booster::SelfRefine && refine_rounds < 1) throw ValidationError("refine_rounds must be >= 1");
    if ((booster == Booster::FewShot || booster == Booster::FewShotCoT) && shots == 0)
        throw ValidationError("few-shot runs need at least one shot");
}

json config_to_json(const ExperimentConfig& c) {
    return {{"dataset", c.dataset.string()},
            {"codebook", c.codebook.string()},
            {"model_id", c.model_id},
            {"prompt",
             {{"content", std::string(short_name(c.prompt.content))},
              {"format", std::string(short_name(c.prompt.format))},
              {"task", c.prompt.task == Task::Coarse ? "coarse" : "label-wise"}}},
            {"booster", std::string(to_string(c.booster))},
            {"refine_rounds", c.refine_rounds},
            {"shots", c.shots},
            {"optimized_prompts", c.optimized_prompts.string()},
            {"mode", std::string(to_string(c.mode))},
            {"cache", c.cache.string()},
            {"seed", c.seed},
            {"shuffle_labels_seed", c.shuffle_labels_seed ? json(*c.shuffle_labels_seed) : json(nullptr)},
            {"failure",
             {{"binary", c.failure.binary_fallback ? "yes" : "no"},
              {"coarse", std::string(to_string(c.failure.coarse_fallback))}}},
            {"max_in_flight", c.max_in_flight},
            {"output_dir", c.output_dir.string()}};
}

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
    static const std::set<std::string> known = {"dataset", "codebook",  "model_id",          "prompt",
                                                "booster", "refine_rounds", "shots",         "optimized_prompts",
                                                "mode",    "cache",     "seed",              "shuffle_labels_seed",
                                                "failure", "max_in_flight", "output_dir"};
    for (const auto& [k, v] : j.items()) {
        if (!known.count(k)) throw ValidationError("unknown experiment config key '" + k + "'");
    }
    auto path = [&](const char* key) {
        std::filesystem::path p = j.value(key, std::string());
        if (!p.empty() && p.is_relative() && !base_dir.empty()) p = base_dir / p;
        return p;
    };
    ExperimentConfig c;
    c.dataset = path("dataset");
    c.codebook = path("codebook");
    c.model_id = j.value("model_id", std::string());
    if (auto p = j.find("prompt"); p != j.end()) {
        c.prompt.content = parse_content(p->value("content", std::string("C&D")));
        c.prompt.format = parse_format(p->value("format", std::string("BQ")));
        c.prompt.task = parse_task(p->value("task", std::string("label-wise")));
    }
    c.booster = parse_booster(j.value("booster", std::string("none")));
    c.refine_rounds = j.value("refine_rounds", 2);
    c.shots = j.value("shots", std::size_t{3});
    c.optimized_prompts = path("optimized_prompts");
    c.mode = parse_gateway_mode(j.value("mode", std::string("replay")));
    c.cache = path("cache");
    c.seed = j.value("seed", std::uint64_t{0});
    if (auto s = j.find("shuffle_labels_seed"); s != j.end() && !s->is_null()) c.shuffle_labels_seed = s->get<std::uint64_t>();
    if (auto f = j.find("failure"); f != j.end()) {
        c.failure.binary_fallback = text::to_lower(f->value("binary", std::string("no"))) == "yes";
        c.failure.coarse_fallback = parse_coarse_name(f->value("coarse", std::string("Neutral")));
    }
    c.max_in_flight = j.value("max_in_flight", std::size_t{4});
    c.output_dir = path("output_dir");
    return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read experiment config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return config_from_json(j, path.parent_path());
}

std::size_t calls_per_target(const ExperimentConfig& c, const Codebook& cb) {
    std::size_t base = (c.prompt.task == Task::LabelWise && c.prompt.format == PromptFormat::BinaryQuestion)
                           ? cb.size()
                           : 1;
    if (c.booster == Booster::SelfRefine) base *= 3 * static_cast<std::size_t>(c.refine_rounds);
    return base;
}

std::string config_hash(const ExperimentConfig& c, const std::string& dataset_digest, const Codebook& cb) {
    json j = {{"model_id", c.model_id},
              {"prompt", config_name(c.prompt)},
              {"booster", std::string(to_string(c.booster))},
              {"refine_rounds", c.booster == Booster::SelfRefine ? c.refine_rounds : 0},
              {"shots", (c.booster == Booster::FewShot || c.booster == Booster::FewShotCoT) ? c.shots : 0},
              {"optimized_prompts", file_digest(c.optimized_prompts)},
              {"seed", c.seed},
              {"shuffle_labels_seed", c.shuffle_labels_seed ? json(*c.shuffle_labels_seed) : json(nullptr)},
              {"failure", {c.failure.binary_fallback, std::string(to_string(c.failure.coarse_fallback))}},
              {"dataset", dataset_digest},
              {"codebook", sha256_hex(codebook_to_yaml(cb))}};
    return sha256_hex(j.dump());
}

namespace {

std::map<std::string, std::string> load_optimized_prompts(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read optimized prompts " + path.string());
    json j = json::parse(in);
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : j.items()) out[k] = v.get<std::string>();
    return out;
}

ItemResult from_classification(std::string label, Classification c) {
    ItemResult r;
    r.label = std::move(label);
    r.verdict = std::move(c.verdict);
    r.cache_keys = std::move(c.cache_keys);
    r.unparseable = c.unparseable;
    r.failed = c.failed;
    r.error = std::move(c.error);
    return r;
}

struct RunContext {
    const ExperimentConfig& config;
    Gateway& gateway;
    const Codebook& cb;
    PromptOptions popt;
    std::map<std::string, ExemplarSet> exemplars;
    std::map<std::string, std::string> optimized;
};

ItemResult run_item(const RunContext& ctx, const AnnotationTarget& target, const std::optional<std::string>& label) {
    const auto& cfg = ctx.config;
    if (cfg.booster == Booster::SelfRefine) {
        try {
            auto t = self_refine(target, cfg.prompt, ctx.cb, label, ctx.gateway, cfg.refine_rounds, cfg.failure, ctx.popt);
            ItemResult r;
            r.label = label.value_or("");
            r.verdict = t.final;
            r.cache_keys = t.cache_keys;
            r.unparseable = t.flagged;
            r.transcript = transcript_to_json(t);
            return r;
        } catch (const TransportError& e) {
            ItemResult r;
            r.label = label.value_or("");
            r.verdict = fallback_verdict(cfg.prompt, cfg.failure);
            r.failed = true;
            r.error = e.what();
            return r;
        }
    }
    Conversation conv = build_prompt(target, cfg.prompt, ctx.cb, label, ctx.popt);
    if (cfg.booster == Booster::AutoOptimize && label) {
        if (auto it = ctx.optimized.find(*label); it != ctx.optimized.end()) conv.system().content = it->second;
    }
    const ExemplarSet* ex = nullptr;
    if (label) {
        if (auto it = ctx.exemplars.find(*label); it != ctx.exemplars.end()) ex = &it->second;
    }
    conv = decorate(conv, cfg.booster, cfg.prompt, ctx.cb, ex);
    return from_classification(label.value_or(""), classify(ctx.gateway, conv, cfg.prompt, ctx.cb, cfg.failure));
}

TargetResult run_target(const RunContext& ctx, const AnnotationTarget& target) {
    TargetResult out;
    out.target_id = target.target_id;
    const auto& p = ctx.config.prompt;
    if (p.task == Task::LabelWise && p.format == PromptFormat::BinaryQuestion) {
        for (const auto& l : ctx.cb.labels()) {
            ItemResult r = run_item(ctx, target, l.abbrev);
            if (verdict_has_label(r.verdict, l.abbrev)) out.predicted_labels.insert(l.abbrev);
            out.items.push_back(std::move(r));
        }
        out.predicted_coarse = aggregate_coarse(out.predicted_labels, ctx.cb);
    } else {
        ItemResult r = run_item(ctx, target, std::nullopt);
        if (p.task == Task::Coarse) {
            out.predicted_coarse = std::get<Verdict::CoarseVerdict>(r.verdict.kind).value;
        } else {
            out.predicted_labels = std::get<Verdict::Labels>(r.verdict.kind).value;
            out.predicted_coarse = aggregate_coarse(out.predicted_labels, ctx.cb);
        }
        out.items.push_back(std::move(r));
    }
    return out;
}

std::string gold_digest(std::span<const GoldRecord> gold) {
    std::string all;
    for (const auto& r : gold) all += gold_to_json(r).dump() + "\n";
    return sha256_hex(all);
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, Gateway& gateway, std::span<const GoldRecord> gold,
                         const Codebook& cb) {
    config.validate();
    if (gold.empty()) throw ValidationError("run_experiment: no gold records");
    RunContext ctx{config, gateway, cb, PromptOptions{config.shuffle_labels_seed}, {}, {}};
    RunResult out;

    std::set<std::string> held_out;
    if (config.booster == Booster::FewShot || config.booster == Booster::FewShotCoT) {
        for (const auto& l : cb.labels()) {
            auto ex = select_exemplars(gold, l.abbrev, config.shots, config.shots, config.seed);
            for (const auto& w : ex.warnings) out.warnings.push_back(w);
            for (const auto& id : ex.target_ids()) held_out.insert(id);
            ctx.exemplars.emplace(l.abbrev, std::move(ex));
        }
    }
    if (config.booster == Booster::AutoOptimize) {
        ctx.optimized = load_optimized_prompts(config.optimized_prompts);
        for (const auto& l : cb.labels()) {
            if (!ctx.optimized.count(l.abbrev))
                out.warnings.push_back("no optimized prompt for " + l.abbrev + "; using the base prompt");
        }
    }
    out.exemplar_ids.assign(held_out.begin(), held_out.end());

    std::vector<const GoldRecord*> work;
    for (const auto& r : gold) {
        if (!held_out.count(r.target.target_id)) work.push_back(&r);
    }
    out.targets.resize(work.size());

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next++;
            if (i >= work.size()) return;
            try {
                out.targets[i] = run_target(ctx, work[i]->target);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = work.size();
                return;
            }
        }
    };
    const std::size_t n_threads = std::max<std::size_t>(1, std::min(config.max_in_flight, work.size()));
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);

    for (const auto& t : out.targets) {
        for (const auto& item : t.items) {
            out.gateway_calls += item.cache_keys.size();
            out.failures += item.failed ? 1 : 0;
            out.unparseable += item.unparseable ? 1 : 0;
        }
    }
    const std::string dataset_digest = gold_digest(gold);
    out.provenance = {{"config_hash", config_hash(config, dataset_digest, cb)},
                      {"cache_digest", file_digest(gateway.config().cache_path)},
                      {"dataset_digest", dataset_digest},
                      {"codebook_version", cb.version()},
                      {"prompt", config_name(config.prompt)},
                      {"model", config.model_id},
                      {"booster", std::string(to_string(config.booster))},
                      {"gold_records", gold.size()},
                      {"calls_per_target", calls_per_target(config, cb)}};
    return out;
}

RunResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    const Codebook cb = config.codebook.empty() ? default_codebook() : load_codebook(config.codebook);
    const GoldSet gold = load_gold(config.dataset, cb);
    GatewayConfig gc;
    gc.model_id = config.model_id;
    gc.mode = config.mode;
    gc.cache_path = config.cache;
    gc.max_in_flight = config.max_in_flight;
    gc.jitter_seed = config.seed;
    std::shared_ptr<Transport> transport;
    if (config.mode != GatewayMode::Replay) transport = make_http_transport(HttpTransportConfig::from_env());
    Gateway gateway(gc, transport);
    RunResult r = run_experiment(config, gateway, gold.records, cb);
    for (const auto& w : gold.warnings) r.warnings.push_back(w);
    return r;
}

json run_to_json(const RunResult& r) {
    json targets = json::array();
    for (const auto& t : r.targets) {
        json items = json::array();
        for (const auto& i : t.items) {
            json ij = {{"label", i.label},
                       {"verdict", verdict_to_json(i.verdict)},
                       {"cache_keys", i.cache_keys},
                       {"unparseable", i.unparseable},
                       {"failed", i.failed},
                       {"error", i.error}};
            if (i.transcript) ij["transcript"] = *i.transcript;
            items.push_back(std::move(ij));
        }
        targets.push_back({{"target_id", t.target_id},
                           {"predicted_labels", t.predicted_labels},
                           {"predicted_coarse", std::string(to_string(t.predicted_coarse.value))},
                           {"tie_flag", t.predicted_coarse.tie_flag},
                           {"items", std::move(items)}});
    }
    return {{"provenance", r.provenance},
            {"gateway_calls", r.gateway_calls},
            {"failures", r.failures},
            {"unparseable", r.unparseable},
            {"exemplar_ids", r.exemplar_ids},
            {"warnings", r.warnings},
            {"targets", std::move(targets)}};
}

RunResult run_from_json(const json& j) {
    RunResult r;
    r.provenance = j.at("provenance");
    r.gateway_calls = j.value("gateway_calls", std::size_t{0});
    r.failures = j.value("failures", std::size_t{0});
    r.unparseable = j.value("unparseable", std::size_t{0});
    r.exemplar_ids = j.value("exemplar_ids", std::vector<std::string>{});
    r.warnings = j.value("warnings", std::vector<std::string>{});
    for (const auto& tj : j.at("targets")) {
        TargetResult t;
        t.target_id = tj.at("target_id").get<std::string>();
        t.predicted_labels = tj.value("predicted_labels", LabelSet{});
        t.predicted_coarse = {parse_coarse_name(tj.at("predicted_coarse").get<std::string>()), tj.value("tie_flag", false)};
        for (const auto& ij : tj.at("items")) {
            ItemResult i;
            i.label = ij.value("label", std::string());
            i.verdict = verdict_from_json(ij.at("verdict"));
            i.cache_keys = ij.value("cache_keys", std::vector<std::string>{});
            i.unparseable = ij.value("unparseable", false);
            i.failed = ij.value("failed", false);
            i.error = ij.value("error", std::string());
            if (ij.contains("transcript")) i.transcript = ij["transcript"];
            t.items.push_back(std::move(i));
        }
        r.targets.push_back(std::move(t));
    }
    return r;
}

void write_run(const RunResult& r, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write run file " + path.string());
    out << run_to_json(r).dump(2) << '\n';
}

RunResult load_run(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read run file " + path.string());
    return run_from_json(json::parse(in));
}

}  // namespace humbench

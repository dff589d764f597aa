#include <algorithm>
#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "humbench/annotation_service.hpp"
#include "humbench/boosters.hpp"
#include "humbench/classical.hpp"
#include "humbench/codebook.hpp"
#include "humbench/corpus.hpp"
#include "humbench/error.hpp"
#include "humbench/gateway.hpp"
#include "humbench/gold.hpp"
#include "humbench/metrics.hpp"
#include "humbench/runner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace humbench;

namespace {

Codebook load_codebook_or_default(const fs::path& path) {
    return path.empty() ? default_codebook() : load_codebook(path);
}

GoldSet load_dataset(const fs::path& path, const Codebook& cb, bool warn_only) {
    GoldOptions opt;
    opt.integrity = warn_only ? IntegrityMode::Warn : IntegrityMode::Strict;
    GoldSet set = load_gold(path, cb, opt);
    for (const auto& w : set.warnings) std::cerr << "warning: " << w << '\n';
    return set;
}

void write_text(const fs::path& path, const std::string& body) {
    if (path.empty() || path == "-") {
        std::cout << body;
        return;
    }
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << body;
}

void write_jsonl(const fs::path& path, const std::vector<json>& rows) {
    std::string body;
    for (const auto& r : rows) body += r.dump() + '\n';
    write_text(path, body);
}

struct GatewayFlags {
    std::string model;
    std::string mode = "replay";
    fs::path cache;
    std::size_t max_in_flight = 4;

    void add(CLI::App* app) {
        app->add_option("--model", model, "Model identifier")->required();
        app->add_option("--mode", mode, "live, record or replay")->capture_default_str();
        app->add_option("--cache", cache, "Response cache (JSONL)");
        app->add_option("--max-in-flight", max_in_flight, "Concurrent requests")->capture_default_str();
    }

    std::unique_ptr<Gateway> make() const {
        GatewayConfig cfg;
        cfg.model_id = model;
        cfg.mode = parse_gateway_mode(mode);
        cfg.cache_path = cache;
        cfg.max_in_flight = max_in_flight;
        std::shared_ptr<Transport> transport;
        if (cfg.mode != GatewayMode::Replay) transport = make_http_transport(HttpTransportConfig::from_env());
        return std::make_unique<Gateway>(cfg, transport);
    }
};

PromptConfig prompt_from_flags(const std::string& content, const std::string& format, const std::string& task) {
    PromptConfig c;
    c.content = parse_content(content);
    c.format = parse_format(format);
    c.task = parse_task(task);
    c.validate();
    return c;
}

const GoldRecord& find_record(const GoldSet& set, const std::string& id) {
    for (const auto& r : set.records) {
        if (r.target.target_id == id) return r;
    }
    throw NotFound("no target '" + id + "' in the dataset");
}

annotation::AnnotationServer* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"humbench: intellectual humility / arrogance detection workbench"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "humbench 0.3.0");

    fs::path codebook_path;
    bool warn_integrity = false;
    app.add_option("--codebook", codebook_path, "Codebook YAML (default: built-in)");
    app.add_flag("--warn-integrity", warn_integrity, "Warn instead of failing on stored coarse-class mismatches");

    // --- corpus ---------------------------------------------------------
    auto* ingest = app.add_subcommand("ingest", "Parse a line-delimited thread dump");
    fs::path dump, threads_out;
    ingest->add_option("--dump", dump, "Thread dump (JSONL)")->required()->check(CLI::ExistingFile);
    ingest->add_option("--out", threads_out, "Normalized threads (JSONL)")->required();

    auto* sample = app.add_subcommand("sample", "Apply the activity cap and per-subreddit quota");
    fs::path sample_in, activity_path, sample_out;
    SampleOptions sample_opt;
    sample->add_option("--threads", sample_in)->required()->check(CLI::ExistingFile);
    sample->add_option("--activity", activity_path, "author,subreddit,count table")->required()->check(CLI::ExistingFile);
    sample->add_option("--max-posts", sample_opt.max_posts_per_subreddit)->capture_default_str();
    sample->add_option("--activity-cap", sample_opt.activity_cap)->capture_default_str();
    sample->add_option("--seed", sample_opt.seed)->capture_default_str();
    sample->add_option("--out", sample_out)->required();

    auto* targets = app.add_subcommand("targets", "Pick a first or second comment per sampled thread");
    fs::path targets_in, targets_out;
    TargetOptions target_opt;
    targets->add_option("--threads", targets_in)->required()->check(CLI::ExistingFile);
    targets->add_option("--max-per-subreddit", target_opt.max_per_subreddit)->capture_default_str();
    targets->add_option("--seed", target_opt.seed)->capture_default_str();
    targets->add_option("--out", targets_out)->required();

    auto* describe_cmd = app.add_subcommand("describe", "Descriptive statistics of a dataset");
    fs::path dataset;
    describe_cmd->add_option("--dataset", dataset)->required()->check(CLI::ExistingFile);

    // --- codebook & agreement -------------------------------------------
    auto* codebook_cmd = app.add_subcommand("codebook", "Print the codebook as YAML");

    auto* revise = app.add_subcommand("revise", "Apply codebook revisions and emit the remap table");
    fs::path revisions_path, revise_out, remap_out;
    revise->add_option("--revisions", revisions_path, "JSON array of revisions")->required()->check(CLI::ExistingFile);
    revise->add_option("--out", revise_out, "Revised codebook YAML")->required();
    revise->add_option("--remap", remap_out, "Remap table (TSV)");

    auto* agreement = app.add_subcommand("agreement", "Per-label Cohen's kappa between the two annotators");
    agreement->add_option("--dataset", dataset)->required()->check(CLI::ExistingFile);

    // --- scoring ----------------------------------------------------------
    std::string rule = "intersection", format = "markdown";
    std::size_t trials = 10000;
    std::uint64_t baseline_seed = 0;
    fs::path out_path;
    auto add_score_flags = [&](CLI::App* cmd) {
        cmd->add_option("--rule", rule, "intersection, union or per-annotator-mean")->capture_default_str();
        cmd->add_option("--trials", trials, "Monte-Carlo trials for the distribution baseline")->capture_default_str();
        cmd->add_option("--baseline-seed", baseline_seed)->capture_default_str();
        cmd->add_option("--format", format, "json, csv or markdown")->capture_default_str();
        cmd->add_option("--out", out_path, "Output file (default: stdout)");
    };

    auto* baseline = app.add_subcommand("baseline", "Distribution baseline and mutual upper bound rows");
    baseline->add_option("--dataset", dataset)->required()->check(CLI::ExistingFile);
    add_score_flags(baseline);

    auto* dist = app.add_subcommand("distribution-baseline", "Distribution baseline for explicit class counts");
    std::vector<std::size_t> counts;
    dist->add_option("--counts", counts, "Class counts, e.g. 134,60,156")->required()->delimiter(',');
    dist->add_option("--trials", trials)->capture_default_str();
    dist->add_option("--seed", baseline_seed)->capture_default_str();

    auto* score = app.add_subcommand("score", "Score a run against the dataset");
    fs::path run_path;
    score->add_option("--run", run_path)->required()->check(CLI::ExistingFile);
    score->add_option("--dataset", dataset)->required()->check(CLI::ExistingFile);
    add_score_flags(score);

    auto* report = app.add_subcommand("report", "Merge scored reports into one table");
    std::vector<fs::path> report_inputs;
    report->add_option("inputs", report_inputs, "Report JSON files")->required()->check(CLI::ExistingFile);
    report->add_option("--format", format)->capture_default_str();
    report->add_option("--out", out_path);

    // --- classification ---------------------------------------------------
    auto* run = app.add_subcommand("run", "Run an experiment config through the gateway");
    fs::path config_path;
    run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_path, "Run output (default: <output_dir>/run.json)");
    bool run_and_score = false;
    run->add_flag("--score", run_and_score, "Also write report.{json,csv,md} next to the run output");

    GatewayFlags gw;
    std::string content = "C&D", prompt_format = "BQ", task = "label-wise", label;
    std::uint64_t seed = 0;

    auto* optimize = app.add_subcommand("optimize", "Automatic prompt optimization for one label");
    OptimizeOptions opt_opt;
    std::size_t n_dev = 20;
    fs::path history_out;
    gw.add(optimize);
    optimize->add_option("--dataset", dataset)->required()->check(CLI::ExistingFile);
    optimize->add_option("--label", label)->required();
    optimize->add_option("--rounds", opt_opt.rounds)->capture_default_str();
    optimize->add_option("--per-round", opt_opt.per_round)->capture_default_str();
    optimize->add_option("--n-dev", n_dev, "Dev examples (half positive)")->capture_default_str();
    optimize->add_option("--seed", seed)->capture_default_str();
    optimize->add_option("--out", out_path, "JSON {label: prompt}, merged if it exists")->required();
    optimize->add_option("--history", history_out, "Optimization history (JSON)");

    auto* refine = app.add_subcommand("refine", "Self-refinement for one target");
    int refine_rounds = 2;
    std::string target_id;
    gw.add(refine);
    refine->add_option("--dataset", dataset)->required()->check(CLI::ExistingFile);
    refine->add_option("--target", target_id)->required();
    refine->add_option("--label", label, "Label for binary-question configs");
    refine->add_option("--content", content)->capture_default_str();
    refine->add_option("--format", prompt_format)->capture_default_str();
    refine->add_option("--task", task)->capture_default_str();
    refine->add_option("--rounds", refine_rounds)->capture_default_str();

    auto* generate = app.add_subcommand("generate", "Few-shot generation of synthetic samples for a label");
    int n_samples = 10;
    gw.add(generate);
    generate->add_option("--dataset", dataset)->required()->check(CLI::ExistingFile);
    generate->add_option("--label", label)->required();
    generate->add_option("-n,--count", n_samples)->capture_default_str();
    generate->add_option("--seed", seed)->capture_default_str();
    generate->add_option("--out", out_path, "Samples (JSONL)");

    // --- classical baselines ----------------------------------------------
    std::string features = "tfidf";
    bool with_context = false;
    auto* cv = app.add_subcommand("baseline-cv", "Cross-validated logistic regression on coarse classes");
    std::size_t folds = 5;
    double lambda = 1.0;
    cv->add_option("--dataset", dataset)->required()->check(CLI::ExistingFile);
    cv->add_option("--features", features, "tfidf or bow")->capture_default_str();
    cv->add_option("--folds", folds)->capture_default_str();
    cv->add_option("--seed", seed)->capture_default_str();
    cv->add_option("--lambda", lambda, "L2 strength (1 mirrors C=1)")->capture_default_str();
    cv->add_flag("--with-context", with_context, "Prepend thread context to the target comment");

    auto* top = app.add_subcommand("top-words", "Most indicative words per coarse class");
    std::size_t top_k = 5;
    fs::path model_out;
    top->add_option("--dataset", dataset)->required()->check(CLI::ExistingFile);
    top->add_option("--features", features)->capture_default_str();
    top->add_option("-k", top_k)->capture_default_str();
    top->add_option("--lambda", lambda)->capture_default_str();
    top->add_flag("--with-context", with_context);
    top->add_option("--save-model", model_out, "Write the fitted model");

    // --- annotation service -----------------------------------------------
    auto* serve = app.add_subcommand("serve", "Run the annotation service");
    fs::path serve_targets, event_log, static_dir;
    annotation::ServerOptions server_opt = annotation::server_options_from_env();
    std::size_t snapshot_every = 500, min_wave = 1, max_wave = 1000;
    auto* serve_src = serve->add_option("--targets", serve_targets, "Targets (JSONL)")->check(CLI::ExistingFile);
    serve->add_option("--dataset", dataset, "Serve the targets of a dataset instead")
        ->check(CLI::ExistingFile)
        ->excludes(serve_src);
    serve->add_option("--log", event_log, "Event log (JSONL)")->required();
    serve->add_option("--host", server_opt.host)->capture_default_str();
    serve->add_option("--port", server_opt.port)->capture_default_str();
    serve->add_option("--token", server_opt.token, "Shared X-Auth-Token");
    serve->add_option("--static", static_dir, "Console bundle directory");
    serve->add_option("--snapshot-every", snapshot_every)->capture_default_str();
    serve->add_option("--min-wave", min_wave)->capture_default_str();
    serve->add_option("--max-wave", max_wave)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        const Codebook cb = load_codebook_or_default(codebook_path);
        auto score_opt = [&] {
            ScoreOptions o;
            o.rule = parse_gold_rule(rule);
            o.baseline_trials = trials;
            o.baseline_seed = baseline_seed;
            return o;
        };

        if (*ingest) {
            auto store = ingest_dump(dump);
            for (const auto& w : store.warnings) std::cerr << "warning: " << w << '\n';
            write_threads(store, threads_out);
            std::cout << "threads: " << store.size() << ", skipped lines: " << store.skipped << '\n';
        } else if (*sample) {
            ThreadStore store = ingest_dump(sample_in);
            auto kept = sample_threads(store, load_activity(activity_path), sample_opt);
            write_threads(kept, sample_out);
            std::cout << "kept " << kept.size() << " of " << store.size() << " threads\n";
        } else if (*targets) {
            auto built = build_targets(ingest_dump(targets_in), target_opt);
            for (const auto& w : built.warnings) std::cerr << "warning: " << w << '\n';
            write_targets(built.targets, targets_out);
            std::cout << "targets: " << built.targets.size() << '\n';
        } else if (*describe_cmd) {
            auto set = load_dataset(dataset, cb, warn_integrity);
            std::cout << stats_to_json(describe(set.records)).dump(2) << '\n';
        } else if (*codebook_cmd) {
            std::cout << codebook_to_yaml(cb);
        } else if (*revise) {
            std::ifstream in(revisions_path);
            std::vector<Revision> revs;
            for (const auto& r : json::parse(in)) revs.push_back(annotation::revision_from_json(r));
            auto result = apply_revisions(cb, revs);
            save_codebook(result.codebook, revise_out);
            if (!remap_out.empty()) write_remap(result.remap, remap_out);
            std::cout << "codebook version " << result.codebook.version() << " with " << result.codebook.size()
                      << " labels\n";
        } else if (*agreement) {
            auto set = load_dataset(dataset, cb, warn_integrity);
            std::cout << annotation::stats_to_json(annotation::replay_as_wave(set.records, cb)).dump(2) << '\n';
        } else if (*baseline) {
            auto set = load_dataset(dataset, cb, warn_integrity);
            std::vector<MetricReport> reports{reference_rows(set.records, cb, score_opt())};
            write_text(out_path, emit_report(reports, parse_report_format(format)));
        } else if (*dist) {
            auto est = metrics::distribution_baseline(counts, trials, baseline_seed);
            std::cout << json{{"mean", est.mean}, {"std_error", est.std_error}, {"trials", est.trials}}.dump(2)
                      << '\n';
        } else if (*score) {
            auto set = load_dataset(dataset, cb, warn_integrity);
            std::vector<MetricReport> reports{score_run(load_run(run_path), set.records, cb, score_opt())};
            write_text(out_path, emit_report(reports, parse_report_format(format)));
        } else if (*report) {
            std::vector<MetricReport> reports;
            for (const auto& p : report_inputs) {
                for (auto& r : load_reports(p)) reports.push_back(std::move(r));
            }
            write_text(out_path, emit_report(reports, parse_report_format(format)));
        } else if (*run) {
            const auto config = load_experiment_config(config_path);
            auto result = run_experiment(config);
            for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
            const fs::path dir = config.output_dir.empty() ? fs::path(".") : config.output_dir;
            const fs::path target = out_path.empty() ? dir / "run.json" : out_path;
            write_run(result, target);
            std::cout << "targets: " << result.targets.size() << ", gateway calls: " << result.gateway_calls
                      << ", unparseable: " << result.unparseable << ", failures: " << result.failures << '\n';
            if (run_and_score) {
                const Codebook run_cb = load_codebook_or_default(config.codebook);
                auto set = load_dataset(config.dataset, run_cb, warn_integrity);
                std::vector<MetricReport> reports{score_run(result, set.records, run_cb, score_opt())};
                const fs::path report_dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
                write_report(reports, ReportFormat::Json, report_dir / "report.json");
                write_report(reports, ReportFormat::Csv, report_dir / "report.csv");
                write_report(reports, ReportFormat::Markdown, report_dir / "report.md");
            }
        } else if (*optimize) {
            auto set = load_dataset(dataset, cb, warn_integrity);
            cb.at(label);
            auto split = split_dev_eval(set.records, label, n_dev, seed);
            for (const auto& w : split.warnings) std::cerr << "warning: " << w << '\n';
            auto gateway = gw.make();
            PromptConfig bq;
            const std::string seed_prompt = system_prompt(bq, cb, &label);
            auto scorer = make_bq_scorer(*gateway, split.dev, label, cb, bq);
            auto result = auto_optimize(label, seed_prompt, split.dev, *gateway, scorer, cb, opt_opt);
            json prompts = json::object();
            if (fs::exists(out_path)) {
                std::ifstream in(out_path);
                prompts = json::parse(in);
            }
            prompts[label] = result.best_prompt;
            write_text(out_path, prompts.dump(2) + "\n");
            if (!history_out.empty()) write_text(history_out, history_to_json(result.history).dump(2) + "\n");
            std::cout << "best dev Macro-F1 " << result.best_score << " after "
                      << result.history.candidate_evaluations << " candidate evaluations\n";
        } else if (*refine) {
            auto set = load_dataset(dataset, cb, warn_integrity);
            const auto& rec = find_record(set, target_id);
            const auto config = prompt_from_flags(content, prompt_format, task);
            std::optional<std::string> lbl;
            if (!label.empty()) lbl = label;
            auto gateway = gw.make();
            auto transcript = self_refine(rec.target, config, cb, lbl, *gateway, refine_rounds);
            std::cout << transcript_to_json(transcript).dump(2) << '\n';
        } else if (*generate) {
            auto set = load_dataset(dataset, cb, warn_integrity);
            auto ex = select_exemplars(set.records, label, 3, 0, seed);
            for (const auto& w : ex.warnings) std::cerr << "warning: " << w << '\n';
            auto gateway = gw.make();
            auto result = generate_samples(label, ex.positives, *gateway, cb, n_samples);
            for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
            std::vector<json> rows;
            for (const auto& s : result.samples) rows.push_back(sample_to_json(s));
            write_jsonl(out_path, rows);
            std::cerr << "generated " << result.samples.size() << ", shortfall " << result.shortfall << '\n';
        } else if (*cv) {
            auto set = load_dataset(dataset, cb, warn_integrity);
            const auto data = classical::coarse_dataset(set.records, with_context);
            classical::TrainOptions to;
            to.lambda = lambda;
            auto result = classical::cross_validate(data, classical::parse_feature_mode(features), folds, seed, to);
            std::cout << json{{"features", features}, {"folds", result.folds}, {"mean", result.mean}, {"seed", seed}}
                             .dump(2)
                      << '\n';
        } else if (*top) {
            auto set = load_dataset(dataset, cb, warn_integrity);
            const auto data = classical::coarse_dataset(set.records, with_context);
            std::vector<std::string> texts, class_names;
            for (const auto& d : data) {
                texts.push_back(d.text);
                class_names.push_back(d.label);
            }
            std::sort(class_names.begin(), class_names.end());
            class_names.erase(std::unique(class_names.begin(), class_names.end()), class_names.end());
            std::vector<int> y;
            for (const auto& d : data) {
                y.push_back(static_cast<int>(std::lower_bound(class_names.begin(), class_names.end(), d.label) -
                                             class_names.begin()));
            }
            auto fm = classical::fit_features(texts, classical::parse_feature_mode(features));
            classical::TrainOptions to;
            to.lambda = lambda;
            auto model = classical::train_logreg(classical::transform(fm, texts), y, fm.size(), class_names, to);
            json out = json::object();
            for (const auto& cls : class_names) {
                auto tf = classical::top_features(model, fm, cls, top_k);
                out[cls] = {{"positive", tf.positive}, {"negative", tf.negative}};
            }
            std::cout << out.dump(2) << '\n';
            if (!model_out.empty()) classical::save_model(model, fm, model_out);
        } else if (*serve) {
            std::vector<AnnotationTarget> pool;
            if (!dataset.empty()) {
                for (const auto& r : load_dataset(dataset, cb, true).records) pool.push_back(r.target);
            } else if (!serve_targets.empty()) {
                pool = load_targets(serve_targets);
            } else {
                throw ValidationError("serve needs --targets or --dataset");
            }
            annotation::ServiceOptions so;
            so.log_path = event_log;
            so.snapshot_every = snapshot_every;
            so.min_wave_size = min_wave;
            so.max_wave_size = max_wave;
            annotation::AnnotationService service(cb, std::move(pool), so);
            server_opt.static_dir = static_dir;
            annotation::AnnotationServer server(service, server_opt);
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "serving on " << server_opt.host << ':' << server_opt.port << '\n';
            server.run();
            g_server = nullptr;
        }
    } catch (const CacheMiss& e) {
        std::cerr << "error: " << e.what() << " (replay mode needs a recorded cache)\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

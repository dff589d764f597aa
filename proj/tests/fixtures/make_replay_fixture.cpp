// Records the replay fixture: the C&D-BQ run over the synthetic gold set,
// answered by a scripted stand-in model in Record mode.
//
//   make_replay_fixture <gold_20.jsonl> <cache.jsonl>

#include <filesystem>
#include <iostream>

#include "humbench/runner.hpp"
#include "scripted_transport.hpp"

using namespace humbench;

int main(int argc, char** argv) {
    if (argc != 3) {
        std::cerr << "usage: make_replay_fixture <gold.jsonl> <cache.jsonl>\n";
        return 2;
    }
    const std::filesystem::path gold_path = argv[1], cache_path = argv[2];
    std::filesystem::remove(cache_path);
    const Codebook& cb = default_codebook();
    const auto gold = load_gold(gold_path, cb).records;

    auto transport = std::make_shared<testing::ScriptedTransport>(
        [&](const ChatRequest& r) { return testing::gold_following_answer(r, gold, cb); });
    GatewayConfig gc;
    gc.model_id = "fixture-model";
    gc.mode = GatewayMode::Record;
    gc.cache_path = cache_path;
    Gateway gateway(gc, transport);

    ExperimentConfig config;
    config.model_id = gc.model_id;
    config.mode = GatewayMode::Record;
    config.cache = cache_path;
    const auto run = run_experiment(config, gateway, gold, cb);
    std::cout << "recorded " << gateway.stats().recorded << " responses for " << run.targets.size()
              << " targets\n";
    return 0;
}

#include "humbench/pipeline.hpp"

#include <nlohmann/json.hpp>

#include "humbench/error.hpp"

namespace humbench {

using nlohmann::json;

Verdict fallback_verdict(const PromptConfig& config, const FailurePolicy& policy) {
    Verdict v;
    if (config.task == Task::Coarse) {
        v.kind = Verdict::CoarseVerdict{CoarseClass{policy.coarse_fallback, false}};
    } else if (config.format == PromptFormat::BinaryQuestion) {
        v.kind = Verdict::YesNo{policy.binary_fallback};
    } else {
        v.kind = Verdict::Labels{};
    }
    return v;
}

Classification classify(Gateway& gateway, const Conversation& conversation, const PromptConfig& config,
                        const Codebook& cb, const FailurePolicy& policy) {
    Classification out;
    Conversation conv = conversation;
    for (int attempt = 0; attempt < 2; ++attempt) {
        ChatRequest req = gateway.make_request(conv);
        out.cache_keys.push_back(cache_key(req));
        std::string text;
        try {
            text = gateway.complete(req).text;
        } catch (const TransportError& e) {
            out.failed = true;
            out.error = e.what();
        }
        if (out.failed) break;
        try {
            out.verdict = parse_verdict(text, config, cb);
            return out;
        } catch (const UnparseableError&) {
            if (attempt == 1) {
                out.unparseable = true;
                out.error = "unparseable response";
                out.verdict = fallback_verdict(config, policy);
                out.verdict.raw_text = text;
                return out;
            }
            conv.messages.push_back({Role::Assistant, text});
            conv.messages.push_back({Role::User, retry_instruction(config)});
        }
    }
    out.verdict = fallback_verdict(config, policy);
    return out;
}

json verdict_to_json(const Verdict& v) {
    json j;
    if (auto* yn = std::get_if<Verdict::YesNo>(&v.kind)) {
        j["kind"] = "yes_no";
        j["value"] = yn->value;
    } else if (auto* ls = std::get_if<Verdict::Labels>(&v.kind)) {
        j["kind"] = "labels";
        j["value"] = ls->value;
    } else {
        const auto& c = std::get<Verdict::CoarseVerdict>(v.kind).value;
        j["kind"] = "coarse";
        j["value"] = std::string(to_string(c.value));
        j["tie_flag"] = c.tie_flag;
    }
    j["raw_text"] = v.raw_text;
    j["rationale"] = v.rationale ? json(*v.rationale) : json(nullptr);
    return j;
}

Verdict verdict_from_json(const json& j) {
    Verdict v;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "yes_no") {
        v.kind = Verdict::YesNo{j.at("value").get<bool>()};
    } else if (kind == "labels") {
        v.kind = Verdict::Labels{j.at("value").get<LabelSet>()};
    } else if (kind == "coarse") {
        v.kind = Verdict::CoarseVerdict{
            CoarseClass{parse_coarse_name(j.at("value").get<std::string>()), j.value("tie_flag", false)}};
    } else {
        throw ValidationError("unknown verdict kind '" + kind + "'");
    }
    v.raw_text = j.value("raw_text", std::string());
    if (auto r = j.find("rationale"); r != j.end() && r->is_string()) v.rationale = r->get<std::string>();
    return v;
}

bool verdict_has_label(const Verdict& v, const std::string& label) {
    if (auto* yn = std::get_if<Verdict::YesNo>(&v.kind)) return yn->value;
    if (auto* ls = std::get_if<Verdict::Labels>(&v.kind)) return ls->value.count(label) > 0;
    throw ValidationError("a coarse verdict has no per-label reading");
}

}  // namespace humbench

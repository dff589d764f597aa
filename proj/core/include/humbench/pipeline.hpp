#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "humbench/codebook.hpp"
#include "humbench/gateway.hpp"
#include "humbench/prompt.hpp"

namespace humbench {

// What a failed or unparseable verdict scores as. The defaults are the
// negative outcome: "No", the empty label set, and Neutral (also the
// majority coarse class in the released data).
struct FailurePolicy {
    bool binary_fallback = false;
    Coarse coarse_fallback = Coarse::Neutral;
};

Verdict fallback_verdict(const PromptConfig& config, const FailurePolicy& policy);

struct Classification {
    Verdict verdict;
    std::vector<std::string> cache_keys;  // one per gateway call, in order
    bool unparseable = false;             // both attempts failed to parse
    bool failed = false;                  // gateway error
    std::string error;
};

// One gateway call; when the reply does not parse, one more call with the
// reply and a terse answer-only instruction appended to the conversation.
// Transport errors are captured, not thrown; a replay CacheMiss propagates.
Classification classify(Gateway& gateway, const Conversation& conversation, const PromptConfig& config,
                        const Codebook& cb, const FailurePolicy& policy = {});

nlohmann::json verdict_to_json(const Verdict& v);
Verdict verdict_from_json(const nlohmann::json& j);

// Binary reading of a label-wise verdict for `label` (YesNo as is, Labels by membership).
bool verdict_has_label(const Verdict& v, const std::string& label);

}  // namespace humbench

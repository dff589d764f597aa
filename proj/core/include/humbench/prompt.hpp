#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "humbench/codebook.hpp"
#include "humbench/corpus.hpp"

namespace humbench {

enum class Role { System, User, Assistant };

std::string_view to_string(Role r);
Role parse_role(std::string_view s);

struct Message {
    Role role = Role::User;
    std::string content;

    bool operator==(const Message&) const = default;
};

// Ordered chat transcript. A well-formed conversation starts with a system
// message and contains at least one user message.
struct Conversation {
    std::vector<Message> messages;

    void validate() const;  // throws ValidationError
    const Message& last_user() const;
    Message& system();

    bool operator==(const Conversation&) const = default;
};

nlohmann::json conversation_to_json(const Conversation& c);
Conversation conversation_from_json(const nlohmann::json& j);

enum class PromptContent { CodeOnly, DescriptionOnly, CodeAndDescription };
enum class PromptFormat { MultipleSelection, BinaryQuestion };
enum class Task { Coarse, LabelWise };

struct PromptConfig {
    PromptContent content = PromptContent::CodeAndDescription;
    PromptFormat format = PromptFormat::BinaryQuestion;
    Task task = Task::LabelWise;

    void validate() const;  // Coarse requires MultipleSelection
    bool operator==(const PromptConfig&) const = default;
};

// Short names as used in report rows: "C", "D", "C&D"; "MS", "BQ".
std::string_view short_name(PromptContent c);
std::string_view short_name(PromptFormat f);
std::string config_name(const PromptConfig& c);  // e.g. "C&D-BQ" or "C&D-Coarse"
PromptContent parse_content(std::string_view s);
PromptFormat parse_format(std::string_view s);
Task parse_task(std::string_view s);

struct PromptOptions {
    // Randomizes label order in list-style prompts (primacy experiments).
    std::optional<std::uint64_t> shuffle_labels_seed;
};

// How one label is shown for a given content variation.
std::string label_text(const CodebookLabel& label, PromptContent content);

std::string system_prompt(const PromptConfig& config, const Codebook& cb, const std::string* label_abbrev,
                          const PromptOptions& opt = {});
std::string user_prompt(const AnnotationTarget& target, const PromptConfig& config, const Codebook& cb,
                        const std::string* label_abbrev);
// The user prompt of the self-refinement reconsider step.
std::string reconsider_prompt(const AnnotationTarget& target, const PromptConfig& config, const Codebook& cb,
                              const std::string* label_abbrev, const std::string& feedback);

// label must be present exactly when the config is label-wise binary.
Conversation build_prompt(const AnnotationTarget& target, const PromptConfig& config, const Codebook& cb,
                          const std::optional<std::string>& label, const PromptOptions& opt = {});

// Appended to a user message when a response could not be parsed.
std::string retry_instruction(const PromptConfig& config);

// Minimal mustache-style renderer: {{name}} substitution and
// {{#if flag}}...{{/if}} blocks. Substituted values are inserted verbatim
// and never re-scanned.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& vars,
                            const std::map<std::string, bool>& flags = {});
std::string load_template(std::string_view name);

struct Verdict {
    struct YesNo {
        bool value;
        bool operator==(const YesNo&) const = default;
    };
    struct Labels {
        LabelSet value;
        bool operator==(const Labels&) const = default;
    };
    struct CoarseVerdict {
        CoarseClass value;
        bool operator==(const CoarseVerdict&) const = default;
    };

    std::variant<YesNo, Labels, CoarseVerdict> kind;
    std::string raw_text;
    std::optional<std::string> rationale;
};

// Last yes/no token wins; markdown emphasis and backticks are ignored.
// Throws UnparseableError when neither token occurs.
bool parse_binary(std::string_view text);

// Label names (case-insensitive), definitions and whole-word abbrevs found
// anywhere in the response. An empty set is a valid outcome.
LabelSet parse_multiselect(std::string_view text, const Codebook& cb);

// Last of "intellectual humility" / "intellectual arrogan…" / "neutral" wins.
CoarseClass parse_coarse(std::string_view text);

// Dispatches on the config; the rationale is the whole trimmed response when
// it is longer than a bare answer.
Verdict parse_verdict(std::string_view text, const PromptConfig& config, const Codebook& cb);

}  // namespace humbench

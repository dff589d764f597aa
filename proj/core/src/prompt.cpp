#include "humbench/prompt.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>

#include "humbench/error.hpp"
#include "humbench/resources.hpp"
#include "humbench/rng.hpp"
#include "humbench/text.hpp"

namespace humbench {

using nlohmann::json;

std::string_view to_string(Role r) {
    switch (r) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "?";
}

Role parse_role(std::string_view s) {
    if (s == "system") return Role::System;
    if (s == "user") return Role::User;
    if (s == "assistant") return Role::Assistant;
    throw ValidationError("unknown message role '" + std::string(s) + "'");
}

void Conversation::validate() const {
    if (messages.empty() || messages.front().role != Role::System)
        throw ValidationError("conversation must start with a system message");
    if (std::none_of(messages.begin(), messages.end(), [](const Message& m) { return m.role == Role::User; }))
        throw ValidationError("conversation has no user message");
}

const Message& Conversation::last_user() const {
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->role == Role::User) return *it;
    }
    throw ValidationError("conversation has no user message");
}

Message& Conversation::system() {
    validate();
    return messages.front();
}

json conversation_to_json(const Conversation& c) {
    json msgs = json::array();
    for (const auto& m : c.messages) msgs.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
    return msgs;
}

Conversation conversation_from_json(const json& j) {
    Conversation c;
    for (const auto& m : j) {
        c.messages.push_back(Message{parse_role(m.at("role").get<std::string>()), m.at("content").get<std::string>()});
    }
    return c;
}

void PromptConfig::validate() const {
    if (task == Task::Coarse && format != PromptFormat::MultipleSelection)
        throw ValidationError("the coarse task only supports the multiple-selection format");
}

std::string_view short_name(PromptContent c) {
    switch (c) {
        case PromptContent::CodeOnly: return "C";
        case PromptContent::DescriptionOnly: return "D";
        case PromptContent::CodeAndDescription: return "C&D";
    }
    return "?";
}

std::string_view short_name(PromptFormat f) { return f == PromptFormat::MultipleSelection ? "MS" : "BQ"; }

std::string config_name(const PromptConfig& c) {
    std::string out(short_name(c.content));
    out += '-';
    out += c.task == Task::Coarse ? "Coarse" : std::string(short_name(c.format));
    return out;
}

PromptContent parse_content(std::string_view s) {
    std::string v = text::to_lower(s);
    if (v == "c" || v == "code" || v == "code-only") return PromptContent::CodeOnly;
    if (v == "d" || v == "description" || v == "description-only") return PromptContent::DescriptionOnly;
    if (v == "c&d" || v == "cd" || v == "code-and-description") return PromptContent::CodeAndDescription;
    throw ValidationError("unknown prompt content '" + std::string(s) + "'");
}

PromptFormat parse_format(std::string_view s) {
    std::string v = text::to_lower(s);
    if (v == "ms" || v == "multiple-selection") return PromptFormat::MultipleSelection;
    if (v == "bq" || v == "binary-question") return PromptFormat::BinaryQuestion;
    throw ValidationError("unknown prompt format '" + std::string(s) + "'");
}

Task parse_task(std::string_view s) {
    std::string v = text::to_lower(s);
    if (v == "coarse") return Task::Coarse;
    if (v == "label" || v == "labelwise" || v == "label-wise") return Task::LabelWise;
    throw ValidationError("unknown task '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& vars,
                            const std::map<std::string, bool>& flags) {
    // Pass 1: resolve conditional blocks line by line and squeeze the blank
    // lines they leave behind. Only template text is touched here.
    std::vector<std::string> kept;
    std::vector<bool> active{true};
    for (const auto& raw : text::split(tmpl, '\n')) {
        const std::string line = text::trim(raw);
        if (line.rfind("{{#if ", 0) == 0 && line.size() > 8 && line.substr(line.size() - 2) == "}}") {
            const std::string flag = text::trim(line.substr(6, line.size() - 8));
            auto it = flags.find(flag);
            if (it == flags.end()) throw ValidationError("template flag '" + flag + "' not provided");
            active.push_back(active.back() && it->second);
            continue;
        }
        if (line == "{{/if}}") {
            if (active.size() == 1) throw ValidationError("template has an unmatched {{/if}}");
            active.pop_back();
            continue;
        }
        if (!active.back()) continue;
        if (line.empty() && (kept.empty() || kept.back().empty())) continue;
        kept.push_back(raw);
    }
    if (active.size() != 1) throw ValidationError("template has an unterminated {{#if}}");
    while (!kept.empty() && kept.back().empty()) kept.pop_back();
    const std::string structure = text::join(kept, "\n");

    // Pass 2: substitute placeholders in a single left-to-right scan.
    std::string out;
    std::size_t pos = 0;
    while (pos < structure.size()) {
        std::size_t open = structure.find("{{", pos);
        if (open == std::string::npos) {
            out.append(structure, pos, std::string::npos);
            break;
        }
        std::size_t close = structure.find("}}", open + 2);
        if (close == std::string::npos) throw ValidationError("template has an unterminated placeholder");
        out.append(structure, pos, open - pos);
        const std::string name = text::trim(std::string_view(structure).substr(open + 2, close - open - 2));
        auto it = vars.find(name);
        if (it == vars.end()) throw ValidationError("template variable '" + name + "' not provided");
        out += it->second;
        pos = close + 2;
    }
    return out;
}

std::string load_template(std::string_view name) {
    return std::string(resources::get("templates/" + std::string(name) + ".txt"));
}

std::string label_text(const CodebookLabel& label, PromptContent content) {
    switch (content) {
        case PromptContent::CodeOnly: return label.name;
        case PromptContent::DescriptionOnly: return label.definition;
        case PromptContent::CodeAndDescription: return label.name + ": " + label.definition;
    }
    return label.name;
}

namespace {

constexpr std::string_view kListSeparator = "; ";
constexpr std::string_view kCoarseQuestion = "intellectual humility, intellectual arrogance, or neutral";
constexpr std::string_view kMultiQuestion = "one or more of the listed labels";

std::string list_text(std::vector<CodebookLabel> labels, PromptContent content, const PromptOptions& opt,
                      std::uint64_t stream) {
    if (opt.shuffle_labels_seed) {
        Rng rng = Rng::derive(*opt.shuffle_labels_seed, stream);
        rng.shuffle(std::span<CodebookLabel>(labels));
    }
    std::vector<std::string> parts;
    for (const auto& l : labels) parts.push_back(label_text(l, content));
    return text::join(parts, kListSeparator);
}

const std::string& require_label(const PromptConfig& config, const std::string* label) {
    if (!label) throw ValidationError("binary-question prompts need a label");
    (void)config;
    return *label;
}

}  // namespace

std::string system_prompt(const PromptConfig& config, const Codebook& cb, const std::string* label_abbrev,
                          const PromptOptions& opt) {
    config.validate();
    if (config.task == Task::Coarse) {
        const bool code_only = config.content == PromptContent::CodeOnly;
        return render_template(load_template(code_only ? "coarse_system_code_only" : "coarse_system"),
                               {{"IH_code", list_text(cb.labels_of(Polarity::IH), config.content, opt, 1)},
                                {"IA_code", list_text(cb.labels_of(Polarity::IA), config.content, opt, 2)}});
    }
    if (config.format == PromptFormat::MultipleSelection) {
        return render_template(load_template("label_ms_system"),
                               {{"Code_list", list_text(cb.labels(), config.content, opt, 3)}});
    }
    const auto& label = cb.at(require_label(config, label_abbrev));
    return render_template(load_template("label_bq_system"), {{"Code", label_text(label, config.content)}});
}

namespace {

std::map<std::string, std::string> user_vars(const AnnotationTarget& target, std::string label) {
    const bool second = target.position == TargetPosition::Second;
    return {{"Post_title", target.title},
            {"Post_content", target.submission_text},
            {"First_comment", second ? target.first_comment : target.target_text},
            {"Second_comment", second ? target.target_text : std::string()},
            {"Focal_comment", target.target_text},
            {"Label", std::move(label)}};
}

std::string question_label(const PromptConfig& config, const Codebook& cb, const std::string* label_abbrev) {
    if (config.task == Task::Coarse) return std::string(kCoarseQuestion);
    if (config.format == PromptFormat::MultipleSelection) return std::string(kMultiQuestion);
    return label_text(cb.at(require_label(config, label_abbrev)), config.content);
}

}  // namespace

std::string user_prompt(const AnnotationTarget& target, const PromptConfig& config, const Codebook& cb,
                        const std::string* label_abbrev) {
    return render_template(load_template("user"), user_vars(target, question_label(config, cb, label_abbrev)),
                           {{"focus_on_second_comment", target.position == TargetPosition::Second}});
}

std::string reconsider_prompt(const AnnotationTarget& target, const PromptConfig& config, const Codebook& cb,
                              const std::string* label_abbrev, const std::string& feedback) {
    auto vars = user_vars(target, question_label(config, cb, label_abbrev));
    vars["Feedback"] = feedback;
    return render_template(load_template("reconsider_user"), vars,
                           {{"focus_on_second_comment", target.position == TargetPosition::Second}});
}

Conversation build_prompt(const AnnotationTarget& target, const PromptConfig& config, const Codebook& cb,
                          const std::optional<std::string>& label, const PromptOptions& opt) {
    config.validate();
    const bool wants_label = config.task == Task::LabelWise && config.format == PromptFormat::BinaryQuestion;
    if (wants_label && !label) throw ValidationError("binary-question prompts need a label");
    if (!wants_label && label) throw ValidationError("only label-wise binary-question prompts take a label");
    const std::string* lp = label ? &*label : nullptr;
    if (lp) cb.at(*lp);
    Conversation c;
    c.messages.push_back({Role::System, system_prompt(config, cb, lp, opt)});
    c.messages.push_back({Role::User, user_prompt(target, config, cb, lp)});
    return c;
}

std::string retry_instruction(const PromptConfig& config) {
    if (config.task == Task::Coarse) return text::trim(load_template("retry_coarse"));
    return text::trim(load_template("retry_binary"));
}

// ---------------------------------------------------------------------------

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Positions of whole-word occurrences of `word` in `lowered` (already lowercase).
std::vector<std::size_t> word_hits(const std::string& lowered, std::string_view word) {
    std::vector<std::size_t> hits;
    std::size_t pos = 0;
    while ((pos = lowered.find(word, pos)) != std::string::npos) {
        const bool left = pos == 0 || !is_word_char(lowered[pos - 1]);
        const std::size_t end = pos + word.size();
        const bool right = end >= lowered.size() || !is_word_char(lowered[end]);
        if (left && right) hits.push_back(pos);
        pos = end;
    }
    return hits;
}

}  // namespace

bool parse_binary(std::string_view t) {
    const std::string lowered = text::to_lower(t);
    auto yes = word_hits(lowered, "yes");
    auto no = word_hits(lowered, "no");
    if (yes.empty() && no.empty()) throw UnparseableError("no Yes/No token in response", std::string(t));
    if (no.empty()) return true;
    if (yes.empty()) return false;
    return yes.back() > no.back();
}

LabelSet parse_multiselect(std::string_view t, const Codebook& cb) {
    const std::string folded = text::to_lower(text::fold_quotes(t));
    const std::string original = text::fold_quotes(t);
    LabelSet out;
    for (const auto& l : cb.labels()) {
        const std::string name = text::to_lower(text::fold_quotes(l.name));
        std::string def = text::to_lower(text::fold_quotes(text::trim(l.definition)));
        if (!def.empty() && def.back() == '.') def.pop_back();
        if (folded.find(name) != std::string::npos || (!def.empty() && folded.find(def) != std::string::npos)) {
            out.insert(l.abbrev);
            continue;
        }
        // Abbrevs match case-sensitively as whole words so "CA" does not fire on "because".
        std::size_t pos = 0;
        while ((pos = original.find(l.abbrev, pos)) != std::string::npos) {
            const std::size_t end = pos + l.abbrev.size();
            const bool left = pos == 0 || !is_word_char(original[pos - 1]);
            const bool right = end >= original.size() || !is_word_char(original[end]);
            if (left && right) {
                out.insert(l.abbrev);
                break;
            }
            pos = end;
        }
    }
    return out;
}

CoarseClass parse_coarse(std::string_view t) {
    const std::string lowered = text::to_lower(t);
    struct Probe {
        std::string_view phrase;
        Coarse value;
    };
    static constexpr Probe kProbes[] = {
        {"intellectual humility", Coarse::IH},
        {"intellectual arrogan", Coarse::IA},
        {"intellectually arrogan", Coarse::IA},
        {"neutral", Coarse::Neutral},
    };
    std::size_t best = std::string::npos;
    Coarse value = Coarse::Neutral;
    for (const auto& p : kProbes) {
        std::size_t pos = lowered.rfind(p.phrase);
        if (pos != std::string::npos && (best == std::string::npos || pos > best)) {
            best = pos;
            value = p.value;
        }
    }
    if (best == std::string::npos) throw UnparseableError("no coarse class phrase in response", std::string(t));
    return CoarseClass{value, false};
}

Verdict parse_verdict(std::string_view t, const PromptConfig& config, const Codebook& cb) {
    Verdict v;
    v.raw_text = std::string(t);
    if (config.task == Task::Coarse) {
        v.kind = Verdict::CoarseVerdict{parse_coarse(t)};
    } else if (config.format == PromptFormat::BinaryQuestion) {
        v.kind = Verdict::YesNo{parse_binary(t)};
    } else {
        v.kind = Verdict::Labels{parse_multiselect(t, cb)};
    }
    if (text::count_words(t) > 3) v.rationale = text::trim(t);
    return v;
}

}  // namespace humbench

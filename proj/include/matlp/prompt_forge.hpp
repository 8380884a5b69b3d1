#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "matlp/errors.hpp"
#include "matlp/utf8.hpp"

// Prompt and completion assembly. Autoregressive completion models need fixed
// sentinel strings so a trained model knows where its answer starts and ends:
// the prompt ends with a suffix, the completion starts with a single space and
// ends with a stop string, and few-shot prompts use an answer cue after each
// example input. All of these are template fields.

namespace matlp {

struct PromptTemplate {
    std::optional<std::string> task_phrase;
    std::string example_separator = "\n\n";
    std::string prompt_suffix = "\n\n###\n\n";  // fine-tune prompt terminator
    std::string completion_stop = " END";
    std::string answer_cue = " →";  // per-example cue in few-shot prompts
    bool leading_whitespace = true;
    size_t max_total_tokens = 4097;
    size_t reserved_completion_tokens = 256;

    void validate() const {
        if (prompt_suffix.empty()) throw ValidationError("prompt_suffix must be non-empty");
        if (completion_stop.empty())
            throw ValidationError("completion_stop must be non-empty");
        if (completion_stop == prompt_suffix)
            throw ValidationError("completion_stop must differ from prompt_suffix");
    }
};

struct PromptCompletionPair {
    std::string prompt;
    std::string completion;

    bool operator==(const PromptCompletionPair&) const = default;
};

// Task-informing phrases. The QA phrase is fixed; NER phrases name the entity
// kind being extracted ("descriptive" -> DES, "morphological" -> MOR).
inline constexpr const char* kQaTaskPhrase =
    "The task is to extract answers from the given text.";

inline std::string ner_task_phrase(const std::string& entity_description) {
    return "The task is to extract the " + entity_description +
           " entities of materials in the given text";
}

// --- token counting ---------------------------------------------------------

// Counting is pluggable because production tokenizers are model-specific.
// The bundled counters are deterministic approximations good enough for
// budget enforcement; anything sharper can be dropped in behind the same
// signature.
struct TokenCounter {
    std::string name;
    std::function<size_t(std::string_view)> count;
};

namespace detail {

inline bool approx_is_space(char32_t cp) {
    return cp == U' ' || (cp >= 0x09 && cp <= 0x0D) || cp == 0xA0;
}

inline bool approx_is_word(char32_t cp) {
    return (cp >= U'0' && cp <= U'9') || (cp >= U'A' && cp <= U'Z') ||
           (cp >= U'a' && cp <= U'z') || cp == U'_' || cp >= 0x80;
}

}  // namespace detail

// Segmentation used by approx_token_counter: runs of word characters are one
// token, every other non-space scalar is its own token. Returns scalar-offset
// token ranges; the mock backend uses these for max_tokens truncation.
inline std::vector<std::pair<size_t, size_t>> approx_tokenize(std::string_view text) {
    std::u32string u = utf8::decode(text);
    std::vector<std::pair<size_t, size_t>> tokens;
    size_t i = 0;
    while (i < u.size()) {
        if (detail::approx_is_space(u[i])) {
            ++i;
        } else if (detail::approx_is_word(u[i])) {
            size_t j = i;
            while (j < u.size() && detail::approx_is_word(u[j])) ++j;
            tokens.emplace_back(i, j);
            i = j;
        } else {
            tokens.emplace_back(i, i + 1);
            ++i;
        }
    }
    return tokens;
}

inline TokenCounter approx_token_counter() {
    return {"approx-word-punct",
            [](std::string_view s) { return approx_tokenize(s).size(); }};
}

// Pure whitespace-split counter; the coarsest sensible oracle.
inline TokenCounter whitespace_token_counter() {
    return {"whitespace", [](std::string_view s) {
                std::u32string u = utf8::decode(s);
                size_t count = 0;
                bool in_token = false;
                for (char32_t cp : u) {
                    if (detail::approx_is_space(cp)) {
                        in_token = false;
                    } else if (!in_token) {
                        ++count;
                        in_token = true;
                    }
                }
                return count;
            }};
}

// --- builders ----------------------------------------------------------------

// prompt = input + suffix; completion = " " + target + stop.
inline PromptCompletionPair build_finetune_pair(const std::string& input,
                                                const std::string& target,
                                                const PromptTemplate& tmpl = {}) {
    tmpl.validate();
    if (input.empty()) throw ValidationError("fine-tune input must be non-empty");
    if (target.empty()) throw ValidationError("fine-tune target must be non-empty");
    PromptCompletionPair pair;
    pair.prompt = input + tmpl.prompt_suffix;
    pair.completion =
        (tmpl.leading_whitespace ? " " : "") + target + tmpl.completion_stop;
    return pair;
}

// [task_phrase sep] (input cue " " target sep)* query cue
inline std::string build_fewshot_prompt(
    const std::optional<std::string>& task_phrase,
    const std::vector<std::pair<std::string, std::string>>& examples,
    const std::string& query, const PromptTemplate& tmpl = {}) {
    std::string out;
    if (task_phrase) out += *task_phrase + tmpl.example_separator;
    for (const auto& [input, target] : examples)
        out += input + tmpl.answer_cue + " " + target + tmpl.example_separator;
    out += query + tmpl.answer_cue;
    return out;
}

// [task phrase sep] context sep question cue
inline std::string build_qa_prompt(const std::string& question, const std::string& context,
                                   bool task_informed, const PromptTemplate& tmpl = {}) {
    if (question.empty()) throw ValidationError("question must be non-empty");
    if (context.empty()) throw ValidationError("context must be non-empty");
    std::string out;
    if (task_informed)
        out += tmpl.task_phrase.value_or(kQaTaskPhrase) + tmpl.example_separator;
    out += context + tmpl.example_separator + question + tmpl.answer_cue;
    return out;
}

// --- budget -------------------------------------------------------------------

struct BudgetCheck {
    bool ok;
    size_t counted;
    size_t limit;
};

inline BudgetCheck enforce_budget(const PromptCompletionPair& pair, const TokenCounter& counter,
                                  const PromptTemplate& tmpl = {}) {
    size_t counted = counter.count(pair.prompt) + counter.count(pair.completion);
    return {counted <= tmpl.max_total_tokens, counted, tmpl.max_total_tokens};
}

// A bare prompt is budgeted with the reserved completion allowance on top.
inline BudgetCheck enforce_budget(const std::string& prompt, const TokenCounter& counter,
                                  const PromptTemplate& tmpl = {}) {
    size_t counted = counter.count(prompt) + tmpl.reserved_completion_tokens;
    return {counted <= tmpl.max_total_tokens, counted, tmpl.max_total_tokens};
}

// True when the pair obeys the suffix / leading-space / stop conventions.
inline bool pair_satisfies_template(const PromptCompletionPair& pair,
                                    const PromptTemplate& tmpl) {
    auto ends_with = [](const std::string& s, const std::string& suffix) {
        return s.size() >= suffix.size() &&
               s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    if (!ends_with(pair.prompt, tmpl.prompt_suffix)) return false;
    if (!ends_with(pair.completion, tmpl.completion_stop)) return false;
    if (tmpl.leading_whitespace) {
        if (pair.completion.size() < 2 || pair.completion[0] != ' ') return false;
        if (pair.completion[1] == ' ') return false;  // exactly one leading space
    }
    return true;
}

}  // namespace matlp

#pragma once

// Prompt templates for every LLM call in the pipeline. Each template opens
// with a fixed head so that requests can be classified (the mock backend
// relies on this) and carries its variable parts on labelled lines.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "solid/taxonomy.hpp"

namespace solid::prompts {

enum class Kind {
    EntityTypes,
    EntityAttributes,
    EntityNames,
    Background,
    Starter,
    MergeInstructions,
    Turn,
    SinglePass,
    FewShot,
    Other,
};

Kind classify(std::string_view user_message);

// Value of a "Key: value" line, if present.
std::optional<std::string> field(std::string_view prompt, std::string_view key);

// "<<INTENT:pa>>"; appended to utterance-producing prompts when intent
// markers are enabled so that the mock can make corpora learnable.
std::string intent_marker(IntentCode c);
std::string intent_markers(const IntentSet& set);
// Codes of all "<<INTENT:xx>>" tokens in `s`, in order of appearance.
std::vector<IntentCode> find_intent_markers(std::string_view s);

extern const std::string_view kGlobalInstruction;

std::string entity_types(int n);
std::string entity_attributes(std::string_view entity_type, int n);
std::string entity_names(std::string_view entity_type, char letter, int n);
std::string background(std::string_view entity_name, std::string_view entity_type,
                       const std::vector<std::string>& attributes);
std::string starter(std::string_view entity_name, std::string_view entity_type,
                    std::string_view background_document, const std::optional<IntentSet>& markers);
std::string merge_instructions(Actor actor, const std::vector<std::string>& instructions);

struct SeedContext {
    std::string entity_name;
    std::string entity_type;
    std::string background_document;
};

std::string render_context(const SeedContext& ctx);

// Whole-dialog request used for the rejected side of preference pairs.
std::string single_pass(const SeedContext& ctx, std::string_view conversation_starter,
                        const IntentSequence& sequence, bool with_markers);

struct LabeledExample {
    std::string previous;  // may be empty
    std::string utterance;
    IntentSet intents;
};

std::string few_shot(const std::vector<LabeledExample>& shots, std::string_view previous,
                     std::string_view target);

// One-shot examples shown when asking for entity names.
const std::vector<std::string>& example_entity_names();

}  // namespace solid::prompts

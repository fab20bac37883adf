#pragma once

// Turn-by-turn dialog generation, the single-pass ("rejected") path, and
// the post-processor applied to every generated utterance.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "solid/backend.hpp"
#include "solid/instructor.hpp"
#include "solid/prompts.hpp"
#include "solid/seed.hpp"

namespace solid {

// Truncates after the last '.', '!' or '?' (keeping closing quotes and
// brackets that immediately follow), strips leading "User:"/"Agent:"
// keywords from each line, drops empty lines and trims. Idempotent.
// Throws DegenerateOutput when nothing usable remains.
std::string post_process(std::string_view raw);

struct GenerationContext {
    std::string_view global_instruction = prompts::kGlobalInstruction;
    prompts::SeedContext seed;
    std::vector<Utterance> history;
};

GenerationContext context_for(const Seed& seed);

// System message = global instruction; user message = seed context, the
// actor-labelled history, the instruction and the next speaker. `markers`
// appends intent markers for the next utterance.
std::vector<ChatMessage> build_turn_prompt(const GenerationContext& ctx, std::string_view instruction,
                                           const std::optional<IntentSet>& markers = std::nullopt);

struct GeneratorOptions {
    GenerationParams params;
    // Completions per turn before the dialog is abandoned.
    int turn_attempts = 3;
    bool intent_markers = false;
};

// Starter becomes utterance 1 with the first sequence element; each
// further element adds one post-processed turn. Throws TurnFailure.
Dialog generate_dialog(Client& client, Instructor& instructor, const Seed& seed,
                       const GeneratorOptions& opts = {});

struct SinglePassParse {
    std::vector<Utterance> utterances;
    bool truncated = false;  // more than 20 utterances were recovered
};

// Strict "Utterance k:/Text:/Intent:" blocks first, then paragraphs split on
// blank lines. Utterances without a readable Intent: line take the k-th
// sequence element (or "others" past its end). Throws Unparseable when
// nothing is recovered.
SinglePassParse parse_single_pass(std::string_view reply, const IntentSequence& sequence);

// One completion for the whole dialog; length_mismatch records whether the
// recovered utterance count differs from the sequence length.
Dialog generate_dialog_single_pass(Client& client, const Seed& seed, const GeneratorOptions& opts = {});

enum class GenerationMode { Turnwise, SinglePass };

struct DialogFailure {
    std::string seed_id;
    std::string error;
};

struct DialogBatch {
    std::vector<Dialog> dialogs;  // seed order
    std::vector<DialogFailure> failures;
};

DialogBatch generate_corpus(Client& client, Instructor& instructor, const std::vector<Seed>& seeds,
                            GenerationMode mode, const GeneratorOptions& opts = {},
                            std::size_t max_parallel = 1);

std::string dialog_id_for(const Seed& seed, GenerationMode mode);

}  // namespace solid

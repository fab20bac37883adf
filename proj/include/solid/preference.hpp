#pragma once

// Length-based quality tiers, canonical dialog rendering and
// chosen/rejected preference pairs.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "solid/seed.hpp"
#include "solid/serialize.hpp"

namespace solid {

enum class QualityTier { Excellent, Good, Average, Poor, VeryPoor };

// 1-3 Excellent, 4 Good, 5-10 Average, 11-15 Poor, 16-20 VeryPoor.
// Throws OutOfRange outside [1, 20].
QualityTier quality_tier(std::size_t n_utterances);

enum class PrefixCase { Capitalized, Lower };

// "Excellent quality dialog:", ...
std::string tier_prefix(QualityTier t, PrefixCase c = PrefixCase::Capitalized);
// Throws ParseError for unknown text (either case is accepted).
QualityTier tier_from_prefix(std::string_view prefix);

// The prefix used at inference time, whatever the target length.
std::string inference_prefix(PrefixCase c = PrefixCase::Capitalized);

// Optional tier line, then per turn "Utterance k:", "Text: ...",
// "Intent: <labels>", with a blank line between turns.
std::string render_dialog(const Dialog& d, std::optional<QualityTier> tier = std::nullopt,
                          PrefixCase c = PrefixCase::Capitalized);

inline constexpr std::string_view kAssistantCue = "<|assistant|>";

// Entity, type, background, starter and intent sequence, one per line.
std::string render_seed(const Seed& seed);

struct PreferenceMeta {
    std::string seed_id;
    std::size_t chosen_length = 0;
    std::size_t rejected_length = 0;
    bool length_mismatch = false;
};

struct PreferencePair {
    std::string prompt;
    std::string chosen;
    std::string rejected;
    PreferenceMeta meta;
};

struct PairOptions {
    bool use_lmq = true;
    PrefixCase prefix_case = PrefixCase::Capitalized;
};

// Prompt = seed rendering, assistant cue and (with LMQ) the tier of the
// chosen dialog's length. Throws SeedMismatch unless both dialogs belong
// to `seed`.
PreferencePair build_preference_pair(const Seed& seed, const Dialog& chosen, const Dialog& rejected,
                                     const PairOptions& opts = {});

struct PairBuild {
    std::vector<PreferencePair> pairs;  // seed order
    std::size_t missing_chosen = 0;
    std::size_t missing_rejected = 0;
    std::size_t dropped_unrenderable = 0;
};

// Joins chosen and rejected dialogs to seeds by seed_id.
PairBuild build_preference_pairs(const std::vector<Seed>& seeds, const std::vector<Dialog>& chosen,
                                 const std::vector<Dialog>& rejected, const PairOptions& opts = {});

Json pair_to_json(const PreferencePair& p);
PreferencePair pair_from_json(const Json& j, std::string_view locus = "pair");
void write_pairs_jsonl(const std::filesystem::path& path, const std::vector<PreferencePair>& pairs);
std::vector<PreferencePair> read_pairs_jsonl(const std::filesystem::path& path);

}  // namespace solid

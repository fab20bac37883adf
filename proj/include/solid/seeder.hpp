#pragma once

// Self-seeding: entity type -> attributes -> name -> background -> starter,
// plus intent sequences drawn with replacement from a reference corpus.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "solid/backend.hpp"
#include "solid/rng.hpp"
#include "solid/seed.hpp"

namespace solid {

// A multiset of intent sequences; multiplicity is repetition.
struct SequenceCorpus {
    std::vector<IntentSequence> sequences;

    bool empty() const noexcept { return sequences.empty(); }
    std::size_t size() const noexcept { return sequences.size(); }
};

enum class CorpusFormat { MsDialog, Canonical };

struct CorpusImport {
    SequenceCorpus corpus;
    std::size_t dropped_too_long = 0;
};

// Canonical: one sequence per line, "OQ; PA+IR; FD". Lines starting with
// '#' are comments. Throws ParseError with "<path>:<line>" or
// "<path>:<record id>".
CorpusImport import_sequence_corpus(const std::filesystem::path& path, CorpusFormat format);
CorpusImport parse_canonical_corpus(std::string_view content, std::string_view source);

// Uniform over entries (respecting multiplicity). Throws EmptyCorpus.
const IntentSequence& sample_intent_sequence(const SequenceCorpus& corpus, Rng& rng);

// Strips list markers, drops every character that is not a letter, digit,
// space, hyphen, apostrophe or period, collapses whitespace. Rejects empty
// results and results longer than 20 characters.
std::optional<std::string> filter_entity_name(std::string_view raw);

// One item per line; list markers stripped, blanks and case-insensitive
// duplicates dropped. Throws DegenerateOutput if fewer than n/2 survive.
std::vector<std::string> gen_entity_types(Client& client, int n, const GenerationParams& params);
std::vector<std::string> gen_entity_attributes(Client& client, std::string_view entity_type, int n,
                                               const GenerationParams& params);
// Throws PreconditionError for n < 1.
// Names surviving filter_entity_name that start with `letter`
// (case-insensitive). Throws DegenerateOutput when none survive.
std::vector<std::string> gen_entity_names(Client& client, std::string_view entity_type, char letter,
                                          int n, const GenerationParams& params);
std::string gen_background(Client& client, std::string_view entity_name, std::string_view entity_type,
                           const std::vector<std::string>& attributes, const GenerationParams& params);

// `seed` must have name, type and background set. When `markers` is set the
// prompt carries intent markers for the first sequence element.
std::string gen_conversation_starter(Client& client, const Seed& seed, const GenerationParams& params,
                                     const std::optional<IntentSet>& markers = std::nullopt);

// Number of candidate name slots of a full sweep: 26 letters x names per
// letter x entity types.
constexpr std::uint64_t name_sweep_budget(std::uint64_t types, std::uint64_t names_per_letter) {
    return 26 * names_per_letter * types;
}

std::string make_seed_id(std::string_view entity_name, const IntentSequence& seq, std::uint64_t draw);

struct SeederOptions {
    int entity_types = 100;
    int attributes_per_type = 10;
    int names_per_letter = 100;
    std::size_t max_parallel = 1;
    // Put "<<INTENT:xx>>" markers in the starter prompt (mock corpora).
    bool intent_markers = false;
    GenerationParams params;
};

struct SeedFailure {
    std::uint64_t index;
    std::string error;
};

struct SeedBatch {
    std::vector<Seed> seeds;  // submission order
    std::vector<SeedFailure> failures;
};

// Builds `budget` seeds; seed i draws from its own stream split off
// `rng_seed`, so results do not depend on scheduling. Individual failures
// are recorded and skipped; throws only if every seed fails.
SeedBatch build_seeds(Client& client, const SequenceCorpus& corpus, std::uint64_t budget,
                      std::uint64_t rng_seed, const SeederOptions& opts = {});

}  // namespace solid

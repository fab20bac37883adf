#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "solid/serialize.hpp"
#include "solid/taxonomy.hpp"

namespace solid {

// Everything a dialog is generated from: a self-generated entity with its
// background and opening question, plus the intent sequence to follow.
struct Seed {
    std::string id;
    std::string entity_type;
    std::vector<std::string> attributes;
    std::string entity_name;
    std::string background_document;
    std::string conversation_starter;
    IntentSequence intent_sequence;
    std::optional<bool> hallucinated;

    friend bool operator==(const Seed&, const Seed&) = default;
};

// Throws PreconditionError naming the violated invariant.
void validate_seed(const Seed& s);

Json seed_to_json(const Seed& s);
Seed seed_from_json(const Json& j, std::string_view locus = "seed");
std::vector<Seed> read_seeds_jsonl(const std::filesystem::path& path);
void write_seeds_jsonl(const std::filesystem::path& path, const std::vector<Seed>& seeds);

}  // namespace solid

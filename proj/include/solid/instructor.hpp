#pragma once

#include <filesystem>
#include <future>
#include <map>
#include <mutex>
#include <string>
#include <utility>

#include "solid/backend.hpp"
#include "solid/taxonomy.hpp"

namespace solid {

// Manually-crafted single-intent instruction for an actor. Total over
// every (actor, intent) pair.
const std::string& lookup_instruction(Actor actor, IntentCode intent);

// Asks the backend to merge the per-intent instructions of `intents`
// (at least two) into one. Throws PreconditionError for fewer than two
// intents and DegenerateOutput for an empty reply.
std::string merge_instructions(Client& client, Actor actor, const IntentSet& intents,
                               const GenerationParams& params);

// Rule-based alternative: single-intent instructions joined with " and ".
std::string join_instructions(Actor actor, const IntentSet& intents);

// Merged instructions keyed by (actor, canonical intent set). Concurrent
// misses on one key share a single backend call. Single-intent keys are
// never stored.
class InstructionCache {
public:
    using Key = std::pair<Actor, IntentSet::Mask>;

    std::string get_or_merge(Client& client, Actor actor, const IntentSet& intents,
                             const GenerationParams& params);

    std::size_t size() const;
    bool contains(Actor actor, const IntentSet& intents) const;

    // Sidecar file of {actor, intents:[codes], instruction} lines, sorted by key.
    void load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

private:
    mutable std::mutex mu_;
    std::map<Key, std::shared_future<std::string>> entries_;
};

struct InstructorOptions {
    bool use_cache = true;
    // Joins instructions with " and " instead of asking the backend.
    bool rule_based_merge = false;
};

class Instructor {
public:
    Instructor(Client& client, GenerationParams params, InstructorOptions opts = {})
        : client_(client), params_(std::move(params)), opts_(opts) {}

    // Singletons come from the table; multi-intent sets are merged (cached
    // unless disabled).
    std::string instruction_for(Actor actor, const IntentSet& intents);

    InstructionCache& cache() noexcept { return cache_; }

private:
    Client& client_;
    GenerationParams params_;
    InstructorOptions opts_;
    InstructionCache cache_;
};

}  // namespace solid

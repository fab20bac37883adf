#include "solid/instructor.hpp"

#include <array>

#include "solid/errors.hpp"
#include "solid/prompts.hpp"
#include "solid/serialize.hpp"
#include "solid/text.hpp"

namespace solid {

namespace {

using Row = std::array<std::string, kIntentCount>;

// Indexed by IntentCode declaration order: OQ RQ CQ FD FQ IR PA PF NF GG JK O.
const Row& user_rows() {
    static const Row kRows = {
        "Formulate the first question posed by a user that initiates a QA dialog.",
        "Now you are talking from the point of view of a third participant in the conversation. "
        "Repeat Question:",
        "Reply with one question asking for clarification in conversation style.",
        "Reply with more details in conversation style.",
        "Formulate a follow-up question from a user, seeking further clarification or information.",
        "Reply with relevant information.",
        "Provide a potential solution or answer in conversation style.",
        "Express satisfaction and appreciation for a working solution.",
        "Convey dissatisfaction for the previous response.",
        "Continue the conversation by expressing gratitude for the agent's help.",
        "Reply with gibberish information. It can contain emojis.",
        "Reply with a system error. Return N/A",
    };
    return kRows;
}

const Row& agent_rows() {
    static const Row kRows = {
        "Formulate an original question posed by an agent.",
        "Now you are talking from the point of view of a third participant in the conversation. "
        "Repeat Question:",
        "Reply with one follow-up response in conversation style.",
        "Reply with further details in conversation style.",
        "Formulate a follow-up question from an agent, seeking further clarification or information.",
        "Ask the user to provide relevant information needed for their previous question.",
        "Provide a potential solution or answer in conversation style.",
        "Express satisfaction and appreciation for the conversation.",
        "Convey dissatisfaction for the previous response.",
        "Continue the conversation by expressing gratitude for the user's questions.",
        "Reply with gibberish information. It can contain emojis.",
        "Reply with a system error. Return N/A",
    };
    return kRows;
}

std::vector<std::string> instructions_of(Actor actor, const IntentSet& intents) {
    std::vector<std::string> out;
    for (IntentCode c : intents.codes()) out.push_back(lookup_instruction(actor, c));
    return out;
}

}  // namespace

const std::string& lookup_instruction(Actor actor, IntentCode intent) {
    return (actor == Actor::User ? user_rows() : agent_rows())[index_of(intent)];
}

std::string merge_instructions(Client& client, Actor actor, const IntentSet& intents,
                               const GenerationParams& params) {
    if (intents.size() < 2) throw PreconditionError("merging needs at least two intents");
    const std::vector<ChatMessage> messages = {
        {ChatMessage::Role::User, prompts::merge_instructions(actor, instructions_of(actor, intents))},
    };
    std::string merged = text::collapse_whitespace(client.complete(messages, params));
    if (merged.empty()) throw DegenerateOutput("empty merged instruction");
    return merged;
}

std::string join_instructions(Actor actor, const IntentSet& intents) {
    return text::join(instructions_of(actor, intents), " and ");
}

std::string InstructionCache::get_or_merge(Client& client, Actor actor, const IntentSet& intents,
                                           const GenerationParams& params) {
    if (intents.size() < 2) throw PreconditionError("single-intent keys are not cached");
    const Key key{actor, intents.mask()};
    std::promise<std::string> promise;
    std::shared_future<std::string> fut;
    bool owner = false;
    {
        std::lock_guard lock(mu_);
        auto it = entries_.find(key);
        if (it != entries_.end()) {
            fut = it->second;
        } else {
            fut = promise.get_future().share();
            entries_.emplace(key, fut);
            owner = true;
        }
    }
    if (owner) {
        try {
            promise.set_value(merge_instructions(client, actor, intents, params));
        } catch (...) {
            // Waiters see the failure; the key is dropped so a later call retries.
            {
                std::lock_guard lock(mu_);
                entries_.erase(key);
            }
            promise.set_exception(std::current_exception());
        }
    }
    return fut.get();
}

std::size_t InstructionCache::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

bool InstructionCache::contains(Actor actor, const IntentSet& intents) const {
    std::lock_guard lock(mu_);
    return entries_.count({actor, intents.mask()}) != 0;
}

void InstructionCache::load(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) return;
    for_each_jsonl(path, [&](const Json& j, std::size_t line) {
        const std::string locus = path.string() + ":" + std::to_string(line);
        try {
            const Actor actor = parse_actor(j.at("actor").get<std::string>());
            std::vector<IntentCode> codes;
            for (const Json& c : j.at("intents")) codes.push_back(parse_intent_code(c.get<std::string>()));
            const IntentSet set = IntentSet::from_codes(codes);
            const std::string instruction = j.at("instruction").get<std::string>();
            if (set.size() < 2 || instruction.empty()) return;
            std::promise<std::string> p;
            p.set_value(instruction);
            std::lock_guard lock(mu_);
            entries_.insert_or_assign(Key{actor, set.mask()}, p.get_future().share());
        } catch (const std::exception& e) {
            throw ParseError(locus, e.what());
        }
    });
}

void InstructionCache::save(const std::filesystem::path& path) const {
    std::vector<Json> rows;
    {
        std::lock_guard lock(mu_);
        for (const auto& [key, fut] : entries_) {
            if (fut.wait_for(std::chrono::seconds(0)) != std::future_status::ready) continue;
            Json row;
            row["actor"] = std::string(actor_name(key.first));
            Json codes = Json::array();
            for (IntentCode c : IntentSet::from_mask(key.second).codes()) codes.push_back(std::string(code_of(c)));
            row["intents"] = std::move(codes);
            row["instruction"] = fut.get();
            rows.push_back(std::move(row));
        }
    }
    write_text_file(path, jsonl_of(rows));
}

std::string Instructor::instruction_for(Actor actor, const IntentSet& intents) {
    if (intents.is_single()) return lookup_instruction(actor, intents.first());
    if (opts_.rule_based_merge) return join_instructions(actor, intents);
    if (!opts_.use_cache) return merge_instructions(client_, actor, intents, params_);
    return cache_.get_or_merge(client_, actor, intents, params_);
}

}  // namespace solid

#include "solid/seed.hpp"

#include "solid/errors.hpp"

namespace solid {

void validate_seed(const Seed& s) {
    if (s.id.empty()) throw PreconditionError("seed id is empty");
    if (s.entity_type.empty()) throw PreconditionError("seed " + s.id + ": entity_type is empty");
    if (s.entity_name.empty()) throw PreconditionError("seed " + s.id + ": entity_name is empty");
    if (s.background_document.empty()) throw PreconditionError("seed " + s.id + ": background_document is empty");
    if (s.conversation_starter.empty()) throw PreconditionError("seed " + s.id + ": conversation_starter is empty");
    if (s.intent_sequence.empty() || s.intent_sequence.size() > kMaxDialogLength) {
        throw PreconditionError("seed " + s.id + ": intent_sequence length " +
                                std::to_string(s.intent_sequence.size()) + " outside [1, 20]");
    }
}

Json seed_to_json(const Seed& s) {
    Json j;
    j["id"] = s.id;
    j["entity_type"] = s.entity_type;
    j["attributes"] = s.attributes;
    j["entity_name"] = s.entity_name;
    j["background_document"] = s.background_document;
    j["conversation_starter"] = s.conversation_starter;
    j["intent_sequence"] = render_sequence(s.intent_sequence);
    if (s.hallucinated) j["hallucinated"] = *s.hallucinated;
    return j;
}

Seed seed_from_json(const Json& j, std::string_view locus) {
    const std::string where(locus);
    try {
        Seed s;
        s.id = j.at("id").get<std::string>();
        s.entity_type = j.at("entity_type").get<std::string>();
        if (j.contains("attributes")) s.attributes = j.at("attributes").get<std::vector<std::string>>();
        s.entity_name = j.at("entity_name").get<std::string>();
        s.background_document = j.at("background_document").get<std::string>();
        s.conversation_starter = j.at("conversation_starter").get<std::string>();
        s.intent_sequence = parse_sequence(j.at("intent_sequence").get<std::string>(), where);
        if (j.contains("hallucinated") && !j.at("hallucinated").is_null()) {
            s.hallucinated = j.at("hallucinated").get<bool>();
        }
        validate_seed(s);
        return s;
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(where, e.what());
    }
}

std::vector<Seed> read_seeds_jsonl(const std::filesystem::path& path) {
    std::vector<Seed> out;
    for_each_jsonl(path, [&](const Json& j, std::size_t line) {
        out.push_back(seed_from_json(j, path.string() + ":" + std::to_string(line)));
    });
    return out;
}

void write_seeds_jsonl(const std::filesystem::path& path, const std::vector<Seed>& seeds) {
    std::vector<Json> rows;
    rows.reserve(seeds.size());
    for (const Seed& s : seeds) rows.push_back(seed_to_json(s));
    write_text_file(path, jsonl_of(rows));
}

}  // namespace solid

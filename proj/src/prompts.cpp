#include "solid/prompts.hpp"

#include "solid/text.hpp"

namespace solid::prompts {

namespace {

constexpr std::string_view kListHead = "Provide a list of ";
constexpr std::string_view kTypesTail = " entity types.";
constexpr std::string_view kAttributesCue = " entity attributes associated with ";
constexpr std::string_view kNamesCue = " names of entities of type ";
constexpr std::string_view kBackgroundHead = "Write a background document about ";
constexpr std::string_view kStarterHead = "Write the conversation starter";
constexpr std::string_view kMergeHead = "Merge the following instructions";
constexpr std::string_view kSinglePassHead = "Generate a complete conversation";
constexpr std::string_view kFewShotHead = "Identify the intents of the target utterance";
constexpr std::string_view kTurnCue = "Conversation history:";

}  // namespace

const std::string_view kGlobalInstruction =
    "I will give you an entity, its type, a background document, a conversation history that "
    "ends in a question or statement, and an instruction. You are taking part in an "
    "information-seeking conversation between a user and an agent about the entity. Write only "
    "the next utterance of the conversation, following the instruction and staying consistent "
    "with the background document and the conversation history. Do not prefix the utterance "
    "with a speaker name and do not write more than one utterance.";

Kind classify(std::string_view m) {
    if (m.starts_with(kListHead)) {
        if (m.find(kTypesTail) != std::string_view::npos) return Kind::EntityTypes;
        if (m.find(kAttributesCue) != std::string_view::npos) return Kind::EntityAttributes;
        if (m.find(kNamesCue) != std::string_view::npos) return Kind::EntityNames;
    }
    if (m.find(kNamesCue) != std::string_view::npos) return Kind::EntityNames;
    if (m.starts_with(kBackgroundHead)) return Kind::Background;
    if (m.starts_with(kStarterHead)) return Kind::Starter;
    if (m.starts_with(kMergeHead)) return Kind::MergeInstructions;
    if (m.starts_with(kSinglePassHead)) return Kind::SinglePass;
    if (m.starts_with(kFewShotHead)) return Kind::FewShot;
    if (m.find(kTurnCue) != std::string_view::npos) return Kind::Turn;
    return Kind::Other;
}

std::optional<std::string> field(std::string_view prompt, std::string_view key) {
    for (const std::string& line : text::split_lines(prompt)) {
        if (line.size() > key.size() + 1 && line.starts_with(key) && line[key.size()] == ':') {
            return text::trim(std::string_view(line).substr(key.size() + 1));
        }
    }
    return std::nullopt;
}

std::string intent_marker(IntentCode c) {
    return "<<INTENT:" + text::to_lower(code_of(c)) + ">>";
}

std::string intent_markers(const IntentSet& set) {
    std::string out;
    for (IntentCode c : set.codes()) {
        if (!out.empty()) out += ' ';
        out += intent_marker(c);
    }
    return out;
}

std::vector<IntentCode> find_intent_markers(std::string_view s) {
    constexpr std::string_view kOpen = "<<INTENT:";
    std::vector<IntentCode> out;
    std::size_t pos = 0;
    while ((pos = s.find(kOpen, pos)) != std::string_view::npos) {
        const std::size_t start = pos + kOpen.size();
        const std::size_t close = s.find(">>", start);
        if (close == std::string_view::npos) break;
        if (auto c = try_parse_intent_code(s.substr(start, close - start))) out.push_back(*c);
        pos = close + 2;
    }
    return out;
}

std::string entity_types(int n) {
    return std::string(kListHead) + std::to_string(n) + std::string(kTypesTail);
}

std::string entity_attributes(std::string_view entity_type, int n) {
    return std::string(kListHead) + std::to_string(n) + std::string(kAttributesCue) +
           "the entity type \"" + std::string(entity_type) +
           "\" (for example for Person: Occupation, Financial). Write one attribute per line.\n"
           "Entity type: " +
           std::string(entity_type) + "\nCount: " + std::to_string(n);
}

const std::vector<std::string>& example_entity_names() {
    static const std::vector<std::string> kNames = {
        "Albert Einstein", "Amazon River", "Beethoven",    "Casablanca", "Daimler",
        "Everest",         "Frida Kahlo",  "Great Gatsby", "Hubble",     "Insulin",
    };
    return kNames;
}

std::string entity_names(std::string_view entity_type, char letter, int n) {
    std::string out = "Here are 10 examples of entity names:\n";
    for (const std::string& e : example_entity_names()) out += e + "\n";
    const std::string L(1, static_cast<char>(letter >= 'a' && letter <= 'z' ? letter - 32 : letter));
    out += std::string(kListHead) + std::to_string(n) + std::string(kNamesCue) + "\"" +
           std::string(entity_type) + "\" whose names start with the letter " + L +
           ". Write one name per line and nothing else.\n";
    out += "Entity type: " + std::string(entity_type) + "\nLetter: " + L +
           "\nCount: " + std::to_string(n);
    return out;
}

std::string background(std::string_view entity_name, std::string_view entity_type,
                       const std::vector<std::string>& attributes) {
    std::string out = std::string(kBackgroundHead) + std::string(entity_name) + ", a " +
                      std::string(entity_type) +
                      ". Write one informative paragraph that begins with the entity name.";
    if (!attributes.empty()) {
        out += " Where relevant, cover these attributes: " + text::join(attributes, ", ") + ".";
    }
    out += "\nEntity: " + std::string(entity_name) + "\nEntity type: " + std::string(entity_type);
    return out;
}

std::string render_context(const SeedContext& ctx) {
    return "Entity: " + ctx.entity_name + "\nEntity type: " + ctx.entity_type +
           "\nBackground document: " + ctx.background_document;
}

std::string starter(std::string_view entity_name, std::string_view entity_type,
                    std::string_view background_document, const std::optional<IntentSet>& markers) {
    std::string out = std::string(kStarterHead) +
                      " of an information-seeking conversation. Given the entity, its type and "
                      "its background document, write the first utterance a curious user would "
                      "say to the agent: a single, specific question about the entity.\n";
    out += render_context({std::string(entity_name), std::string(entity_type),
                           std::string(background_document)});
    if (markers) out += "\n" + intent_markers(*markers);
    return out;
}

std::string merge_instructions(Actor actor, const std::vector<std::string>& instructions) {
    std::string out = std::string(kMergeHead) +
                      " into one single instruction. Each instruction describes what the next "
                      "utterance of the " +
                      text::to_lower(actor_name(actor)) +
                      " in a conversation has to do. The merged instruction must ask for one "
                      "utterance that does all of them at once. Answer with the merged "
                      "instruction only.\n";
    for (std::size_t i = 0; i < instructions.size(); ++i) {
        out += "Instruction " + std::to_string(i + 1) + ": " + instructions[i] + "\n";
    }
    out += "Actor: " + std::string(actor_name(actor));
    return out;
}

std::string single_pass(const SeedContext& ctx, std::string_view conversation_starter,
                        const IntentSequence& sequence, bool with_markers) {
    std::string out = std::string(kSinglePassHead) +
                      " between a user and an agent about the entity below. The user speaks "
                      "first and the speakers alternate. The conversation has exactly " +
                      std::to_string(sequence.size()) +
                      " utterances, and utterance k must express the intents listed for it.\n";
    out += render_context(ctx);
    out += "\nConversation starter: " + std::string(conversation_starter);
    out += "\n\nIntent sequence:\n";
    for (std::size_t i = 0; i < sequence.size(); ++i) {
        out += "Utterance " + std::to_string(i + 1) + ": " + render_labels(sequence[i]);
        if (with_markers) out += " " + intent_markers(sequence[i]);
        out += "\n";
    }
    out +=
        "\nWrite each utterance in this format, with a blank line between utterances:\n"
        "Utterance <k>:\nText: <utterance text>\nIntent: <intents>";
    return out;
}

std::string few_shot(const std::vector<LabeledExample>& shots, std::string_view previous,
                     std::string_view target) {
    std::string out = std::string(kFewShotHead) +
                      " in an information-seeking conversation. Possible intents:\n";
    for (IntentCode c : kAllIntents) {
        out += std::string(code_of(c)) + " (" + std::string(label_of(c)) + ")\n";
    }
    out += "An utterance can have several intents. Answer with the codes separated by commas.\n\n";
    for (const LabeledExample& s : shots) {
        if (!s.previous.empty()) out += "Previous utterance: " + s.previous + "\n";
        out += "Utterance: " + s.utterance + "\nIntents: " + render_codes(s.intents, ", ") + "\n\n";
    }
    if (!previous.empty()) out += "Previous utterance: " + std::string(previous) + "\n";
    out += "Target utterance: " + std::string(target) + "\nIntents:";
    return out;
}

}  // namespace solid::prompts

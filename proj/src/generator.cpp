#include "solid/generator.hpp"

#include <cctype>

#include "solid/errors.hpp"
#include "solid/parallel.hpp"
#include "solid/rng.hpp"
#include "solid/text.hpp"

namespace solid {

namespace {

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }
bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']' || c == '}'; }

// Removes any number of leading "user:" / "agent:" keywords.
std::string_view strip_role_keywords(std::string_view line) {
    for (;;) {
        line = text::trim_view(line);
        bool stripped = false;
        for (std::string_view kw : {"user", "agent"}) {
            if (!text::istarts_with(line, kw)) continue;
            std::size_t i = kw.size();
            while (i < line.size() && text::is_space(line[i])) ++i;
            if (i < line.size() && line[i] == ':') {
                line.remove_prefix(i + 1);
                stripped = true;
                break;
            }
        }
        if (!stripped) return line;
    }
}

std::int64_t turn_seed(const GenerationParams& base, std::string_view seed_id, std::size_t turn, int attempt) {
    Fnv1a h;
    h.update(seed_id).update_u64(turn).update_u64(static_cast<std::uint64_t>(attempt));
    h.update_u64(static_cast<std::uint64_t>(base.request_seed.value_or(0)));
    return static_cast<std::int64_t>(h.digest() >> 1);
}

std::optional<std::size_t> utterance_header(std::string_view line, std::string& rest) {
    line = text::trim_view(line);
    constexpr std::string_view kHead = "utterance";
    if (!text::istarts_with(line, kHead)) return std::nullopt;
    std::size_t i = kHead.size();
    while (i < line.size() && text::is_space(line[i])) ++i;
    const std::size_t digits = i;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i == digits) return std::nullopt;
    const std::size_t k = std::stoul(std::string(line.substr(digits, i - digits)));
    while (i < line.size() && text::is_space(line[i])) ++i;
    if (i >= line.size() || line[i] != ':') return std::nullopt;
    rest = text::trim(line.substr(i + 1));
    return k;
}

// Value after "key:" (case-insensitive), if the line starts with it.
std::optional<std::string> labelled(std::string_view line, std::string_view key) {
    line = text::trim_view(line);
    if (!text::istarts_with(line, key)) return std::nullopt;
    std::string_view rest = line.substr(key.size());
    rest = text::trim_view(rest);
    if (rest.empty() || rest.front() != ':') return std::nullopt;
    return text::trim(rest.substr(1));
}

std::optional<IntentSet> read_intents(std::string field) {
    while (!field.empty() && (is_terminal(field.back()) || field.back() == ';')) field.pop_back();
    try {
        IntentSetSyntax syntax;
        syntax.accept_commas = true;
        return parse_intent_set(field, syntax);
    } catch (const Error&) {
        return std::nullopt;
    }
}

struct RawUtterance {
    std::string text;
    std::optional<IntentSet> intents;
};

bool has_alnum(std::string_view s) {
    for (unsigned char c : s) {
        if (std::isalnum(c) || c >= 0x80) return true;
    }
    return false;
}

std::string clean_text(const std::vector<std::string>& lines) {
    std::vector<std::string> parts;
    for (const std::string& l : lines) {
        std::string_view v = strip_role_keywords(l);
        if (!v.empty()) parts.emplace_back(v);
    }
    return text::collapse_whitespace(text::join(parts, " "));
}

std::vector<RawUtterance> parse_blocks(const std::vector<std::string>& lines) {
    std::vector<RawUtterance> out;
    bool in_block = false;
    std::vector<std::string> body;
    std::optional<IntentSet> intents;
    auto flush = [&] {
        if (!in_block) return;
        std::string t = clean_text(body);
        if (has_alnum(t)) out.push_back({std::move(t), intents});
        body.clear();
        intents.reset();
    };
    for (const std::string& line : lines) {
        std::string rest;
        if (utterance_header(line, rest)) {
            flush();
            in_block = true;
            if (!rest.empty()) body.push_back(rest);
            continue;
        }
        if (!in_block) continue;
        if (auto t = labelled(line, "text")) {
            body.push_back(*t);
        } else if (auto i = labelled(line, "intent")) {
            intents = read_intents(*i);
        } else if (auto i2 = labelled(line, "intents")) {
            intents = read_intents(*i2);
        } else if (!text::trim_view(line).empty()) {
            body.push_back(line);
        }
    }
    flush();
    return out;
}

std::vector<RawUtterance> parse_paragraphs(const std::vector<std::string>& lines) {
    std::vector<RawUtterance> out;
    std::vector<std::string> body;
    std::optional<IntentSet> intents;
    auto flush = [&] {
        std::string t = clean_text(body);
        if (has_alnum(t)) out.push_back({std::move(t), intents});
        body.clear();
        intents.reset();
    };
    for (const std::string& line : lines) {
        if (text::trim_view(line).empty()) {
            flush();
        } else if (auto i = labelled(line, "intent")) {
            intents = read_intents(*i);
        } else if (auto t = labelled(line, "text")) {
            body.push_back(*t);
        } else {
            body.push_back(line);
        }
    }
    flush();
    return out;
}

}  // namespace

std::string post_process(std::string_view raw) {
    std::size_t end = std::string_view::npos;
    for (std::size_t i = raw.size(); i-- > 0;) {
        if (is_terminal(raw[i])) {
            end = i + 1;
            break;
        }
    }
    if (end == std::string_view::npos) throw DegenerateOutput("no terminal punctuation");
    while (end < raw.size() && is_closer(raw[end])) ++end;

    std::vector<std::string> kept;
    for (const std::string& line : text::split_lines(raw.substr(0, end))) {
        std::string_view v = strip_role_keywords(line);
        if (!v.empty()) kept.emplace_back(v);
    }
    std::string out = text::trim(text::join(kept, "\n"));
    if (out.empty()) throw DegenerateOutput("empty utterance after post-processing");
    return out;
}

GenerationContext context_for(const Seed& seed) {
    GenerationContext ctx;
    ctx.seed = {seed.entity_name, seed.entity_type, seed.background_document};
    return ctx;
}

std::vector<ChatMessage> build_turn_prompt(const GenerationContext& ctx, std::string_view instruction,
                                           const std::optional<IntentSet>& markers) {
    if (text::trim_view(instruction).empty()) throw PreconditionError("instruction is empty");
    std::string user = prompts::render_context(ctx.seed);
    user += "\nConversation history:\n";
    for (const Utterance& u : ctx.history) {
        user += std::string(actor_name(u.actor)) + ": " + u.text + "\n";
    }
    user += "Instruction: " + std::string(instruction);
    user += "\nNext speaker: " + std::string(actor_name(actor_for_turn(ctx.history.size())));
    if (markers) user += "\n" + prompts::intent_markers(*markers);
    return {
        {ChatMessage::Role::System, std::string(ctx.global_instruction)},
        {ChatMessage::Role::User, std::move(user)},
    };
}

std::string dialog_id_for(const Seed& seed, GenerationMode mode) {
    return seed.id + (mode == GenerationMode::Turnwise ? "/turnwise" : "/singlepass");
}

Dialog generate_dialog(Client& client, Instructor& instructor, const Seed& seed, const GeneratorOptions& opts) {
    validate_seed(seed);
    Dialog d;
    d.id = dialog_id_for(seed, GenerationMode::Turnwise);
    d.seed_id = seed.id;

    GenerationContext ctx = context_for(seed);
    try {
        ctx.history.push_back({Actor::User, post_process(seed.conversation_starter), seed.intent_sequence[0], {}});
    } catch (const DegenerateOutput& e) {
        throw TurnFailure(0, e.what());
    }

    for (std::size_t k = 1; k < seed.intent_sequence.size(); ++k) {
        const IntentSet& intents = seed.intent_sequence[k];
        const Actor actor = actor_for_turn(k);
        std::string instruction;
        try {
            instruction = instructor.instruction_for(actor, intents);
        } catch (const std::exception& e) {
            throw TurnFailure(k, std::string("instruction: ") + e.what());
        }
        std::optional<IntentSet> markers;
        if (opts.intent_markers) markers = intents;
        const std::vector<ChatMessage> messages = build_turn_prompt(ctx, instruction, markers);

        std::optional<std::string> utterance;
        std::string last_error = "no attempts";
        for (int attempt = 0; attempt < std::max(1, opts.turn_attempts) && !utterance; ++attempt) {
            GenerationParams p = opts.params;
            p.request_seed = turn_seed(opts.params, seed.id, k, attempt);
            try {
                utterance = post_process(client.complete(messages, p));
            } catch (const DegenerateOutput& e) {
                last_error = e.what();
            } catch (const std::exception& e) {
                throw TurnFailure(k, e.what());
            }
        }
        if (!utterance) throw TurnFailure(k, last_error);
        ctx.history.push_back({actor, std::move(*utterance), intents, {}});
    }
    d.utterances = std::move(ctx.history);
    return d;
}

SinglePassParse parse_single_pass(std::string_view reply, const IntentSequence& sequence) {
    const std::vector<std::string> lines = text::split_lines(reply);
    std::vector<RawUtterance> raw = parse_blocks(lines);
    if (raw.empty()) raw = parse_paragraphs(lines);
    if (raw.empty()) throw Unparseable("no utterances recovered from single-pass reply");

    SinglePassParse out;
    if (raw.size() > kMaxDialogLength) {
        raw.resize(kMaxDialogLength);
        out.truncated = true;
    }
    for (std::size_t k = 0; k < raw.size(); ++k) {
        IntentSet intents{IntentCode::O};
        if (raw[k].intents) {
            intents = *raw[k].intents;
        } else if (k < sequence.size()) {
            intents = sequence[k];
        }
        out.utterances.push_back({actor_for_turn(k), std::move(raw[k].text), intents, {}});
    }
    return out;
}

Dialog generate_dialog_single_pass(Client& client, const Seed& seed, const GeneratorOptions& opts) {
    validate_seed(seed);
    const std::string prompt = prompts::single_pass(
        {seed.entity_name, seed.entity_type, seed.background_document}, seed.conversation_starter,
        seed.intent_sequence, opts.intent_markers);
    GenerationParams p = opts.params;
    p.request_seed = turn_seed(opts.params, seed.id, kMaxDialogLength + 1, 0);
    // The whole dialog comes back in one reply.
    p.max_tokens = std::max(p.max_tokens, 512 * static_cast<int>(seed.intent_sequence.size()));
    const std::string reply = client.complete(
        {{ChatMessage::Role::System, std::string(prompts::kGlobalInstruction)}, {ChatMessage::Role::User, prompt}}, p);

    SinglePassParse parsed = parse_single_pass(reply, seed.intent_sequence);
    Dialog d;
    d.id = dialog_id_for(seed, GenerationMode::SinglePass);
    d.seed_id = seed.id;
    d.utterances = std::move(parsed.utterances);
    d.length_mismatch = d.utterances.size() != seed.intent_sequence.size();
    return d;
}

DialogBatch generate_corpus(Client& client, Instructor& instructor, const std::vector<Seed>& seeds,
                            GenerationMode mode, const GeneratorOptions& opts, std::size_t max_parallel) {
    std::vector<std::optional<Dialog>> slots(seeds.size());
    std::vector<std::string> errors(seeds.size());
    parallel_for(seeds.size(), max_parallel, [&](std::size_t i) {
        try {
            slots[i] = mode == GenerationMode::Turnwise ? generate_dialog(client, instructor, seeds[i], opts)
                                                        : generate_dialog_single_pass(client, seeds[i], opts);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    DialogBatch batch;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (slots[i]) {
            batch.dialogs.push_back(std::move(*slots[i]));
        } else {
            batch.failures.push_back({seeds[i].id, errors[i]});
        }
    }
    return batch;
}

}  // namespace solid

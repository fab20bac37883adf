#include "solid/taxonomy.hpp"

#include <bit>

#include "solid/errors.hpp"
#include "solid/text.hpp"

namespace solid {

namespace {

struct IntentInfo {
    std::string_view code;
    std::string_view label;
};

constexpr std::array<IntentInfo, kIntentCount> kInfo = {{
    {"OQ", "original question"},
    {"RQ", "repeat question"},
    {"CQ", "clarifying question"},
    {"FD", "further details"},
    {"FQ", "follow up question"},
    {"IR", "information request"},
    {"PA", "potential answer"},
    {"PF", "positive feedback"},
    {"NF", "negative feedback"},
    {"GG", "greetings/gratitude"},
    {"JK", "junk"},
    {"O", "others"},
}};

}  // namespace

std::string_view code_of(IntentCode c) noexcept { return kInfo[index_of(c)].code; }
std::string_view label_of(IntentCode c) noexcept { return kInfo[index_of(c)].label; }

std::optional<IntentCode> try_parse_intent_code(std::string_view token) noexcept {
    const std::string_view t = text::trim_view(token);
    if (t.empty()) return std::nullopt;
    for (IntentCode c : kAllIntents) {
        if (text::iequals(t, code_of(c)) || text::iequals(t, label_of(c))) return c;
    }
    return std::nullopt;
}

IntentCode parse_intent_code(std::string_view token) {
    if (text::trim_view(token).empty()) throw PreconditionError("empty intent token");
    if (auto c = try_parse_intent_code(token)) return *c;
    throw UnknownIntent(std::string(token));
}

IntentSet::IntentSet(std::initializer_list<IntentCode> codes) : mask_(0) {
    for (IntentCode c : codes) mask_ |= bit(c);
    if (mask_ == 0) throw EmptySet("intent set must not be empty");
}

IntentSet IntentSet::from_mask(Mask mask) {
    if (mask == 0) throw EmptySet("intent set must not be empty");
    if ((mask & ~kFullMask) != 0) throw PreconditionError("intent mask outside taxonomy");
    return IntentSet(mask, 0);
}

IntentSet IntentSet::from_codes(const std::vector<IntentCode>& codes) {
    Mask m = 0;
    for (IntentCode c : codes) m |= bit(c);
    return from_mask(m);
}

std::size_t IntentSet::size() const noexcept { return static_cast<std::size_t>(std::popcount(mask_)); }

IntentCode IntentSet::first() const noexcept {
    return static_cast<IntentCode>(std::countr_zero(static_cast<unsigned>(mask_)));
}

std::vector<IntentCode> IntentSet::codes() const {
    std::vector<IntentCode> out;
    for (IntentCode c : kAllIntents) {
        if (contains(c)) out.push_back(c);
    }
    return out;
}

IntentSet parse_intent_set(std::string_view field, const IntentSetSyntax& syntax) {
    const std::string_view trimmed = text::trim_view(field);
    if (trimmed.empty()) throw PreconditionError("empty intent field");

    auto is_sep = [&](char c) {
        return text::is_space(c) || syntax.separators.find(c) != std::string::npos ||
               (syntax.accept_commas && c == ',');
    };

    // Full labels contain spaces ("potential answer"), so whitespace-split
    // pieces are re-joined greedily when a single piece is not a code.
    std::vector<std::string> pieces;
    std::string cur;
    for (char c : trimmed) {
        if (is_sep(c)) {
            if (!cur.empty()) pieces.push_back(std::move(cur));
            cur.clear();
            // Keep a marker so labels never span a non-space separator.
            if (!text::is_space(c)) pieces.emplace_back();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) pieces.push_back(std::move(cur));

    IntentSet::Mask mask = 0;
    std::size_t i = 0;
    while (i < pieces.size()) {
        if (pieces[i].empty()) {
            ++i;
            continue;
        }
        // Longest run of space-separated pieces forming a known label.
        std::size_t best_len = 0;
        std::optional<IntentCode> best;
        std::string joined;
        for (std::size_t j = i; j < pieces.size() && !pieces[j].empty() && j - i < 3; ++j) {
            if (j > i) joined += ' ';
            joined += pieces[j];
            if (auto c = try_parse_intent_code(joined)) {
                best = c;
                best_len = j - i + 1;
            }
        }
        if (!best) throw UnknownIntent(pieces[i]);
        mask |= IntentSet::bit(*best);
        i += best_len;
    }
    if (mask == 0) throw EmptySet("no intents in '" + std::string(trimmed) + "'");
    return IntentSet::from_mask(mask);
}

std::string render_labels(const IntentSet& set) {
    std::string out;
    for (IntentCode c : set.codes()) {
        if (!out.empty()) out += ", ";
        out += label_of(c);
    }
    return out;
}

std::string render_codes(const IntentSet& set, std::string_view joiner) {
    std::string out;
    for (IntentCode c : set.codes()) {
        if (!out.empty()) out += joiner;
        out += code_of(c);
    }
    return out;
}

std::string render_sequence(const IntentSequence& seq) {
    std::string out;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (i) out += "; ";
        out += render_codes(seq[i], "+");
    }
    return out;
}

void validate_sequence(const IntentSequence& seq) {
    if (seq.empty() || seq.size() > kMaxDialogLength) {
        throw PreconditionError("intent sequence length " + std::to_string(seq.size()) +
                                " outside [1, 20]");
    }
}

IntentSequence parse_sequence(std::string_view line, std::string_view locus) {
    const std::string_view t = text::trim_view(line);
    if (t.empty()) throw ParseError(std::string(locus), "empty intent sequence");
    IntentSequence seq;
    std::size_t start = 0;
    while (start <= t.size()) {
        std::size_t semi = t.find(';', start);
        if (semi == std::string_view::npos) semi = t.size();
        const std::string_view part = text::trim_view(t.substr(start, semi - start));
        if (part.empty()) throw ParseError(std::string(locus), "empty intent set in sequence");
        try {
            seq.push_back(parse_intent_set(part));
        } catch (const Error& e) {
            throw ParseError(std::string(locus), e.what());
        }
        start = semi + 1;
    }
    if (seq.size() > kMaxDialogLength) {
        throw ParseError(std::string(locus),
                         "sequence of length " + std::to_string(seq.size()) + " exceeds 20");
    }
    return seq;
}

std::string_view actor_name(Actor a) noexcept { return a == Actor::User ? "User" : "Agent"; }

Actor parse_actor(std::string_view name) {
    const std::string_view t = text::trim_view(name);
    if (text::iequals(t, "user")) return Actor::User;
    if (text::iequals(t, "agent")) return Actor::Agent;
    throw PreconditionError("unknown actor '" + std::string(name) + "'");
}

IntentSequence sequence_of(const Dialog& d) {
    IntentSequence seq;
    seq.reserve(d.utterances.size());
    for (const auto& u : d.utterances) seq.push_back(u.intents);
    return seq;
}

namespace {

const char* first_violation(const Dialog& d) {
    if (d.utterances.empty()) return "dialog has no utterances";
    if (d.utterances.size() > kMaxDialogLength) return "dialog longer than 20 utterances";
    for (std::size_t i = 0; i < d.utterances.size(); ++i) {
        const Utterance& u = d.utterances[i];
        if (u.actor != actor_for_turn(i)) return "actors do not alternate starting with User";
        if (u.text.empty()) return "empty utterance text";
        if (text::trim_view(u.text).size() != u.text.size())
            return "utterance text has surrounding whitespace";
        if (text::istarts_with(u.text, "User:") || text::istarts_with(u.text, "Agent:"))
            return "utterance text begins with a role keyword";
    }
    return nullptr;
}

}  // namespace

void validate_dialog(const Dialog& d) {
    if (const char* why = first_violation(d)) {
        throw InvalidDialog("dialog '" + d.id + "': " + why);
    }
}

bool is_valid_dialog(const Dialog& d) noexcept { return first_violation(d) == nullptr; }

void normalize_alternation(Dialog& d) {
    for (std::size_t i = 0; i < d.utterances.size(); ++i) {
        Utterance& u = d.utterances[i];
        const Actor expected = actor_for_turn(i);
        if (u.actor != expected) {
            if (!u.original_actor) u.original_actor = u.actor;
            u.actor = expected;
        }
    }
}

}  // namespace solid

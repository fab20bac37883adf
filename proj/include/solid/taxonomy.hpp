#pragma once

// Intent taxonomy, actors and the dialog data model shared by every stage
// of the pipeline.

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace solid {

// Declaration order is the canonical order used for rendering,
// serialization and the per-label breakdown of metrics.
enum class IntentCode : std::uint8_t {
    OQ,  // original question
    RQ,  // repeat question
    CQ,  // clarifying question
    FD,  // further details
    FQ,  // follow up question
    IR,  // information request
    PA,  // potential answer
    PF,  // positive feedback
    NF,  // negative feedback
    GG,  // greetings/gratitude
    JK,  // junk
    O,   // others
};

inline constexpr std::size_t kIntentCount = 12;

inline constexpr std::array<IntentCode, kIntentCount> kAllIntents = {
    IntentCode::OQ, IntentCode::RQ, IntentCode::CQ, IntentCode::FD,
    IntentCode::FQ, IntentCode::IR, IntentCode::PA, IntentCode::PF,
    IntentCode::NF, IntentCode::GG, IntentCode::JK, IntentCode::O,
};

constexpr std::size_t index_of(IntentCode c) noexcept { return static_cast<std::size_t>(c); }

std::string_view code_of(IntentCode c) noexcept;   // "OQ"
std::string_view label_of(IntentCode c) noexcept;  // "original question"

// Case-insensitive; accepts the two-letter code or the full label.
// Throws UnknownIntent.
IntentCode parse_intent_code(std::string_view token);
std::optional<IntentCode> try_parse_intent_code(std::string_view token) noexcept;

// Non-empty set of intents, stored as a bitmask so that equal sets compare
// and hash identically regardless of insertion order.
class IntentSet {
public:
    using Mask = std::uint16_t;
    static constexpr Mask kFullMask = (1u << kIntentCount) - 1;

    IntentSet(std::initializer_list<IntentCode> codes);
    explicit IntentSet(IntentCode code) noexcept : mask_(bit(code)) {}

    // Throws EmptySet for 0 and PreconditionError for bits outside the taxonomy.
    static IntentSet from_mask(Mask mask);
    static IntentSet from_codes(const std::vector<IntentCode>& codes);

    Mask mask() const noexcept { return mask_; }
    std::size_t size() const noexcept;
    bool contains(IntentCode c) const noexcept { return (mask_ & bit(c)) != 0; }
    bool is_single() const noexcept { return size() == 1; }
    IntentCode first() const noexcept;

    // Codes in canonical order.
    std::vector<IntentCode> codes() const;

    friend bool operator==(const IntentSet&, const IntentSet&) = default;
    friend bool operator<(const IntentSet& a, const IntentSet& b) noexcept {
        return a.mask_ < b.mask_;
    }

    static constexpr Mask bit(IntentCode c) noexcept {
        return static_cast<Mask>(1u << index_of(c));
    }

private:
    explicit IntentSet(Mask mask, int) noexcept : mask_(mask) {}
    Mask mask_;
};

struct IntentSetSyntax {
    // Every character in this string separates tokens; whitespace is
    // always a separator.
    std::string separators = "+";
    // Also split on commas (used for LLM replies such as "PA, IR").
    bool accept_commas = false;
};

// Parses "PA PF", "OQ+IR", ... Deduplicates. Throws UnknownIntent or EmptySet.
IntentSet parse_intent_set(std::string_view field, const IntentSetSyntax& syntax = {});

// "potential answer, information request"
std::string render_labels(const IntentSet& set);
// "PA+IR"
std::string render_codes(const IntentSet& set, std::string_view joiner = "+");

// Ordered per-utterance intent sets; length in [1, kMaxDialogLength].
using IntentSequence = std::vector<IntentSet>;

inline constexpr std::size_t kMaxDialogLength = 20;

// "OQ; PA+IR; FD"
std::string render_sequence(const IntentSequence& seq);
// Throws ParseError (with the given locus) on malformed text or a length
// outside [1, 20].
IntentSequence parse_sequence(std::string_view text, std::string_view locus = "sequence");
void validate_sequence(const IntentSequence& seq);

enum class Actor : std::uint8_t { User, Agent };

constexpr Actor actor_for_turn(std::size_t index) noexcept {
    return index % 2 == 0 ? Actor::User : Actor::Agent;
}
std::string_view actor_name(Actor a) noexcept;  // "User" / "Agent"
Actor parse_actor(std::string_view name);       // case-insensitive

struct Utterance {
    Actor actor = Actor::User;
    std::string text;
    IntentSet intents{IntentCode::O};
    // Set when import normalization re-assigned the speaker.
    std::optional<Actor> original_actor;

    friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct Dialog {
    std::string id;
    std::optional<std::string> seed_id;
    std::vector<Utterance> utterances;
    // Recorded by single-pass generation when the number of recovered
    // utterances differs from the requested intent sequence.
    std::optional<bool> length_mismatch;

    friend bool operator==(const Dialog&, const Dialog&) = default;
};

// The intent sequence carried by a dialog's utterances.
IntentSequence sequence_of(const Dialog& d);

// Throws InvalidDialog describing the first violated invariant.
void validate_dialog(const Dialog& d);
bool is_valid_dialog(const Dialog& d) noexcept;

// Re-assigns actors to strict User/Agent alternation, keeping the source
// speaker in original_actor when it differs.
void normalize_alternation(Dialog& d);

}  // namespace solid

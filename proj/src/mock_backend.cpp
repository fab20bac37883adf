#include "solid/mock_backend.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <thread>

#include "solid/errors.hpp"
#include "solid/prompts.hpp"
#include "solid/rng.hpp"
#include "solid/text.hpp"
#include "solid/tokenize.hpp"

namespace solid {

namespace {

constexpr std::string_view kEntityTypes[] = {
    "Person", "Historical Event", "Beverage", "Galaxy", "Author", "Deity", "Book",
    "Constellation", "Artist", "Mythology", "Song", "Astronomical Object", "Politician",
    "Mythical Creature", "Animal", "Natural Disaster", "Actor", "Supernatural Being", "Game",
    "Weather Phenomenon", "Musician", "Character (Fictional)", "Gadget", "Disease", "Celebrity",
    "Organization", "Software", "Medication", "Actress", "Company", "App", "Medical Procedure",
    "Athlete", "Government Agency", "Website", "Law", "Historical Figure",
    "Nonprofit Organization", "Social Media Platform", "Legal Case", "Entrepreneur", "Hospital",
    "Device", "Political Ideology", "Inventor", "University", "Instrument", "Social Movement",
    "Scientist", "Event", "Tool", "Philosophy", "Mathematician", "School", "Furniture",
    "Religion", "Philosopher", "Place", "Clothing", "Folklore", "Explorer", "Country", "Artwork",
    "Language", "Poet", "City", "Painting", "Brand", "Photographer", "Architectural Structure",
    "Sculpture", "Fashion Brand", "Journalist", "Festival", "Cuisine", "Style (Fashion, Art)",
    "Activist", "Conference", "Recipe", "Genre (Music, Film)", "Sportsperson", "Service",
    "Scientific Concept", "Technology", "Sport", "Product", "Chemical Element",
    "Programming Language", "Team", "Food", "Particle", "Movie", "League", "Vehicle", "Planet",
    "Historical Period", "Plant", "Star",
};

constexpr std::string_view kAttributes[] = {
    "Occupation", "Financial", "Location", "History", "Origin", "Size", "Age", "Influence",
    "Reputation", "Achievements", "Relations", "Style", "Members", "Materials", "Function",
    "Popularity", "Composition", "Lifespan", "Founders", "Impact", "Appearance", "Genre",
    "Education", "Awards", "Legacy", "Habitat", "Diet", "Ownership", "Structure", "Purpose",
    "Duration", "Symbolism",
};

// Neutral filler; deliberately contains no two-letter intent codes.
constexpr std::string_view kFiller[] = {
    "the", "river", "quiet", "morning", "report", "seems", "rather", "useful", "many",
    "people", "often", "consider", "simple", "question", "about", "history", "because", "it",
    "shows", "how", "things", "change", "over", "time", "when", "we", "look", "closer", "there",
    "is", "always", "something", "new", "to", "learn", "from", "each", "small", "detail",
    "and", "that", "makes", "whole", "topic", "worth", "careful", "study", "during", "long",
    "evenings", "some", "readers", "prefer", "brief", "notes", "while", "others", "enjoy",
    "lengthy", "chapters", "full", "of", "examples", "which", "explain", "main", "ideas",
    "clearly", "this", "matters", "for", "anyone", "curious", "enough", "ask", "further",
    "in", "most", "cases", "answer", "depends", "on", "context", "a", "good", "source", "can",
    "help", "settle", "doubts", "quickly", "with", "patience",
};

constexpr std::string_view kSyllables[] = {
    "an", "el", "or", "is", "ar", "en", "ol", "ur", "ia", "on", "ra", "li", "to", "ve", "no",
    "sa", "mi", "de", "ka", "ru",
};

class Stream {
public:
    explicit Stream(std::uint64_t seed) : rng_(seed) {}
    std::uint64_t below(std::uint64_t n) { return rng_.below(n); }

    std::string sentence(std::size_t min_words, std::size_t max_words,
                         const std::vector<std::string>& inserted = {}) {
        const std::size_t n = min_words + below(max_words - min_words + 1);
        std::vector<std::string> words;
        for (std::size_t i = 0; i < n; ++i) words.emplace_back(kFiller[below(std::size(kFiller))]);
        if (!inserted.empty()) {
            const std::size_t at = 1 + below(words.size());
            words.insert(words.begin() + static_cast<std::ptrdiff_t>(at), inserted.begin(), inserted.end());
        }
        std::string s = text::join(words, " ");
        s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
        return s + ".";
    }

    std::string name_with_letter(char upper) {
        std::string first(1, upper);
        const std::size_t syl = 1 + below(3);
        for (std::size_t i = 0; i < syl; ++i) first += kSyllables[below(std::size(kSyllables))];
        std::string last(1, static_cast<char>('A' + below(26)));
        const std::size_t syl2 = 1 + below(3);
        for (std::size_t i = 0; i < syl2; ++i) last += kSyllables[below(std::size(kSyllables))];
        return first + " " + last;
    }

private:
    Rng rng_;
};

int parse_count(std::string_view prompt, int fallback) {
    if (auto c = prompts::field(prompt, "Count")) {
        try {
            return std::max(0, std::stoi(*c));
        } catch (const std::exception&) {
        }
    }
    // "Provide a list of N ..."
    constexpr std::string_view kHead = "Provide a list of ";
    if (prompt.starts_with(kHead)) {
        try {
            return std::max(0, std::stoi(std::string(prompt.substr(kHead.size(), 8))));
        } catch (const std::exception&) {
        }
    }
    return fallback;
}

std::vector<std::string> marks_for(const std::vector<IntentCode>& codes) {
    std::vector<std::string> out;
    for (IntentCode c : codes) out.push_back("MARK_" + text::to_lower(code_of(c)));
    return out;
}

std::string ensure_period(std::string s) {
    s = text::trim(s);
    if (s.empty() || s.back() != '.') s += '.';
    return s;
}

std::string utterance_text(Stream& st, const std::vector<IntentCode>& codes) {
    std::string out = st.sentence(5, 10, marks_for(codes));
    const std::size_t extra = st.below(2);
    for (std::size_t i = 0; i < extra; ++i) out += " " + st.sentence(4, 9);
    return out;
}

std::string respond_single_pass(Stream& st, std::string_view prompt, std::uint64_t h) {
    const std::string starter = prompts::field(prompt, "Conversation starter").value_or("");
    struct Planned {
        std::string labels;
        std::vector<IntentCode> markers;
    };
    std::vector<Planned> plan;
    for (const std::string& line : text::split_lines(prompt)) {
        if (!line.starts_with("Utterance ")) continue;
        const std::size_t colon = line.find(':');
        if (colon == std::string::npos || colon + 1 >= line.size()) continue;
        std::string rest = text::trim(std::string_view(line).substr(colon + 1));
        if (rest.starts_with("<")) continue;  // format template line
        const std::size_t mk = rest.find("<<INTENT:");
        plan.push_back({text::trim(rest.substr(0, mk)), prompts::find_intent_markers(rest)});
    }
    if (plan.empty()) plan.push_back({"others", {}});

    // Single-pass generation is the low-quality side: it sometimes returns
    // too few or too many utterances.
    std::size_t count = plan.size();
    switch (h % 10) {
        case 0:
        case 1:
            count = std::max<std::size_t>(1, count - 1);
            break;
        case 2:
            count = std::min<std::size_t>(kMaxDialogLength, count + 1);
            break;
        default:
            break;
    }
    std::string out;
    for (std::size_t k = 0; k < count; ++k) {
        const bool planned = k < plan.size();
        const std::vector<IntentCode> codes = planned ? plan[k].markers : std::vector<IntentCode>{};
        std::string txt;
        if (k == 0 && !starter.empty()) {
            txt = starter;
            for (const std::string& m : marks_for(codes)) {
                if (txt.find(m) == std::string::npos) txt += " " + st.sentence(3, 6, {m});
            }
        } else {
            txt = utterance_text(st, codes);
        }
        if (k) out += "\n\n";
        out += "Utterance " + std::to_string(k + 1) + ":\nText: " + txt +
               "\nIntent: " + (planned ? plan[k].labels : std::string("others"));
    }
    return ensure_period(out);
}

std::string respond_few_shot(std::string_view prompt) {
    const std::string target = prompts::field(prompt, "Target utterance").value_or("");
    std::vector<std::string> codes;
    for (IntentCode c : kAllIntents) {
        const std::string mark = "mark_" + text::to_lower(code_of(c));
        const std::string lower = text::to_lower(target);
        std::size_t pos = 0;
        while ((pos = lower.find(mark, pos)) != std::string::npos) {
            const std::size_t end = pos + mark.size();
            if (end >= lower.size() || !std::isalnum(static_cast<unsigned char>(lower[end]))) {
                codes.emplace_back(code_of(c));
                break;
            }
            pos = end;
        }
    }
    if (codes.empty()) return "I am not sure.";
    return text::join(codes, ", ") + ".";
}

}  // namespace

std::uint64_t mock_request_hash(const std::vector<ChatMessage>& messages, const GenerationParams& params) {
    Fnv1a h;
    for (const ChatMessage& m : messages) {
        h.update(role_name(m.role)).update("\x1f").update(m.content).update("\x1e");
    }
    h.update(params.request_seed ? "seed" : "noseed");
    h.update_u64(static_cast<std::uint64_t>(params.request_seed.value_or(0)));
    return h.digest();
}

std::string MockBackend::respond(const std::vector<ChatMessage>& messages, const GenerationParams& params) {
    const std::uint64_t h = mock_request_hash(messages, params);
    Stream st(h);
    const std::string_view last = messages.empty() ? std::string_view{} : std::string_view(messages.back().content);
    switch (prompts::classify(last)) {
        case prompts::Kind::EntityTypes: {
            const int n = parse_count(last, 100);
            std::string out;
            const std::size_t offset = h % std::size(kEntityTypes);
            for (int i = 0; i < n; ++i) {
                out += std::to_string(i + 1) + ". " +
                       std::string(kEntityTypes[(offset + static_cast<std::size_t>(i)) % std::size(kEntityTypes)]) + "\n";
            }
            return ensure_period(out);
        }
        case prompts::Kind::EntityAttributes: {
            const int n = parse_count(last, 10);
            std::string out;
            const std::size_t offset = h % std::size(kAttributes);
            for (int i = 0; i < n; ++i) {
                out += std::to_string(i + 1) + ". " +
                       std::string(kAttributes[(offset + static_cast<std::size_t>(i)) % std::size(kAttributes)]) + "\n";
            }
            return ensure_period(out);
        }
        case prompts::Kind::EntityNames: {
            const int n = parse_count(last, 100);
            const std::string letter = prompts::field(last, "Letter").value_or("A");
            const char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(letter.empty() ? 'A' : letter[0])));
            std::string out;
            for (int i = 0; i < n; ++i) {
                std::string name = st.name_with_letter(upper);
                switch (st.below(12)) {
                    case 0:  // too long
                        name += " " + st.name_with_letter(upper) + " the Younger";
                        break;
                    case 1:  // markup residue
                        name = "**" + name + "**";
                        break;
                    case 2:  // wrong letter
                        name = st.name_with_letter(upper == 'Z' ? 'A' : static_cast<char>(upper + 1));
                        break;
                    default:
                        break;
                }
                out += std::to_string(i + 1) + ". " + name + "\n";
            }
            return ensure_period(out);
        }
        case prompts::Kind::Background: {
            const std::string name = prompts::field(last, "Entity").value_or("It");
            const std::string type = prompts::field(last, "Entity type").value_or("entity");
            std::string out = name + " was a notable " + text::to_lower(type) + ".";
            const std::size_t n = 2 + st.below(3);
            for (std::size_t i = 0; i < n; ++i) out += " " + st.sentence(6, 12);
            return out;
        }
        case prompts::Kind::Starter: {
            const std::string name = prompts::field(last, "Entity").value_or("it");
            std::string out = "Can you delve into the story of " + name + "?";
            out += " " + st.sentence(4, 8, marks_for(prompts::find_intent_markers(last)));
            return out;
        }
        case prompts::Kind::MergeInstructions: {
            std::vector<std::string> parts;
            for (std::size_t i = 1;; ++i) {
                auto ins = prompts::field(last, "Instruction " + std::to_string(i));
                if (!ins) break;
                parts.push_back(*ins);
            }
            std::string out = "Write one utterance that does all of the following.";
            for (std::size_t i = 0; i < parts.size(); ++i) {
                out += (i == 0 ? " First: " : " Also: ") + parts[i];
            }
            return ensure_period(out);
        }
        case prompts::Kind::SinglePass:
            return respond_single_pass(st, last, h);
        case prompts::Kind::FewShot:
            return respond_few_shot(last);
        case prompts::Kind::Turn:
        case prompts::Kind::Other: {
            std::string out = utterance_text(st, prompts::find_intent_markers(last));
            if (st.below(7) == 0) out = "Agent: " + out;
            return out;
        }
    }
    return "Okay.";
}

EmbeddingVector MockBackend::embed_one(std::string_view text, std::size_t dim) {
    EmbeddingVector v(dim, 0.0);
    for (const std::string& tok : tokenize(text)) v[fnv1a(tok) % dim] += 1.0;
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
    }
    return v;
}

std::string MockBackend::complete(const std::vector<ChatMessage>& messages, const GenerationParams& params) {
    validate_request(messages, params);
    complete_calls_.fetch_add(1);
    const std::size_t now = in_flight_.fetch_add(1) + 1;
    std::size_t peak = peak_in_flight_.load();
    while (now > peak && !peak_in_flight_.compare_exchange_weak(peak, now)) {
    }
    if (opts_.latency.count() > 0) std::this_thread::sleep_for(opts_.latency);
    std::string out = respond(messages, params);
    in_flight_.fetch_sub(1);
    return out;
}

std::vector<EmbeddingVector> MockBackend::embed(const std::vector<std::string>& texts) {
    validate_embed_request(texts);
    embed_calls_.fetch_add(1);
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const std::string& t : texts) out.push_back(embed_one(t, opts_.embedding_dim));
    return out;
}

void MockBackend::reset_counters() noexcept {
    complete_calls_ = 0;
    embed_calls_ = 0;
    peak_in_flight_ = 0;
}

}  // namespace solid

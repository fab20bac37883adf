#include "solid/preference.hpp"

#include <map>

#include "solid/errors.hpp"
#include "solid/text.hpp"

namespace solid {

namespace {

constexpr std::string_view kPrefixes[] = {
    "Excellent quality dialog:", "Good quality dialog:", "Average quality dialog:",
    "Poor quality dialog:",      "Very poor quality dialog:",
};

}  // namespace

QualityTier quality_tier(std::size_t n) {
    if (n < 1 || n > kMaxDialogLength) {
        throw OutOfRange("dialog length " + std::to_string(n) + " outside [1, 20]");
    }
    if (n <= 3) return QualityTier::Excellent;
    if (n == 4) return QualityTier::Good;
    if (n <= 10) return QualityTier::Average;
    if (n <= 15) return QualityTier::Poor;
    return QualityTier::VeryPoor;
}

std::string tier_prefix(QualityTier t, PrefixCase c) {
    std::string s(kPrefixes[static_cast<int>(t)]);
    return c == PrefixCase::Lower ? text::to_lower(s) : s;
}

QualityTier tier_from_prefix(std::string_view prefix) {
    const std::string_view p = text::trim_view(prefix);
    for (int i = 0; i < 5; ++i) {
        if (text::iequals(p, kPrefixes[i])) return static_cast<QualityTier>(i);
    }
    throw ParseError("tier", "unknown quality prefix '" + std::string(p) + "'");
}

std::string inference_prefix(PrefixCase c) { return tier_prefix(QualityTier::Excellent, c); }

std::string render_dialog(const Dialog& d, std::optional<QualityTier> tier, PrefixCase c) {
    std::string out;
    if (tier) out += tier_prefix(*tier, c) + "\n";
    for (std::size_t k = 0; k < d.utterances.size(); ++k) {
        const Utterance& u = d.utterances[k];
        if (k) out += "\n";
        out += "Utterance " + std::to_string(k + 1) + ":\nText: " + u.text + "\nIntent: " +
               render_labels(u.intents) + "\n";
    }
    return out;
}

std::string render_seed(const Seed& s) {
    return "Entity: " + s.entity_name + "\nEntity type: " + s.entity_type +
           "\nBackground document: " + s.background_document +
           "\nConversation starter: " + s.conversation_starter +
           "\nIntent sequence: " + render_sequence(s.intent_sequence);
}

PreferencePair build_preference_pair(const Seed& seed, const Dialog& chosen, const Dialog& rejected,
                                     const PairOptions& opts) {
    if (chosen.seed_id != seed.id || rejected.seed_id != seed.id) {
        throw SeedMismatch("pair for seed " + seed.id + " got chosen=" + chosen.seed_id.value_or("<none>") +
                           " rejected=" + rejected.seed_id.value_or("<none>"));
    }
    PreferencePair p;
    p.prompt = render_seed(seed) + "\n" + std::string(kAssistantCue);
    if (opts.use_lmq) p.prompt += "\n" + tier_prefix(quality_tier(chosen.utterances.size()), opts.prefix_case);
    p.chosen = render_dialog(chosen);
    p.rejected = render_dialog(rejected);
    p.meta.seed_id = seed.id;
    p.meta.chosen_length = chosen.utterances.size();
    p.meta.rejected_length = rejected.utterances.size();
    p.meta.length_mismatch = rejected.length_mismatch.value_or(p.meta.chosen_length != p.meta.rejected_length);
    return p;
}

PairBuild build_preference_pairs(const std::vector<Seed>& seeds, const std::vector<Dialog>& chosen,
                                 const std::vector<Dialog>& rejected, const PairOptions& opts) {
    std::map<std::string, const Dialog*> by_chosen, by_rejected;
    for (const Dialog& d : chosen) {
        if (d.seed_id) by_chosen.emplace(*d.seed_id, &d);
    }
    for (const Dialog& d : rejected) {
        if (d.seed_id) by_rejected.emplace(*d.seed_id, &d);
    }
    PairBuild out;
    for (const Seed& s : seeds) {
        auto c = by_chosen.find(s.id);
        auto r = by_rejected.find(s.id);
        if (c == by_chosen.end()) {
            ++out.missing_chosen;
            continue;
        }
        if (r == by_rejected.end()) {
            ++out.missing_rejected;
            continue;
        }
        if (!is_valid_dialog(*c->second) || !is_valid_dialog(*r->second)) {
            ++out.dropped_unrenderable;
            continue;
        }
        out.pairs.push_back(build_preference_pair(s, *c->second, *r->second, opts));
    }
    return out;
}

Json pair_to_json(const PreferencePair& p) {
    Json j;
    j["prompt"] = p.prompt;
    j["chosen"] = p.chosen;
    j["rejected"] = p.rejected;
    j["meta"] = {
        {"seed_id", p.meta.seed_id},
        {"chosen_length", p.meta.chosen_length},
        {"rejected_length", p.meta.rejected_length},
        {"length_mismatch", p.meta.length_mismatch},
    };
    return j;
}

PreferencePair pair_from_json(const Json& j, std::string_view locus) {
    try {
        PreferencePair p;
        p.prompt = j.at("prompt").get<std::string>();
        p.chosen = j.at("chosen").get<std::string>();
        p.rejected = j.at("rejected").get<std::string>();
        const Json& m = j.at("meta");
        p.meta.seed_id = m.at("seed_id").get<std::string>();
        p.meta.chosen_length = m.at("chosen_length").get<std::size_t>();
        p.meta.rejected_length = m.at("rejected_length").get<std::size_t>();
        p.meta.length_mismatch = m.at("length_mismatch").get<bool>();
        return p;
    } catch (const std::exception& e) {
        throw ParseError(std::string(locus), e.what());
    }
}

void write_pairs_jsonl(const std::filesystem::path& path, const std::vector<PreferencePair>& pairs) {
    std::vector<Json> rows;
    rows.reserve(pairs.size());
    for (const PreferencePair& p : pairs) rows.push_back(pair_to_json(p));
    write_text_file(path, jsonl_of(rows));
}

std::vector<PreferencePair> read_pairs_jsonl(const std::filesystem::path& path) {
    std::vector<PreferencePair> out;
    for_each_jsonl(path, [&](const Json& j, std::size_t line) {
        out.push_back(pair_from_json(j, path.string() + ":" + std::to_string(line)));
    });
    return out;
}

}  // namespace solid

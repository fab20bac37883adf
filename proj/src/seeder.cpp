#include "solid/seeder.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "solid/errors.hpp"
#include "solid/generator.hpp"
#include "solid/log.hpp"
#include "solid/parallel.hpp"
#include "solid/prompts.hpp"
#include "solid/serialize.hpp"
#include "solid/text.hpp"

namespace solid {

namespace {

std::string ask(Client& client, const std::string& prompt, const GenerationParams& params) {
    return client.complete({{ChatMessage::Role::User, prompt}}, params);
}

std::string strip_trailing_period(std::string s) {
    while (!s.empty() && s.back() == '.') s.pop_back();
    return text::trim(s);
}

// Non-empty list items, case-insensitively deduplicated, in reply order.
std::vector<std::string> parse_list(std::string_view reply) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const std::string& line : text::split_lines(reply)) {
        std::string item = strip_trailing_period(text::collapse_whitespace(text::strip_list_marker(line)));
        if (item.empty()) continue;
        if (seen.insert(text::to_lower(item)).second) out.push_back(std::move(item));
    }
    return out;
}

GenerationParams with_seed(GenerationParams p, std::uint64_t seed) {
    p.request_seed = static_cast<std::int64_t>(seed >> 1);
    return p;
}

bool keep_name_char(char32_t cp) {
    if (cp < 0x80) {
        const auto c = static_cast<unsigned char>(cp);
        return std::isalnum(c) || c == ' ' || c == '-' || c == '\'' || c == '.';
    }
    return text::is_unicode_letter(cp);
}

std::string filter_once(std::string_view raw) {
    std::string s = text::strip_list_marker(raw);
    std::vector<char32_t> cps = text::decode_utf8(s);
    std::vector<char32_t> kept;
    kept.reserve(cps.size());
    for (char32_t cp : cps) {
        if (cp == '\t' || cp == '\n' || cp == '\r') cp = ' ';
        if (keep_name_char(cp)) kept.push_back(cp);
    }
    return text::collapse_whitespace(text::encode_utf8(kept));
}

}  // namespace

CorpusImport parse_canonical_corpus(std::string_view content, std::string_view source) {
    CorpusImport out;
    std::size_t n = 0;
    for (const std::string& line : text::split_lines(content)) {
        ++n;
        const std::string t = text::trim(line);
        if (t.empty() || t.starts_with("#")) continue;
        const std::string locus = std::string(source) + ":" + std::to_string(n);
        // Count pieces first so over-long sequences are dropped, not errors.
        std::size_t pieces = 1;
        for (char c : t) pieces += c == ';';
        if (pieces > kMaxDialogLength) {
            ++out.dropped_too_long;
            continue;
        }
        out.corpus.sequences.push_back(parse_sequence(t, locus));
    }
    return out;
}

CorpusImport import_sequence_corpus(const std::filesystem::path& path, CorpusFormat format) {
    if (format == CorpusFormat::Canonical) return parse_canonical_corpus(read_text_file(path), path.string());
    MsDialogImport ms = import_msdialog(path);
    CorpusImport out;
    out.dropped_too_long = ms.dropped_too_long;
    for (const Dialog& d : ms.dialogs) {
        if (!d.utterances.empty()) out.corpus.sequences.push_back(sequence_of(d));
    }
    return out;
}

const IntentSequence& sample_intent_sequence(const SequenceCorpus& corpus, Rng& rng) {
    if (corpus.empty()) throw EmptyCorpus("intent sequence corpus is empty");
    return corpus.sequences[rng.below(corpus.size())];
}

std::optional<std::string> filter_entity_name(std::string_view raw) {
    std::string cur = filter_once(raw);
    for (std::string next = filter_once(cur); next != cur; next = filter_once(cur)) cur = std::move(next);
    if (cur.empty() || text::utf8_length(cur) > 20) return std::nullopt;
    return cur;
}

std::vector<std::string> gen_entity_types(Client& client, int n, const GenerationParams& params) {
    if (n <= 0) throw PreconditionError("entity type count must be positive");
    std::vector<std::string> types = parse_list(ask(client, prompts::entity_types(n), params));
    if (static_cast<int>(types.size()) * 2 < n) {
        throw DegenerateOutput("only " + std::to_string(types.size()) + " of " + std::to_string(n) +
                               " entity types");
    }
    if (static_cast<int>(types.size()) > n) types.resize(static_cast<std::size_t>(n));
    return types;
}

std::vector<std::string> gen_entity_attributes(Client& client, std::string_view entity_type, int n,
                                               const GenerationParams& params) {
    if (n <= 0) throw PreconditionError("attribute count must be positive");
    std::vector<std::string> attrs = parse_list(ask(client, prompts::entity_attributes(entity_type, n), params));
    if (static_cast<int>(attrs.size()) > n) attrs.resize(static_cast<std::size_t>(n));
    return attrs;
}

std::vector<std::string> gen_entity_names(Client& client, std::string_view entity_type, char letter,
                                          int n, const GenerationParams& params) {
    if (n <= 0) throw PreconditionError("name count must be positive");
    const char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(letter)));
    if (upper < 'A' || upper > 'Z') throw PreconditionError("letter must be A-Z");
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const std::string& line : text::split_lines(ask(client, prompts::entity_names(entity_type, upper, n), params))) {
        auto name = filter_entity_name(strip_trailing_period(text::trim(line)));
        if (!name) continue;
        if (std::toupper(static_cast<unsigned char>((*name)[0])) != upper) continue;
        if (seen.insert(text::to_lower(*name)).second) out.push_back(std::move(*name));
    }
    if (out.empty()) {
        throw DegenerateOutput("no usable names for " + std::string(entity_type) + "/" + std::string(1, upper));
    }
    return out;
}

std::string gen_background(Client& client, std::string_view entity_name, std::string_view entity_type,
                           const std::vector<std::string>& attributes, const GenerationParams& params) {
    if (text::trim_view(entity_name).empty()) throw PreconditionError("entity name is empty");
    std::string doc = text::trim(ask(client, prompts::background(entity_name, entity_type, attributes), params));
    if (doc.empty()) throw DegenerateOutput("empty background document");
    return doc;
}

std::string gen_conversation_starter(Client& client, const Seed& seed, const GenerationParams& params,
                                     const std::optional<IntentSet>& markers) {
    if (seed.entity_name.empty() || seed.background_document.empty()) {
        throw PreconditionError("starter needs an entity name and a background document");
    }
    const std::string prompt =
        prompts::starter(seed.entity_name, seed.entity_type, seed.background_document, markers);
    return post_process(text::collapse_whitespace(ask(client, prompt, params)));
}

std::string make_seed_id(std::string_view entity_name, const IntentSequence& seq, std::uint64_t draw) {
    Fnv1a h;
    h.update(entity_name).update("\x1f").update(render_sequence(seq)).update("\x1f").update_u64(draw);
    return "seed-" + hex64(h.digest());
}

SeedBatch build_seeds(Client& client, const SequenceCorpus& corpus, std::uint64_t budget,
                      std::uint64_t rng_seed, const SeederOptions& opts) {
    if (corpus.empty()) throw EmptyCorpus("intent sequence corpus is empty");
    if (budget == 0) throw PreconditionError("seed budget must be positive");

    const std::vector<std::string> types =
        gen_entity_types(client, opts.entity_types, with_seed(opts.params, splitmix64(rng_seed)));

    SingleFlight<std::string, std::vector<std::string>> attributes;
    SingleFlight<std::pair<std::string, char>, std::vector<std::string>> names;

    // Cached requests are seeded by their key, not by whichever seed asked
    // first, so the cache contents do not depend on scheduling.
    auto key_seed = [&](std::string_view a, char b) {
        return Fnv1a{}.update_u64(rng_seed).update(a).update(std::string_view(&b, 1)).digest();
    };

    std::vector<std::optional<Seed>> slots(budget);
    std::vector<std::string> errors(budget);

    parallel_for(budget, opts.max_parallel, [&](std::size_t i) {
        try {
            Rng rng = Rng::split(rng_seed, i);
            Seed s;
            s.entity_type = types[rng.below(types.size())];
            const char letter = static_cast<char>('A' + rng.below(26));
            const std::vector<std::string> pool = names.get({s.entity_type, letter}, [&] {
                return gen_entity_names(client, s.entity_type, letter, opts.names_per_letter,
                                        with_seed(opts.params, key_seed(s.entity_type, letter)));
            });
            s.entity_name = pool[rng.below(pool.size())];
            s.intent_sequence = sample_intent_sequence(corpus, rng);
            s.attributes = attributes.get(s.entity_type, [&] {
                return gen_entity_attributes(client, s.entity_type, opts.attributes_per_type,
                                             with_seed(opts.params, key_seed(s.entity_type, '#')));
            });
            s.background_document =
                gen_background(client, s.entity_name, s.entity_type, s.attributes, with_seed(opts.params, rng.next()));
            std::optional<IntentSet> markers;
            if (opts.intent_markers) markers = s.intent_sequence.front();
            s.conversation_starter =
                gen_conversation_starter(client, s, with_seed(opts.params, rng.next()), markers);
            s.id = make_seed_id(s.entity_name, s.intent_sequence, i);
            validate_seed(s);
            slots[i] = std::move(s);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    SeedBatch batch;
    for (std::size_t i = 0; i < budget; ++i) {
        if (slots[i]) {
            batch.seeds.push_back(std::move(*slots[i]));
        } else {
            log::warn("seed " + std::to_string(i) + " skipped: " + errors[i]);
            batch.failures.push_back({i, errors[i]});
        }
    }
    if (batch.seeds.empty()) throw Error("every seed failed; first error: " + batch.failures.front().error);
    return batch;
}

}  // namespace solid

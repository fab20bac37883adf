#include "solid/serialize.hpp"

#include <fstream>
#include <sstream>

#include "solid/errors.hpp"
#include "solid/text.hpp"

namespace solid {

Json dialog_to_json(const Dialog& d) {
    Json j;
    j["id"] = d.id;
    j["seed_id"] = d.seed_id ? Json(*d.seed_id) : Json(nullptr);
    Json utts = Json::array();
    for (const Utterance& u : d.utterances) {
        Json ju;
        ju["actor"] = std::string(actor_name(u.actor));
        ju["text"] = u.text;
        Json codes = Json::array();
        for (IntentCode c : u.intents.codes()) codes.push_back(std::string(code_of(c)));
        ju["intents"] = std::move(codes);
        if (u.original_actor) ju["original_actor"] = std::string(actor_name(*u.original_actor));
        utts.push_back(std::move(ju));
    }
    j["utterances"] = std::move(utts);
    if (d.length_mismatch) j["length_mismatch"] = *d.length_mismatch;
    return j;
}

Dialog dialog_from_json(const Json& j, std::string_view locus) {
    const std::string where(locus);
    try {
        if (!j.is_object()) throw ParseError(where, "expected a JSON object");
        Dialog d;
        d.id = j.at("id").get<std::string>();
        if (j.contains("seed_id") && !j["seed_id"].is_null()) {
            d.seed_id = j["seed_id"].get<std::string>();
        }
        for (const Json& ju : j.at("utterances")) {
            Utterance u;
            u.actor = parse_actor(ju.at("actor").get<std::string>());
            u.text = ju.at("text").get<std::string>();
            std::vector<IntentCode> codes;
            for (const Json& c : ju.at("intents")) codes.push_back(parse_intent_code(c.get<std::string>()));
            u.intents = IntentSet::from_codes(codes);
            if (ju.contains("original_actor")) {
                u.original_actor = parse_actor(ju["original_actor"].get<std::string>());
            }
            d.utterances.push_back(std::move(u));
        }
        if (j.contains("length_mismatch")) d.length_mismatch = j["length_mismatch"].get<bool>();
        return d;
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(where, e.what());
    }
}

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const Json&, std::size_t)>& fn) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (text::trim_view(line).empty()) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const std::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(n), e.what());
        }
        fn(j, n);
    }
}

std::vector<Dialog> read_dialogs_jsonl(const std::filesystem::path& path) {
    std::vector<Dialog> out;
    for_each_jsonl(path, [&](const Json& j, std::size_t line) {
        out.push_back(dialog_from_json(j, path.string() + ":" + std::to_string(line)));
    });
    return out;
}

std::string jsonl_of(const std::vector<Json>& rows) {
    std::string out;
    for (const Json& r : rows) {
        out += r.dump();
        out += '\n';
    }
    return out;
}

void write_dialogs_jsonl(const std::filesystem::path& path, const std::vector<Dialog>& dialogs) {
    std::string out;
    for (const Dialog& d : dialogs) {
        out += dialog_to_json(d).dump();
        out += '\n';
    }
    write_text_file(path, out);
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

MsDialogImport import_msdialog_json(const Json& root, const std::string& source) {
    if (!root.is_object()) throw ParseError(source, "MSDialog file must be a JSON object");
    MsDialogImport out;
    for (const auto& [id, rec] : root.items()) {
        const std::string locus = source + ":" + id;
        if (!rec.is_object() || !rec.contains("utterances")) {
            throw ParseError(locus, "record has no 'utterances' list");
        }
        const Json& utts = rec["utterances"];
        if (!utts.is_array() || utts.empty()) throw ParseError(locus, "empty 'utterances'");
        if (utts.size() > kMaxDialogLength) {
            ++out.dropped_too_long;
            continue;
        }
        Dialog d;
        d.id = id;
        for (std::size_t i = 0; i < utts.size(); ++i) {
            const Json& u = utts[i];
            const std::string ulocus = locus + "#" + std::to_string(i);
            Utterance utt;
            try {
                utt.intents = parse_intent_set(u.at("tags").get<std::string>());
            } catch (const std::exception& e) {
                throw ParseError(ulocus, e.what());
            }
            if (u.contains("utterance") && u["utterance"].is_string()) {
                utt.text = text::trim(u["utterance"].get<std::string>());
            }
            if (utt.text.empty()) utt.text = "(empty)";
            utt.actor = actor_for_turn(i);
            if (u.contains("actor_type") && u["actor_type"].is_string()) {
                const std::string a = u["actor_type"].get<std::string>();
                if (text::iequals(a, "user") || text::iequals(a, "agent")) {
                    utt.actor = parse_actor(a);
                }
            }
            d.utterances.push_back(std::move(utt));
        }
        normalize_alternation(d);
        out.dialogs.push_back(std::move(d));
    }
    return out;
}

}  // namespace

MsDialogImport import_msdialog(const std::filesystem::path& path) {
    Json root;
    try {
        root = Json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string(), e.what());
    }
    return import_msdialog_json(root, path.string());
}

std::vector<Dialog> load_dialogs(const std::filesystem::path& path) {
    const std::string content = read_text_file(path);
    // A single top-level object without an "utterances" key is MSDialog.
    try {
        Json root = Json::parse(content);
        if (root.is_object() && !root.contains("utterances")) {
            return import_msdialog_json(root, path.string()).dialogs;
        }
    } catch (const nlohmann::json::exception&) {
        // multiple lines: JSON lines
    }
    return read_dialogs_jsonl(path);
}

}  // namespace solid

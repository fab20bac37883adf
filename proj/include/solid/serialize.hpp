#pragma once

// JSON-lines encodings shared by every module. Field names here are the
// on-disk contract; other tools key on them.

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "solid/taxonomy.hpp"

namespace solid {

using Json = nlohmann::ordered_json;

Json dialog_to_json(const Dialog& d);
// `locus` is prefixed to error messages, e.g. "dialogs.jsonl:12".
Dialog dialog_from_json(const Json& j, std::string_view locus = "dialog");

std::vector<Dialog> read_dialogs_jsonl(const std::filesystem::path& path);
void write_dialogs_jsonl(const std::filesystem::path& path, const std::vector<Dialog>& dialogs);

// MSDialog-intent layout: top-level object of id -> {utterances: [{actor_type,
// utterance, tags}]}. Dialogs longer than 20 utterances are skipped and
// counted; actors are normalized to strict alternation.
struct MsDialogImport {
    std::vector<Dialog> dialogs;
    std::size_t dropped_too_long = 0;
};
MsDialogImport import_msdialog(const std::filesystem::path& path);

// Canonical JSON lines or MSDialog, detected from the content.
std::vector<Dialog> load_dialogs(const std::filesystem::path& path);

// Line-oriented helpers. Blank lines are skipped; the callback receives the
// 1-based line number.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const Json&, std::size_t line)>& fn);
void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);
std::string jsonl_of(const std::vector<Json>& rows);

}  // namespace solid

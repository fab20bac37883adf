#include "solid/manifest.hpp"

#include "solid/rng.hpp"

namespace solid {

std::string file_digest(const std::filesystem::path& path) {
    return "fnv1a64:" + hex64(fnv1a(read_text_file(path)));
}

std::filesystem::path manifest_path_for(const std::filesystem::path& output) {
    return std::filesystem::path(output.string() + ".manifest.json");
}

RunManifest::RunManifest(std::string command)
    : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {}

void RunManifest::add_input(const std::filesystem::path& path) {
    inputs_.emplace_back(path.generic_string(), file_digest(path));
}

void RunManifest::add_output(const std::filesystem::path& path) {
    outputs_.emplace_back(path.generic_string(), file_digest(path));
}

Json RunManifest::to_json() const {
    auto files = [](const std::vector<std::pair<std::string, std::string>>& v) {
        Json a = Json::array();
        for (const auto& [p, d] : v) a.push_back({{"path", p}, {"digest", d}});
        return a;
    };
    Json j;
    j["command"] = command_;
    j["backend"] = backend_;
    j["config"] = config_;
    j["inputs"] = files(inputs_);
    j["outputs"] = files(outputs_);
    j["counts"] = counts_;
    j["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    return j;
}

void RunManifest::write(const std::filesystem::path& path) const {
    write_text_file(path, to_json().dump(2) + "\n");
}

}  // namespace solid

#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "solid/serialize.hpp"

namespace solid {

// "fnv1a64:<16 hex digits>" of the file's bytes.
std::string file_digest(const std::filesystem::path& path);

// "<output>.manifest.json"
std::filesystem::path manifest_path_for(const std::filesystem::path& output);

// Provenance record written next to every output of a mutating command.
class RunManifest {
public:
    explicit RunManifest(std::string command);

    Json& config() noexcept { return config_; }
    Json& counts() noexcept { return counts_; }
    void set_backend(std::string identity) { backend_ = std::move(identity); }
    void add_input(const std::filesystem::path& path);
    void add_output(const std::filesystem::path& path);

    // Wall time is measured from construction.
    Json to_json() const;
    void write(const std::filesystem::path& path) const;

private:
    std::string command_;
    Json config_ = Json::object();
    Json counts_ = Json::object();
    std::string backend_;
    std::vector<std::pair<std::string, std::string>> inputs_;
    std::vector<std::pair<std::string, std::string>> outputs_;
    std::chrono::steady_clock::time_point start_;
};

}  // namespace solid

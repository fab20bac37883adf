#pragma once

// Entity existence checks against the Wikipedia search API, used to flag
// probably-hallucinated seeds. Fixture mode answers from a local table and
// never touches the network.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "solid/seed.hpp"

namespace solid {

// Lowercase with whitespace runs collapsed; the title match key.
std::string normalize_title(std::string_view title);

class WikiClient {
public:
    struct Options {
        std::string endpoint = "https://en.wikipedia.org/w/api.php";
        std::string user_agent = "solid-dialog-tools/0.1 (dataset tooling; contact via repository)";
        double requests_per_second = 10.0;
        int retries = 1;
        std::chrono::seconds timeout{10};
    };

    static WikiClient live(Options opts);
    static WikiClient live() { return live(Options{}); }
    // Keys are titles, values whether the title exists.
    static WikiClient fixture(const std::map<std::string, bool>& table);
    // JSON object {"Title": true, ...}.
    static WikiClient fixture_file(const std::filesystem::path& path);

    WikiClient(WikiClient&& other) noexcept;

    bool is_live() const noexcept { return live_; }
    std::size_t network_calls() const noexcept { return calls_.load(); }

    // Result titles of the first page of a search. TransportError in live mode.
    std::vector<std::string> search(std::string_view query);

    // True iff some search result title equals the name after normalization.
    bool entity_exists(std::string_view entity_name);

private:
    WikiClient() = default;
    void throttle();

    bool live_ = false;
    Options opts_;
    std::map<std::string, bool> table_;
    std::mutex mu_;
    std::chrono::steady_clock::time_point next_slot_{};
    std::atomic<std::size_t> calls_{0};
};

struct HallucinationPass {
    std::vector<Seed> seeds;  // input order, flags set where checks succeeded
    std::size_t hallucinated = 0;
    std::size_t failures = 0;
};

// hallucinated = !entity_exists(name); a failed check leaves the flag as it was.
HallucinationPass mark_hallucinated(WikiClient& client, std::vector<Seed> seeds);

struct SeedPartition {
    std::vector<Seed> hallucinated;
    std::vector<Seed> grounded;
    std::vector<Seed> unchecked;
};

SeedPartition partition_seeds(const std::vector<Seed>& seeds);

}  // namespace solid

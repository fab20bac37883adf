#pragma once

// Test doubles and fixture builders shared by the unit and acceptance suites.

#include <atomic>
#include <deque>
#include <filesystem>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "solid/backend.hpp"
#include "solid/errors.hpp"
#include "solid/rng.hpp"
#include "solid/taxonomy.hpp"

namespace solid::testing {

// Replies with queued strings, then with `fallback`. Records every request.
class ScriptedBackend : public Backend {
public:
    using Responder = std::function<std::string(const std::vector<ChatMessage>&, const GenerationParams&)>;

    explicit ScriptedBackend(std::vector<std::string> replies = {}, std::string fallback = "Okay.")
        : replies_(replies.begin(), replies.end()), fallback_(std::move(fallback)) {}
    explicit ScriptedBackend(Responder r) : responder_(std::move(r)) {}

    std::string complete(const std::vector<ChatMessage>& messages, const GenerationParams& params) override {
        std::lock_guard lock(mu_);
        requests_.push_back(messages);
        params_.push_back(params);
        if (responder_) return responder_(messages, params);
        if (replies_.empty()) return fallback_;
        std::string r = replies_.front();
        replies_.pop_front();
        return r;
    }

    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override {
        std::vector<EmbeddingVector> out;
        for (const std::string& t : texts) out.push_back({static_cast<double>(t.size()), 1.0});
        return out;
    }

    std::string identity() const override { return "scripted"; }

    std::size_t calls() const {
        std::lock_guard lock(mu_);
        return requests_.size();
    }
    std::vector<std::vector<ChatMessage>> requests() const {
        std::lock_guard lock(mu_);
        return requests_;
    }
    std::vector<GenerationParams> params() const {
        std::lock_guard lock(mu_);
        return params_;
    }

private:
    mutable std::mutex mu_;
    std::deque<std::string> replies_;
    std::string fallback_;
    Responder responder_;
    std::vector<std::vector<ChatMessage>> requests_;
    std::vector<GenerationParams> params_;
};

// Throws the error produced by `make` for the first `failures` calls, then
// answers "Recovered.".
class FlakyBackend : public Backend {
public:
    using Thrower = std::function<void()>;

    FlakyBackend(int failures, Thrower thrower) : remaining_(failures), thrower_(std::move(thrower)) {}

    std::string complete(const std::vector<ChatMessage>&, const GenerationParams&) override {
        ++calls_;
        if (remaining_.fetch_sub(1) > 0) thrower_();
        return "Recovered.";
    }
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override {
        ++calls_;
        if (remaining_.fetch_sub(1) > 0) thrower_();
        return std::vector<EmbeddingVector>(texts.size(), EmbeddingVector{1.0});
    }
    std::string identity() const override { return "flaky"; }
    int calls() const { return calls_.load(); }

private:
    std::atomic<int> remaining_;
    Thrower thrower_;
    std::atomic<int> calls_{0};
};

// Unique empty directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("solid-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline Dialog make_dialog(std::string id, const std::vector<std::pair<std::string, IntentSet>>& turns) {
    Dialog d;
    d.id = std::move(id);
    for (std::size_t k = 0; k < turns.size(); ++k) {
        d.utterances.push_back({actor_for_turn(k), turns[k].first, turns[k].second, {}});
    }
    return d;
}

inline IntentSet random_intent_set(Rng& rng, std::size_t max_size = 3) {
    IntentSet::Mask m = 0;
    const std::size_t n = 1 + rng.below(max_size);
    for (std::size_t i = 0; i < n; ++i) m |= IntentSet::bit(kAllIntents[rng.below(kIntentCount)]);
    return IntentSet::from_mask(m);
}

inline IntentSequence random_sequence(Rng& rng, std::size_t max_len = kMaxDialogLength) {
    IntentSequence s;
    const std::size_t n = 1 + rng.below(max_len);
    for (std::size_t i = 0; i < n; ++i) s.push_back(random_intent_set(rng));
    return s;
}

// Words drawn from a small vocabulary so that documents share terms.
inline std::string random_words(Rng& rng, std::size_t min_words, std::size_t max_words, std::size_t vocab = 40) {
    std::string out;
    const std::size_t n = min_words + rng.below(max_words - min_words + 1);
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += "w" + std::to_string(rng.below(vocab));
    }
    return out;
}

// Dialog whose utterance k carries sequence element k and marker-free text.
inline Dialog random_dialog(Rng& rng, const std::string& id, std::size_t max_len = 8) {
    Dialog d;
    d.id = id;
    const IntentSequence seq = random_sequence(rng, max_len);
    for (std::size_t k = 0; k < seq.size(); ++k) {
        d.utterances.push_back({actor_for_turn(k), random_words(rng, 1, 12) + ".", seq[k], {}});
    }
    return d;
}

}  // namespace solid::testing

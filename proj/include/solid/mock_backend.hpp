#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>

#include "solid/backend.hpp"

namespace solid {

// Offline backend. Every completion is a pure function of the messages and
// `request_seed`; the request kind is recognised from the prompt heads in
// prompts.hpp so that each pipeline stage receives well-formed output.
//
// Utterance-producing requests that carry "<<INTENT:xx>>" markers get a
// "MARK_xx" token per marker plus filler sentences; every completion ends
// with a period.
//
// Embeddings are L2-normalised bag-of-words hashes, so word order does not
// matter and a text is maximally similar to itself.
class MockBackend final : public Backend {
public:
    struct Options {
        std::size_t embedding_dim = 1024;
        // Artificial latency so tests can observe concurrency.
        std::chrono::microseconds latency{0};
    };

    MockBackend() = default;
    explicit MockBackend(Options opts) : opts_(opts) {}

    std::string complete(const std::vector<ChatMessage>& messages, const GenerationParams& params) override;
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    std::string identity() const override { return "mock"; }

    std::size_t complete_calls() const noexcept { return complete_calls_.load(); }
    std::size_t embed_calls() const noexcept { return embed_calls_.load(); }
    std::size_t peak_in_flight() const noexcept { return peak_in_flight_.load(); }
    void reset_counters() noexcept;

    // The generation rule without counters or latency.
    static std::string respond(const std::vector<ChatMessage>& messages, const GenerationParams& params);
    static EmbeddingVector embed_one(std::string_view text, std::size_t dim);

private:
    Options opts_;
    std::atomic<std::size_t> complete_calls_{0};
    std::atomic<std::size_t> embed_calls_{0};
    std::atomic<std::size_t> in_flight_{0};
    std::atomic<std::size_t> peak_in_flight_{0};
};

std::uint64_t mock_request_hash(const std::vector<ChatMessage>& messages, const GenerationParams& params);

}  // namespace solid

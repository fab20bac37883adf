#pragma once

// Text generation and embedding backends.
//
// `Backend` is the raw transport (mock, HTTP). `Client` decorates any
// backend with the retry policy and the `max_in_flight` bound; pipeline
// stages talk to a Client.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

namespace solid {

struct ChatMessage {
    enum class Role { System, User, Assistant };
    Role role = Role::User;
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

std::string_view role_name(ChatMessage::Role r) noexcept;

struct GenerationParams {
    std::string model = "zephyr-7b-beta";
    double temperature = 0.7;
    int max_tokens = 512;
    std::vector<std::string> stop;
    std::optional<std::int64_t> request_seed;
};

using EmbeddingVector = std::vector<double>;

// Throws BadRequest for empty message lists, empty user/assistant content,
// or invalid params.
void validate_request(const std::vector<ChatMessage>& messages, const GenerationParams& params);
// Throws BadRequest for an empty list or any empty text.
void validate_embed_request(const std::vector<std::string>& texts);

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string complete(const std::vector<ChatMessage>& messages,
                                 const GenerationParams& params) = 0;
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;
    // Recorded in run manifests, e.g. "mock" or "http:<endpoint>#<model>".
    virtual std::string identity() const = 0;
};

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds base_delay{500};
    double jitter = 0.25;  // +-25% of each delay
    std::uint64_t jitter_seed = 0x5eed;
};

class Client {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    Client(std::shared_ptr<Backend> backend, RetryPolicy policy = {}, int max_in_flight = 8);

    // Retries TransportError and RateLimited with exponential backoff;
    // BadRequest is raised immediately. After the last attempt the last
    // error is rethrown (RateLimited keeps its retry-after).
    std::string complete(const std::vector<ChatMessage>& messages, const GenerationParams& params);
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts);

    std::string identity() const { return backend_->identity(); }
    int max_in_flight() const noexcept { return max_in_flight_; }
    const RetryPolicy& policy() const noexcept { return policy_; }

    // Tests substitute a recorder so backoff does not actually sleep.
    void set_sleeper(Sleeper s) { sleeper_ = std::move(s); }

private:
    template <class F>
    auto with_retries(F&& call) -> decltype(call());

    std::chrono::milliseconds backoff_delay(int attempt);

    std::shared_ptr<Backend> backend_;
    RetryPolicy policy_;
    int max_in_flight_;
    std::counting_semaphore<1024> slots_;
    std::atomic<std::uint64_t> jitter_counter_{0};
    Sleeper sleeper_;
};

}  // namespace solid

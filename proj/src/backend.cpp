#include "solid/backend.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "solid/errors.hpp"
#include "solid/rng.hpp"

namespace solid {

std::string_view role_name(ChatMessage::Role r) noexcept {
    switch (r) {
        case ChatMessage::Role::System:
            return "system";
        case ChatMessage::Role::User:
            return "user";
        case ChatMessage::Role::Assistant:
            return "assistant";
    }
    return "user";
}

void validate_request(const std::vector<ChatMessage>& messages, const GenerationParams& params) {
    if (messages.empty()) throw BadRequest("no messages");
    for (const ChatMessage& m : messages) {
        if (m.role != ChatMessage::Role::System && m.content.empty()) {
            throw BadRequest("empty " + std::string(role_name(m.role)) + " message");
        }
    }
    if (params.max_tokens < 1) throw BadRequest("max_tokens must be >= 1");
    if (!(params.temperature >= 0.0)) throw BadRequest("temperature must be >= 0");
}

void validate_embed_request(const std::vector<std::string>& texts) {
    if (texts.empty()) throw BadRequest("no texts to embed");
    for (const std::string& t : texts) {
        if (t.empty()) throw BadRequest("cannot embed empty text");
    }
}

namespace {

// RAII slot on the in-flight semaphore.
class Slot {
public:
    explicit Slot(std::counting_semaphore<1024>& s) : s_(s) { s_.acquire(); }
    ~Slot() { s_.release(); }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

private:
    std::counting_semaphore<1024>& s_;
};

}  // namespace

Client::Client(std::shared_ptr<Backend> backend, RetryPolicy policy, int max_in_flight)
    : backend_(std::move(backend)),
      policy_(policy),
      max_in_flight_(std::clamp(max_in_flight, 1, 1024)),
      slots_(max_in_flight_),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
    if (!backend_) throw PreconditionError("client needs a backend");
    if (policy_.max_attempts < 1) throw PreconditionError("max_attempts must be >= 1");
}

std::chrono::milliseconds Client::backoff_delay(int attempt) {
    const double base = static_cast<double>(policy_.base_delay.count()) * std::ldexp(1.0, attempt);
    const std::uint64_t n = jitter_counter_.fetch_add(1, std::memory_order_relaxed);
    const double u = static_cast<double>(splitmix64(policy_.jitter_seed + n) >> 11) * 0x1.0p-53;
    const double factor = 1.0 + policy_.jitter * (2.0 * u - 1.0);
    return std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(base * factor)));
}

template <class F>
auto Client::with_retries(F&& call) -> decltype(call()) {
    for (int attempt = 0;; ++attempt) {
        const bool last = attempt + 1 >= policy_.max_attempts;
        std::chrono::milliseconds wait{0};
        try {
            Slot slot(slots_);
            return call();
        } catch (const BadRequest&) {
            throw;
        } catch (const RateLimited& e) {
            if (last) throw;
            wait = std::max(e.retry_after(), backoff_delay(attempt));
        } catch (const TransportError&) {
            if (last) throw;
            wait = backoff_delay(attempt);
        }
        sleeper_(wait);
    }
}

std::string Client::complete(const std::vector<ChatMessage>& messages, const GenerationParams& params) {
    validate_request(messages, params);
    return with_retries([&] { return backend_->complete(messages, params); });
}

std::vector<EmbeddingVector> Client::embed(const std::vector<std::string>& texts) {
    validate_embed_request(texts);
    auto out = with_retries([&] { return backend_->embed(texts); });
    if (out.size() != texts.size()) throw TransportError("embedding count mismatch");
    return out;
}

std::string hex64(std::uint64_t v) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
        v >>= 4;
    }
    return out;
}

}  // namespace solid

#pragma once

#include <chrono>
#include <string>

#include "solid/backend.hpp"

namespace solid {

// Chat-completions / embeddings client for OpenAI-compatible servers
// (vLLM, TGI, llama.cpp server, hosted APIs).
//
//   POST {endpoint}/chat/completions
//   POST {endpoint}/embeddings
//
// Error mapping: connection failures and 5xx -> TransportError,
// 429 -> RateLimited (Retry-After honoured), other 4xx -> BadRequest.
class HttpBackend final : public Backend {
public:
    struct Options {
        std::string endpoint = "http://127.0.0.1:8000/v1";
        std::string api_key;  // read from the environment by the caller
        std::string model = "zephyr-7b-beta";
        std::string embedding_model = "multi-qa-mpnet-base-dot-v1";
        std::chrono::seconds timeout{120};
    };

    explicit HttpBackend(Options opts);

    std::string complete(const std::vector<ChatMessage>& messages, const GenerationParams& params) override;
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    std::string identity() const override;

private:
    std::string post(const std::string& path, const std::string& body);

    Options opts_;
    std::string scheme_host_;
    std::string base_path_;
};

// Splits "https://host:port/base" into {"https://host:port", "/base"}.
std::pair<std::string, std::string> split_endpoint(const std::string& url);

}  // namespace solid

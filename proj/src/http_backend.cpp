#include "solid/http_backend.hpp"

#include <algorithm>

#include "httplib.h"
#include "solid/errors.hpp"
#include "solid/serialize.hpp"

namespace solid {

std::pair<std::string, std::string> split_endpoint(const std::string& url) {
    const std::size_t scheme = url.find("://");
    if (scheme == std::string::npos) throw PreconditionError("endpoint needs a scheme: " + url);
    const std::size_t slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) return {url, ""};
    std::string path = url.substr(slash);
    while (!path.empty() && path.back() == '/') path.pop_back();
    return {url.substr(0, slash), path};
}

HttpBackend::HttpBackend(Options opts) : opts_(std::move(opts)) {
    std::tie(scheme_host_, base_path_) = split_endpoint(opts_.endpoint);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (scheme_host_.starts_with("https://")) {
        throw PreconditionError("built without TLS support; use an http:// endpoint");
    }
#endif
}

std::string HttpBackend::identity() const { return "http:" + opts_.endpoint + "#" + opts_.model; }

std::string HttpBackend::post(const std::string& path, const std::string& body) {
    httplib::Client cli(scheme_host_);
    cli.set_connection_timeout(std::chrono::seconds(10));
    cli.set_read_timeout(opts_.timeout);
    cli.set_write_timeout(opts_.timeout);
    httplib::Headers headers;
    if (!opts_.api_key.empty()) headers.emplace("Authorization", "Bearer " + opts_.api_key);

    auto res = cli.Post(base_path_ + path, headers, body, "application/json");
    if (!res) {
        throw TransportError("request to " + opts_.endpoint + path + " failed: " +
                             httplib::to_string(res.error()));
    }
    if (res->status == 429) {
        std::chrono::milliseconds retry_after{1000};
        if (res->has_header("Retry-After")) {
            try {
                retry_after = std::chrono::seconds(std::stoi(res->get_header_value("Retry-After")));
            } catch (const std::exception&) {
            }
        }
        throw RateLimited("rate limited by " + opts_.endpoint, retry_after);
    }
    if (res->status >= 500) {
        throw TransportError("server error " + std::to_string(res->status) + ": " + res->body);
    }
    if (res->status >= 400) {
        throw BadRequest("request rejected (" + std::to_string(res->status) + "): " + res->body);
    }
    return res->body;
}

std::string HttpBackend::complete(const std::vector<ChatMessage>& messages, const GenerationParams& params) {
    validate_request(messages, params);
    Json body;
    body["model"] = params.model.empty() ? opts_.model : params.model;
    Json msgs = Json::array();
    for (const ChatMessage& m : messages) {
        msgs.push_back({{"role", std::string(role_name(m.role))}, {"content", m.content}});
    }
    body["messages"] = std::move(msgs);
    body["temperature"] = params.temperature;
    body["max_tokens"] = params.max_tokens;
    if (!params.stop.empty()) body["stop"] = params.stop;
    if (params.request_seed) body["seed"] = *params.request_seed;

    const std::string raw = post("/chat/completions", body.dump());
    try {
        const Json reply = Json::parse(raw);
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const std::exception& e) {
        throw TransportError(std::string("malformed completion response: ") + e.what());
    }
}

std::vector<EmbeddingVector> HttpBackend::embed(const std::vector<std::string>& texts) {
    validate_embed_request(texts);
    Json body;
    body["model"] = opts_.embedding_model;
    body["input"] = texts;
    const std::string raw = post("/embeddings", body.dump());
    try {
        const Json reply = Json::parse(raw);
        std::vector<std::pair<std::size_t, EmbeddingVector>> rows;
        for (const Json& d : reply.at("data")) {
            rows.emplace_back(d.value("index", rows.size()), d.at("embedding").get<EmbeddingVector>());
        }
        std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<EmbeddingVector> out;
        for (auto& r : rows) {
            if (!out.empty() && r.second.size() != out.front().size()) {
                throw TransportError("embedding dimensions differ within one response");
            }
            out.push_back(std::move(r.second));
        }
        return out;
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw TransportError(std::string("malformed embedding response: ") + e.what());
    }
}

}  // namespace solid

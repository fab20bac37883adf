#include "solid/enrich.hpp"

#include <thread>

#include "httplib.h"
#include "solid/errors.hpp"
#include "solid/http_backend.hpp"
#include "solid/log.hpp"
#include "solid/text.hpp"

namespace solid {

std::string normalize_title(std::string_view title) { return text::to_lower(text::collapse_whitespace(title)); }

WikiClient WikiClient::live(Options opts) {
    WikiClient c;
    c.live_ = true;
    c.opts_ = std::move(opts);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (c.opts_.endpoint.starts_with("https://")) {
        throw PreconditionError("built without TLS support; use an http:// endpoint");
    }
#endif
    return c;
}

WikiClient WikiClient::fixture(const std::map<std::string, bool>& table) {
    WikiClient c;
    for (const auto& [title, exists] : table) c.table_[normalize_title(title)] = exists;
    return c;
}

WikiClient WikiClient::fixture_file(const std::filesystem::path& path) {
    Json j;
    try {
        j = Json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string(), e.what());
    }
    if (!j.is_object()) throw ParseError(path.string(), "fixture must be a JSON object of title -> bool");
    std::map<std::string, bool> table;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!it.value().is_boolean()) throw ParseError(path.string() + ":" + it.key(), "value must be a boolean");
        table[it.key()] = it.value().get<bool>();
    }
    return fixture(table);
}

WikiClient::WikiClient(WikiClient&& other) noexcept
    : live_(other.live_),
      opts_(std::move(other.opts_)),
      table_(std::move(other.table_)),
      next_slot_(other.next_slot_),
      calls_(other.calls_.load()) {}

void WikiClient::throttle() {
    if (opts_.requests_per_second <= 0) return;
    const auto gap = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / opts_.requests_per_second));
    std::chrono::steady_clock::time_point slot;
    {
        std::lock_guard lock(mu_);
        const auto now = std::chrono::steady_clock::now();
        slot = std::max(now, next_slot_);
        next_slot_ = slot + gap;
    }
    std::this_thread::sleep_until(slot);
}

std::vector<std::string> WikiClient::search(std::string_view query) {
    if (!live_) {
        auto it = table_.find(normalize_title(query));
        if (it != table_.end() && it->second) return {std::string(query)};
        return {};
    }
    const auto [host, path] = split_endpoint(opts_.endpoint);
    const httplib::Params params = {
        {"action", "query"}, {"list", "search"}, {"format", "json"},
        {"srlimit", "10"},   {"srsearch", std::string(query)},
    };
    const std::string target = httplib::append_query_params(path.empty() ? "/" : path, params);

    std::string last_error;
    for (int attempt = 0; attempt <= opts_.retries; ++attempt) {
        throttle();
        calls_.fetch_add(1);
        httplib::Client cli(host);
        cli.set_connection_timeout(opts_.timeout);
        cli.set_read_timeout(opts_.timeout);
        auto res = cli.Get(target, {{"User-Agent", opts_.user_agent}});
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500 || res->status == 429) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) throw BadRequest("search returned HTTP " + std::to_string(res->status));
        log::debug("wiki search '" + std::string(query) + "': " + res->body);
        try {
            const Json j = Json::parse(res->body);
            std::vector<std::string> titles;
            for (const Json& hit : j.at("query").at("search")) titles.push_back(hit.at("title").get<std::string>());
            return titles;
        } catch (const std::exception& e) {
            throw TransportError(std::string("malformed search response: ") + e.what());
        }
    }
    throw TransportError("search for '" + std::string(query) + "' failed: " + last_error);
}

bool WikiClient::entity_exists(std::string_view entity_name) {
    if (text::trim_view(entity_name).empty()) throw PreconditionError("entity name is empty");
    const std::string key = normalize_title(entity_name);
    for (const std::string& title : search(entity_name)) {
        if (normalize_title(title) == key) return true;
    }
    return false;
}

HallucinationPass mark_hallucinated(WikiClient& client, std::vector<Seed> seeds) {
    HallucinationPass out;
    for (Seed& s : seeds) {
        try {
            s.hallucinated = !client.entity_exists(s.entity_name);
        } catch (const std::exception& e) {
            log::warn("existence check for '" + s.entity_name + "' failed: " + e.what());
            ++out.failures;
        }
        if (s.hallucinated.value_or(false)) ++out.hallucinated;
    }
    out.seeds = std::move(seeds);
    return out;
}

SeedPartition partition_seeds(const std::vector<Seed>& seeds) {
    SeedPartition p;
    for (const Seed& s : seeds) {
        if (!s.hallucinated) {
            p.unchecked.push_back(s);
        } else if (*s.hallucinated) {
            p.hallucinated.push_back(s);
        } else {
            p.grounded.push_back(s);
        }
    }
    return p;
}

}  // namespace solid

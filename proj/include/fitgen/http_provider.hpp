#pragma once

// OpenAI-style chat-completion client. The same wire contract is served by
// OpenAI, Ollama and most hosted open-model gateways.

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include <chrono>
#include <string>

#include <nlohmann/json.hpp>

#include "fitgen/provider.hpp"

namespace fitgen {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

inline Endpoint split_endpoint(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint must be an absolute URL: " + url);
    const auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") throw ConfigError("endpoint scheme must be http or https: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

inline nlohmann::json chat_request_body(const ProviderConfig& cfg, const Prompt& prompt) {
    nlohmann::json messages = nlohmann::json::array();
    if (!prompt.system.empty()) messages.push_back({{"role", "system"}, {"content", prompt.system}});
    messages.push_back({{"role", "user"}, {"content", prompt.user}});
    return {{"model", cfg.model}, {"messages", messages}, {"temperature", cfg.temperature}, {"seed", cfg.seed}};
}

inline ProviderResponse parse_chat_response(const std::string& body) {
    try {
        const auto j = nlohmann::json::parse(body);
        ProviderResponse r;
        r.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
        if (auto u = j.find("usage"); u != j.end() && u->is_object()) {
            r.usage.prompt_tokens = u->value("prompt_tokens", 0L);
            r.usage.completion_tokens = u->value("completion_tokens", 0L);
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("malformed chat completion body: ") + e.what());
    }
}

class HttpProvider final : public Provider {
public:
    explicit HttpProvider(ProviderConfig cfg) : cfg_(std::move(cfg)), endpoint_(split_endpoint(cfg_.endpoint)) {
        cfg_.check();
    }

    ProviderResponse complete(const Prompt& prompt) override {
        httplib::Client client(endpoint_.origin);
        const auto secs = static_cast<time_t>(cfg_.timeout_s);
        const auto usecs = static_cast<time_t>((cfg_.timeout_s - static_cast<double>(secs)) * 1e6);
        client.set_connection_timeout(secs, usecs);
        client.set_read_timeout(secs, usecs);
        client.set_write_timeout(secs, usecs);
        httplib::Headers headers;
        if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);

        const auto start = std::chrono::steady_clock::now();
        auto res = client.Post(endpoint_.path, headers, chat_request_body(cfg_, prompt).dump(), "application/json");
        const auto latency = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!res) throw TransportError(cfg_.endpoint + ": " + httplib::to_string(res.error()));
        if (res->status != 200)
            throw TransportError(cfg_.endpoint + " answered HTTP " + std::to_string(res->status) + ": " +
                                 res->body.substr(0, 200));
        ProviderResponse r = parse_chat_response(res->body);
        r.latency_s = latency;
        return r;
    }

    const std::string& model() const override { return cfg_.model; }

private:
    ProviderConfig cfg_;
    Endpoint endpoint_;
};

}  // namespace fitgen

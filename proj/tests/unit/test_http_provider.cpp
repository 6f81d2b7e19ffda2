#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <thread>

#include "fitgen/http_provider.hpp"

using namespace fitgen;

namespace {

// Local stand-in for a chat-completion endpoint.
class MockServer {
public:
    MockServer() {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            ++hits_;
            last_auth_ = req.get_header_value("Authorization");
            last_body_ = req.body;
            const auto body = nlohmann::json::parse(req.body);
            const std::string user = body.at("messages").back().at("content");
            if (user == "fail") {
                res.status = 500;
                res.set_content("boom", "text/plain");
                return;
            }
            if (user == "garbled") {
                res.set_content("{\"choices\": []}", "application/json");
                return;
            }
            nlohmann::json reply{{"choices", {{{"message", {{"role", "assistant"}, {"content", "echo:" + user}}}}}},
                                 {"usage", {{"prompt_tokens", 12}, {"completion_tokens", 3}}}};
            res.set_content(reply.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockServer() {
        server_.stop();
        thread_.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }

    std::atomic<int> hits_{0};
    std::string last_auth_;
    std::string last_body_;

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

ProviderConfig config_for(const MockServer& s) {
    ProviderConfig c;
    c.endpoint = s.url();
    c.model = "mock-model";
    c.api_key = "secret";
    c.timeout_s = 5;
    return c;
}

}  // namespace

TEST_CASE("endpoint splitting") {
    CHECK(split_endpoint("https://api.example.com/v1/chat").origin == "https://api.example.com");
    CHECK(split_endpoint("https://api.example.com/v1/chat").path == "/v1/chat");
    CHECK(split_endpoint("http://localhost:8080").path == "/");
    CHECK_THROWS_AS(split_endpoint("ftp://x/y"), ConfigError);
    CHECK_THROWS_AS(split_endpoint("no-scheme"), ConfigError);
}

TEST_CASE("request body carries model, messages, temperature and seed") {
    ProviderConfig c;
    c.model = "m";
    c.temperature = 0.2;
    const auto body = chat_request_body(c, Prompt{"sys", "usr"});
    CHECK(body.at("model") == "m");
    CHECK(body.at("messages").size() == 2);
    CHECK(body.at("messages")[0].at("role") == "system");
    CHECK(body.at("messages")[1].at("content") == "usr");
    CHECK(body.at("temperature") == 0.2);
    CHECK(body.contains("seed"));
}

TEST_CASE("http provider round trip against a local server") {
    MockServer server;
    HttpProvider p(config_for(server));
    const auto r = p.complete(Prompt{"s", "hello"});
    CHECK(r.text == "echo:hello");
    CHECK(r.usage.prompt_tokens == 12);
    CHECK(r.usage.completion_tokens == 3);
    CHECK(server.last_auth_ == "Bearer secret");
    CHECK(nlohmann::json::parse(server.last_body_).at("model") == "mock-model");
}

TEST_CASE("http errors and malformed bodies are transport errors") {
    MockServer server;
    HttpProvider p(config_for(server));
    CHECK_THROWS_AS(p.complete(Prompt{"s", "fail"}), TransportError);
    CHECK_THROWS_AS(p.complete(Prompt{"s", "garbled"}), TransportError);
}

TEST_CASE("unreachable endpoint is a transport error") {
    ProviderConfig c;
    c.endpoint = "http://127.0.0.1:1/v1/chat/completions";
    c.timeout_s = 1;
    HttpProvider p(c);
    CHECK_THROWS_AS(p.complete(Prompt{"s", "u"}), TransportError);
}

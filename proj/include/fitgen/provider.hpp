#pragma once

// Chat-completion providers: the abstract interface, fixture replay keyed by
// prompt digest, and a recorder that captures a live provider's answers.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "fitgen/digest.hpp"
#include "fitgen/errors.hpp"
#include "fitgen/prompt.hpp"

namespace fitgen {

// The only place an API key is read from.
inline constexpr const char* kApiKeyEnv = "FITGEN_API_KEY";

struct ProviderConfig {
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    std::string model = "gpt-4o";
    double temperature = 0.2;
    std::uint64_t seed = 42;
    std::string api_key;
    double timeout_s = 60.0;
    int max_retries = 2;
    int parallelism = 1;

    void check() const {
        if (!(temperature >= 0)) throw ConfigError("temperature must be >= 0");
        if (max_retries < 0) throw ConfigError("max retries must be >= 0");
        if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
        if (!(timeout_s > 0)) throw ConfigError("timeout must be > 0");
    }
};

inline std::string api_key_from_env() {
    const char* v = std::getenv(kApiKeyEnv);
    return v ? std::string(v) : std::string{};
}

struct TokenUsage {
    long prompt_tokens = 0;
    long completion_tokens = 0;

    TokenUsage& operator+=(const TokenUsage& o) {
        prompt_tokens += o.prompt_tokens;
        completion_tokens += o.completion_tokens;
        return *this;
    }
    long total() const { return prompt_tokens + completion_tokens; }
    friend bool operator==(const TokenUsage&, const TokenUsage&) = default;
};

struct ProviderResponse {
    std::string text;
    TokenUsage usage;
    double latency_s = 0.0;
};

// Implementations must be callable from several threads at once.
class Provider {
public:
    virtual ~Provider() = default;
    virtual ProviderResponse complete(const Prompt& prompt) = 0;
    virtual const std::string& model() const = 0;
};

// Digest of the model name and the exact prompt bytes.
inline std::string prompt_digest(const std::string& model, const Prompt& prompt) {
    return sha256_hex(model + "\n" + prompt.text());
}

// One line of a recording file.
struct RecordEntry {
    std::string digest;
    std::string response_text;
    long prompt_tokens = 0;
    long completion_tokens = 0;
};

inline std::string record_line(const RecordEntry& e) {
    nlohmann::ordered_json j;
    j["digest"] = e.digest;
    j["response_text"] = e.response_text;
    j["prompt_tokens"] = e.prompt_tokens;
    j["completion_tokens"] = e.completion_tokens;
    return j.dump();
}

inline std::vector<RecordEntry> parse_recording(std::string_view text) {
    std::vector<RecordEntry> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            RecordEntry e{j.at("digest").get<std::string>(), j.at("response_text").get<std::string>(),
                          j.value("prompt_tokens", 0L), j.value("completion_tokens", 0L)};
            if (e.prompt_tokens < 0 || e.completion_tokens < 0) throw FormatError("negative token count");
            out.push_back(std::move(e));
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("recording line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

inline std::vector<RecordEntry> load_recording(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open recording " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_recording(ss.str());
}

// Replays recorded responses. Read-only after construction, hence shareable.
class FixtureProvider final : public Provider {
public:
    FixtureProvider(std::string model, const std::vector<RecordEntry>& entries) : model_(std::move(model)) {
        for (const auto& e : entries) entries_[e.digest] = e;
    }

    static FixtureProvider from_file(std::string model, const std::string& path) {
        return FixtureProvider(std::move(model), load_recording(path));
    }

    ProviderResponse complete(const Prompt& prompt) override {
        const auto digest = prompt_digest(model_, prompt);
        auto it = entries_.find(digest);
        if (it == entries_.end()) throw FixtureMiss(digest);
        return ProviderResponse{it->second.response_text, {it->second.prompt_tokens, it->second.completion_tokens}, 0.0};
    }

    const std::string& model() const override { return model_; }
    std::size_t size() const { return entries_.size(); }

private:
    std::string model_;
    std::unordered_map<std::string, RecordEntry> entries_;
};

// Forwards to a live provider and appends every new answer to a recording
// file. Digests already in the file are served from it, so an interrupted
// recording can be resumed.
class RecordingProvider final : public Provider {
public:
    RecordingProvider(Provider& live, std::string path) : live_(live), path_(std::move(path)) {
        std::ifstream probe(path_);
        if (probe) {
            for (auto& e : load_recording(path_)) known_[e.digest] = e;
        }
        out_.open(path_, std::ios::binary | std::ios::app);
        if (!out_) throw ConfigError("cannot write recording " + path_);
    }

    ProviderResponse complete(const Prompt& prompt) override {
        const auto digest = prompt_digest(live_.model(), prompt);
        {
            std::lock_guard lock(mu_);
            if (auto it = known_.find(digest); it != known_.end())
                return {it->second.response_text, {it->second.prompt_tokens, it->second.completion_tokens}, 0.0};
        }
        ProviderResponse r = live_.complete(prompt);
        RecordEntry e{digest, r.text, r.usage.prompt_tokens, r.usage.completion_tokens};
        std::lock_guard lock(mu_);
        if (known_.emplace(digest, e).second) {
            out_ << record_line(e) << '\n';
            out_.flush();
            ++recorded_;
        }
        return r;
    }

    const std::string& model() const override { return live_.model(); }
    std::size_t recorded() const {
        std::lock_guard lock(mu_);
        return recorded_;
    }

private:
    Provider& live_;
    std::string path_;
    mutable std::mutex mu_;
    std::unordered_map<std::string, RecordEntry> known_;
    std::ofstream out_;
    std::size_t recorded_ = 0;
};

}  // namespace fitgen

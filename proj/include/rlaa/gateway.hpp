#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "rlaa/errors.hpp"
#include "rlaa/util.hpp"

namespace rlaa {

using json = nlohmann::json;

struct ChatMessage {
    std::string role;  // system | user | assistant
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

inline void to_json(json& j, const ChatMessage& m) {
    j = json{{"role", m.role}, {"content", m.content}};
}

inline void from_json(const json& j, ChatMessage& m) {
    m.role = j.at("role").get<std::string>();
    m.content = j.at("content").get<std::string>();
}

struct GenerationParams {
    double temperature = 0.0;
    std::optional<double> top_p;
    int max_tokens = 1024;

    bool operator==(const GenerationParams&) const = default;
};

inline void to_json(json& j, const GenerationParams& p) {
    j = json{{"temperature", p.temperature}, {"max_tokens", p.max_tokens}};
    if (p.top_p) j["top_p"] = *p.top_p;
}

inline void from_json(const json& j, GenerationParams& p) {
    p.temperature = j.at("temperature").get<double>();
    p.max_tokens = j.at("max_tokens").get<int>();
    if (j.contains("top_p") && !j.at("top_p").is_null())
        p.top_p = j.at("top_p").get<double>();
    else
        p.top_p = std::nullopt;
}

enum class BackendKind { Live, Scripted, Replay };

inline std::string to_string(BackendKind k) {
    switch (k) {
        case BackendKind::Live: return "live";
        case BackendKind::Scripted: return "scripted";
        case BackendKind::Replay: return "replay";
    }
    return "live";
}

inline BackendKind backend_kind_from_string(const std::string& s) {
    if (s == "live") return BackendKind::Live;
    if (s == "scripted") return BackendKind::Scripted;
    if (s == "replay") return BackendKind::Replay;
    throw ConfigError("unknown backend kind: " + s);
}

struct BackendDescriptor {
    BackendKind kind = BackendKind::Live;
    std::string base_url;       // live: e.g. http://localhost:8000/v1
    std::string model;          // live: model name sent on the wire
    std::string api_key_env;    // live: env var holding the bearer token, optional
    int retry_limit = 3;
    int backoff_base_ms = 1000;
    std::vector<std::string> script;  // scripted: canned replies, consumed in order
    std::string cassette;             // replay: cassette to read
    std::string record_cassette;      // any kind: cassette to append exchanges to

    bool operator==(const BackendDescriptor&) const = default;
};

inline void to_json(json& j, const BackendDescriptor& d) {
    j = json{{"kind", to_string(d.kind)}};
    if (!d.base_url.empty()) j["base_url"] = d.base_url;
    if (!d.model.empty()) j["model"] = d.model;
    if (!d.api_key_env.empty()) j["api_key_env"] = d.api_key_env;
    if (d.retry_limit != 3) j["retry_limit"] = d.retry_limit;
    if (d.backoff_base_ms != 1000) j["backoff_base_ms"] = d.backoff_base_ms;
    if (!d.script.empty()) j["script"] = d.script;
    if (!d.cassette.empty()) j["cassette"] = d.cassette;
    if (!d.record_cassette.empty()) j["record_cassette"] = d.record_cassette;
}

inline void from_json(const json& j, BackendDescriptor& d) {
    d.kind = backend_kind_from_string(j.at("kind").get<std::string>());
    d.base_url = j.value("base_url", "");
    d.model = j.value("model", "");
    d.api_key_env = j.value("api_key_env", "");
    d.retry_limit = j.value("retry_limit", 3);
    d.backoff_base_ms = j.value("backoff_base_ms", 1000);
    d.script = j.value("script", std::vector<std::string>{});
    d.cassette = j.value("cassette", "");
    d.record_cassette = j.value("record_cassette", "");
}

/// Canonical fingerprint of a chat request. Key order cannot leak in because
/// the digest is taken over a sorted-key dump.
inline std::string request_digest(const std::string& model,
                                  const std::vector<ChatMessage>& messages,
                                  const GenerationParams& params) {
    const json j{{"messages", messages}, {"model", model}, {"params", params}};
    return to_hex(fnv1a64(j.dump()));
}

class Backend {
  public:
    virtual ~Backend() = default;
    virtual std::string complete(const std::vector<ChatMessage>& messages,
                                 const GenerationParams& params) = 0;
    virtual int call_count() const = 0;
};

using BackendPtr = std::shared_ptr<Backend>;

// ---------------------------------------------------------------------------
// Live backend: any chat-completions endpoint
// ---------------------------------------------------------------------------

class LiveBackend final : public Backend {
  public:
    explicit LiveBackend(BackendDescriptor desc) : desc_(std::move(desc)) {
        if (desc_.base_url.empty()) throw ConfigError("live backend needs base_url");
        if (desc_.model.empty()) throw ConfigError("live backend needs a model name");
        split_url();
    }

    std::string complete(const std::vector<ChatMessage>& messages,
                         const GenerationParams& params) override {
        {
            std::lock_guard lock(mu_);
            ++calls_;
        }
        json body{{"model", desc_.model},
                  {"messages", messages},
                  {"temperature", params.temperature},
                  {"max_tokens", params.max_tokens}};
        if (params.top_p) body["top_p"] = *params.top_p;

        httplib::Headers headers;
        if (!desc_.api_key_env.empty()) {
            if (const char* key = std::getenv(desc_.api_key_env.c_str()); key && *key)
                headers.emplace("Authorization", std::string("Bearer ") + key);
        }

        std::string last_error;
        for (int attempt = 0; attempt <= desc_.retry_limit; ++attempt) {
            if (attempt > 0)
                std::this_thread::sleep_for(std::chrono::milliseconds(
                    desc_.backoff_base_ms * (1LL << (attempt - 1))));
            httplib::Client client(host_);
            client.set_connection_timeout(10, 0);
            client.set_read_timeout(300, 0);
            auto res = client.Post(path_ + "/chat/completions", headers, body.dump(),
                                   "application/json");
            if (!res) {
                last_error = "no response from " + host_;
                continue;
            }
            if (res->status == 401 || res->status == 403)
                throw AuthError("endpoint rejected credentials (HTTP " +
                                std::to_string(res->status) + ")");
            if (res->status >= 500) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200)
                throw ProtocolError("unexpected HTTP " + std::to_string(res->status) + ": " +
                                    res->body);
            return extract_content(res->body);
        }
        throw TransportError("giving up after " + std::to_string(desc_.retry_limit + 1) +
                             " attempts: " + last_error);
    }

    int call_count() const override {
        std::lock_guard lock(mu_);
        return calls_;
    }

  private:
    static std::string extract_content(const std::string& body) {
        json j;
        try {
            j = json::parse(body);
        } catch (const json::exception& e) {
            throw ProtocolError(std::string("response is not json: ") + e.what());
        }
        if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty())
            throw ProtocolError("response has no choices");
        const auto& msg = j["choices"][0];
        if (!msg.contains("message") || !msg["message"].contains("content") ||
            !msg["message"]["content"].is_string())
            throw ProtocolError("response choice has no message content");
        return msg["message"]["content"].get<std::string>();
    }

    // httplib takes scheme://host:port; any path prefix must ride on the request.
    void split_url() {
        const auto scheme_end = desc_.base_url.find("://");
        if (scheme_end == std::string::npos)
            throw ConfigError("base_url needs a scheme: " + desc_.base_url);
        const auto path_start = desc_.base_url.find('/', scheme_end + 3);
        if (path_start == std::string::npos) {
            host_ = desc_.base_url;
            path_ = "";
        } else {
            host_ = desc_.base_url.substr(0, path_start);
            path_ = desc_.base_url.substr(path_start);
            while (!path_.empty() && path_.back() == '/') path_.pop_back();
        }
    }

    BackendDescriptor desc_;
    std::string host_;
    std::string path_;
    mutable std::mutex mu_;
    int calls_ = 0;
};

// ---------------------------------------------------------------------------
// Scripted backend: canned replies for tests and fixtures
// ---------------------------------------------------------------------------

class ScriptedBackend final : public Backend {
  public:
    explicit ScriptedBackend(std::vector<std::string> script) : script_(std::move(script)) {}
    explicit ScriptedBackend(const BackendDescriptor& desc) : ScriptedBackend(desc.script) {}

    std::string complete(const std::vector<ChatMessage>&, const GenerationParams&) override {
        std::lock_guard lock(mu_);
        if (next_ >= script_.size())
            throw ConfigError("scripted backend exhausted after " +
                              std::to_string(script_.size()) + " replies");
        return script_[next_++];
    }

    int call_count() const override {
        std::lock_guard lock(mu_);
        return static_cast<int>(next_);
    }

  private:
    std::vector<std::string> script_;
    size_t next_ = 0;
    mutable std::mutex mu_;
};

// ---------------------------------------------------------------------------
// Cassettes
// ---------------------------------------------------------------------------

struct CassetteEntry {
    std::string request_digest;
    std::string response_text;

    bool operator==(const CassetteEntry&) const = default;
};

inline void to_json(json& j, const CassetteEntry& e) {
    j = json{{"request_digest", e.request_digest}, {"response_text", e.response_text}};
}

inline void from_json(const json& j, CassetteEntry& e) {
    e.request_digest = j.at("request_digest").get<std::string>();
    e.response_text = j.at("response_text").get<std::string>();
}

inline std::vector<CassetteEntry> load_cassette(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError("cassette " + path.string() + " is not valid json: " + e.what());
    }
    if (!j.is_array()) throw ConfigError("cassette " + path.string() + " must be an array");
    return j.get<std::vector<CassetteEntry>>();
}

inline void save_cassette(const std::filesystem::path& path,
                          const std::vector<CassetteEntry>& entries) {
    write_file(path, json(entries).dump(2) + "\n");
}

class ReplayBackend final : public Backend {
  public:
    explicit ReplayBackend(const std::filesystem::path& cassette_path, std::string model = "")
        : model_(std::move(model)) {
        for (auto& e : load_cassette(cassette_path))
            by_digest_.emplace(e.request_digest, e.response_text);
    }

    explicit ReplayBackend(const BackendDescriptor& desc)
        : ReplayBackend(desc.cassette, desc.model) {}

    std::string complete(const std::vector<ChatMessage>& messages,
                         const GenerationParams& params) override {
        std::lock_guard lock(mu_);
        ++calls_;
        const std::string digest = request_digest(model_, messages, params);
        auto it = by_digest_.find(digest);
        if (it == by_digest_.end())
            throw CassetteMiss("no recorded exchange for request " + digest);
        return it->second;
    }

    int call_count() const override {
        std::lock_guard lock(mu_);
        return calls_;
    }

  private:
    std::string model_;
    std::map<std::string, std::string> by_digest_;
    mutable std::mutex mu_;
    int calls_ = 0;
};

/// Wraps any backend and writes each new exchange to a cassette file. The
/// whole file is rewritten per append so a crash still leaves valid json.
/// Repeats of an already-recorded request keep the first recording, which is
/// what replay determinism requires.
class RecordingBackend final : public Backend {
  public:
    RecordingBackend(BackendPtr inner, std::filesystem::path cassette_path,
                     std::string model = "")
        : inner_(std::move(inner)), path_(std::move(cassette_path)), model_(std::move(model)) {
        if (std::filesystem::exists(path_)) entries_ = load_cassette(path_);
    }

    std::string complete(const std::vector<ChatMessage>& messages,
                         const GenerationParams& params) override {
        const std::string response = inner_->complete(messages, params);
        const std::string digest = request_digest(model_, messages, params);
        std::lock_guard lock(mu_);
        for (const auto& e : entries_)
            if (e.request_digest == digest) return response;
        entries_.push_back({digest, response});
        save_cassette(path_, entries_);
        return response;
    }

    int call_count() const override { return inner_->call_count(); }

  private:
    BackendPtr inner_;
    std::filesystem::path path_;
    std::string model_;
    std::vector<CassetteEntry> entries_;
    std::mutex mu_;
};

inline BackendPtr make_backend(const BackendDescriptor& desc) {
    BackendPtr backend;
    switch (desc.kind) {
        case BackendKind::Live: backend = std::make_shared<LiveBackend>(desc); break;
        case BackendKind::Scripted: backend = std::make_shared<ScriptedBackend>(desc); break;
        case BackendKind::Replay: backend = std::make_shared<ReplayBackend>(desc); break;
    }
    if (!desc.record_cassette.empty())
        backend = std::make_shared<RecordingBackend>(backend, desc.record_cassette, desc.model);
    return backend;
}

}  // namespace rlaa

#pragma once

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "t2v/canonical_json.hpp"
#include "t2v/common.hpp"

namespace t2v::backends {

enum class Role { system, user, assistant };

inline const char* role_name(Role r) {
    switch (r) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

struct MessagePart {
    enum class Kind { text, image };
    Kind kind = Kind::text;
    std::string content;  // text, or raw image bytes for Kind::image
    std::string mime = "image/x-portable-pixmap";

    static MessagePart text_part(std::string t) { return {Kind::text, std::move(t), {}}; }
    static MessagePart image_part(std::string bytes,
                                  std::string mime_type = "image/x-portable-pixmap") {
        return {Kind::image, std::move(bytes), std::move(mime_type)};
    }
};

struct ChatMessage {
    Role role = Role::user;
    std::vector<MessagePart> parts;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    std::string model_id;
    double temperature = 0.0;  // evaluation runs pin temperature 0
    int max_tokens = 1024;

    bool has_images() const {
        for (const auto& m : messages)
            for (const auto& p : m.parts)
                if (p.kind == MessagePart::Kind::image) return true;
        return false;
    }
};

struct Capabilities {
    bool text = true;
    bool image = false;
    bool video = false;
};

struct RetryPolicy {
    int max_attempts = 3;
    double backoff_base_s = 0.25;  // sleep base * 2^attempt between tries
};

struct BackendProfile {
    std::string name = "backend";
    std::string endpoint;  // e.g. http://127.0.0.1:8080
    std::string model_id = "default";
    std::string api_key;
    Capabilities capabilities;
    int max_in_flight = 4;
    int requests_per_minute = 600;
    RetryPolicy retry;
};

inline BackendProfile profile_from_json(const nlohmann::json& j) {
    BackendProfile p;
    p.name = j.value("name", p.name);
    p.endpoint = j.value("endpoint", p.endpoint);
    p.model_id = j.value("model_id", p.model_id);
    if (j.contains("capabilities")) {
        const auto& c = j["capabilities"];
        p.capabilities.text = c.value("text", true);
        p.capabilities.image = c.value("image", false);
        p.capabilities.video = c.value("video", false);
    }
    p.max_in_flight = j.value("max_in_flight", p.max_in_flight);
    p.requests_per_minute = j.value("requests_per_minute", p.requests_per_minute);
    if (j.contains("retry")) {
        p.retry.max_attempts = j["retry"].value("max_attempts", p.retry.max_attempts);
        p.retry.backoff_base_s = j["retry"].value("backoff_base_s", p.retry.backoff_base_s);
    }
    if (p.max_in_flight < 1) throw ValidationError("backend profile: max_in_flight must be >= 1");
    return p;
}

// Environment overrides: T2V_BACKEND_URL, T2V_BACKEND_KEY.
inline BackendProfile load_profile(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("backend profile " + path.string() + ": " + e.what());
    }
    BackendProfile p = profile_from_json(j);
    if (const char* url = std::getenv("T2V_BACKEND_URL")) p.endpoint = url;
    if (const char* key = std::getenv("T2V_BACKEND_KEY")) p.api_key = key;
    return p;
}

// Chat-completion JSON shape: messages array, images embedded as base64 data
// URLs. Also the canonical form behind request hashing.
inline nlohmann::json request_to_json(const ChatRequest& req) {
    nlohmann::json j;
    j["model"] = req.model_id;
    j["temperature"] = req.temperature;
    j["max_tokens"] = req.max_tokens;
    j["messages"] = nlohmann::json::array();
    for (const auto& m : req.messages) {
        nlohmann::json mj;
        mj["role"] = role_name(m.role);
        if (m.parts.size() == 1 && m.parts[0].kind == MessagePart::Kind::text) {
            mj["content"] = m.parts[0].content;
        } else {
            mj["content"] = nlohmann::json::array();
            for (const auto& p : m.parts) {
                if (p.kind == MessagePart::Kind::text) {
                    mj["content"].push_back({{"type", "text"}, {"text", p.content}});
                } else {
                    mj["content"].push_back(
                        {{"type", "image_url"},
                         {"image_url",
                          {{"url", "data:" + p.mime + ";base64," + base64_encode(p.content)}}}});
                }
            }
        }
        j["messages"].push_back(std::move(mj));
    }
    return j;
}

// Deterministic key of the full request content. Mock fixtures, audit files
// and replay all share it.
inline std::uint64_t request_key(const ChatRequest& req) {
    return fnv1a64(canonical_dump(request_to_json(req)));
}

class ChatBackend {
  public:
    virtual ~ChatBackend() = default;
    virtual std::string complete(const ChatRequest& req) = 0;
    virtual const BackendProfile& profile() const = 0;
};

inline void check_capabilities(const ChatRequest& req, const BackendProfile& profile) {
    bool has_user = false;
    for (const auto& m : req.messages) has_user = has_user || m.role == Role::user;
    if (!has_user) throw ValidationError("chat request needs at least one user message");
    if (req.has_images() && !profile.capabilities.image)
        throw ValidationError("image payload sent to text-only backend '" + profile.name + "'");
}

// ---- transcript store: mock fixtures, audit logs, replay ------------------

// Both fixture files and audit files are JSON objects carrying at least
// {"key": "<16-hex request hash>", "response": "..."}.
class TranscriptStore {
  public:
    void put(std::uint64_t key, std::string response) {
        entries_[key] = std::move(response);
    }

    std::optional<std::string> find(std::uint64_t key) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t size() const { return entries_.size(); }

    static TranscriptStore load_dir(const std::filesystem::path& dir) {
        TranscriptStore store;
        if (!std::filesystem::is_directory(dir))
            throw IoError("transcript directory does not exist: " + dir.string());
        std::vector<std::filesystem::path> files;
        for (const auto& e : std::filesystem::directory_iterator(dir))
            if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(read_file(f));
            } catch (const nlohmann::json::exception& e) {
                throw IoError("transcript file " + f.string() + ": " + e.what());
            }
            if (!j.contains("key") || !j.contains("response"))
                throw IoError("transcript file " + f.string() + " lacks key/response");
            store.put(std::stoull(j["key"].get<std::string>(), nullptr, 16),
                      j["response"].get<std::string>());
        }
        return store;
    }

  private:
    std::map<std::uint64_t, std::string> entries_;
};

// One JSON file per request under the audit directory, named by request hash.
class AuditWriter {
  public:
    explicit AuditWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    void record(const ChatRequest& req, const std::string& response, int attempts,
                const std::string& backend_name) {
        const std::uint64_t key = request_key(req);
        nlohmann::json j;
        j["key"] = to_hex16(key);
        j["backend"] = backend_name;
        j["attempts"] = attempts;
        j["timestamp_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::system_clock::now().time_since_epoch())
                                .count();
        j["request"] = request_to_json(req);
        j["response"] = response;
        std::lock_guard lock(mu_);
        write_file(dir_ / (to_hex16(key) + ".json"), j.dump(2) + "\n");
    }

  private:
    std::filesystem::path dir_;
    std::mutex mu_;
};

// Deterministic offline backend: a pure function of (request content, fixture
// set). Unknown requests fail loudly with the key so fixtures can be authored.
class MockChatBackend : public ChatBackend {
  public:
    explicit MockChatBackend(TranscriptStore store, BackendProfile profile = mock_profile())
        : store_(std::move(store)), profile_(std::move(profile)) {}

    static BackendProfile mock_profile() {
        BackendProfile p;
        p.name = "mock";
        p.model_id = "mock-model";
        p.capabilities = {true, true, true};
        return p;
    }

    std::string complete(const ChatRequest& req) override {
        check_capabilities(req, profile_);
        const std::uint64_t key = request_key(req);
        if (auto hit = store_.find(key)) return *hit;
        std::string last_text = "<none>";
        for (const auto& m : req.messages)
            for (const auto& p : m.parts)
                if (m.role == Role::user && p.kind == MessagePart::Kind::text) last_text = p.content;
        if (last_text.size() > 160) last_text = last_text.substr(0, 160) + "...";
        throw BackendError("mock backend has no fixture for request key " + to_hex16(key) +
                           " (last user text: " + last_text + ")");
    }

    const BackendProfile& profile() const override { return profile_; }

  private:
    TranscriptStore store_;
    BackendProfile profile_;
};

// ---- HTTP client ------------------------------------------------------------

namespace detail {

// split "http://host:port/prefix" into client base and path prefix
inline std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos)
        throw ValidationError("endpoint must start with http:// or https://: " + endpoint);
    auto path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {endpoint, ""};
    std::string prefix = endpoint.substr(path_start);
    if (prefix == "/") prefix.clear();
    return {endpoint.substr(0, path_start), prefix};
}

}  // namespace detail

// Chat-completion client with exponential-backoff retry on transport errors,
// 429 and 5xx.
class HttpChatBackend : public ChatBackend {
  public:
    explicit HttpChatBackend(BackendProfile profile) : profile_(std::move(profile)) {
        if (profile_.endpoint.empty()) throw ValidationError("backend endpoint not configured");
    }

    std::string complete(const ChatRequest& req) override {
        check_capabilities(req, profile_);
        const std::string body = request_to_json(req).dump();
        auto [base, prefix] = detail::split_endpoint(profile_.endpoint);
        const std::string path = prefix + "/v1/chat/completions";

        std::string last_error;
        for (int attempt = 1; attempt <= profile_.retry.max_attempts; ++attempt) {
            if (attempt > 1) {
                const double sleep_s =
                    profile_.retry.backoff_base_s * std::pow(2.0, attempt - 2);
                std::this_thread::sleep_for(std::chrono::duration<double>(sleep_s));
            }
            httplib::Client client(base);
            client.set_read_timeout(300, 0);
            httplib::Headers headers;
            if (!profile_.api_key.empty())
                headers.emplace("Authorization", "Bearer " + profile_.api_key);
            auto res = client.Post(path, headers, body, "application/json");
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status == 429 || res->status >= 500) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200)
                throw BackendError("backend '" + profile_.name + "' returned HTTP " +
                                   std::to_string(res->status) + ": " + res->body);
            return parse_completion(res->body);
        }
        throw BackendError("backend '" + profile_.name + "' failed after " +
                           std::to_string(profile_.retry.max_attempts) +
                           " attempts; last error: " + last_error);
    }

    const BackendProfile& profile() const override { return profile_; }

  private:
    static std::string parse_completion(const std::string& body) {
        try {
            auto j = nlohmann::json::parse(body);
            return j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw BackendError(std::string("malformed completion response: ") + e.what());
        }
    }

    BackendProfile profile_;
};

// ---- throttling + audit decorators ----------------------------------------

// In-flight cap plus a token bucket sized to one tenth of the per-minute
// budget (minimum 1).
class ThrottledBackend : public ChatBackend {
  public:
    explicit ThrottledBackend(std::shared_ptr<ChatBackend> inner)
        : inner_(std::move(inner)),
          capacity_(std::max(1.0, inner_->profile().requests_per_minute / 6.0)),
          tokens_(capacity_),
          last_refill_(std::chrono::steady_clock::now()) {}

    std::string complete(const ChatRequest& req) override {
        acquire_token();
        {
            std::unique_lock lock(mu_);
            inflight_cv_.wait(lock, [&] { return in_flight_ < profile().max_in_flight; });
            ++in_flight_;
        }
        struct Release {
            ThrottledBackend* self;
            ~Release() {
                std::lock_guard lock(self->mu_);
                --self->in_flight_;
                self->inflight_cv_.notify_one();
            }
        } release{this};
        return inner_->complete(req);
    }

    const BackendProfile& profile() const override { return inner_->profile(); }

  private:
    void acquire_token() {
        std::unique_lock lock(mu_);
        while (true) {
            const auto now = std::chrono::steady_clock::now();
            const double elapsed = std::chrono::duration<double>(now - last_refill_).count();
            tokens_ = std::min(capacity_,
                               tokens_ + elapsed * profile().requests_per_minute / 60.0);
            last_refill_ = now;
            if (tokens_ >= 1.0) {
                tokens_ -= 1.0;
                return;
            }
            const double wait_s = (1.0 - tokens_) * 60.0 / profile().requests_per_minute;
            lock.unlock();
            std::this_thread::sleep_for(std::chrono::duration<double>(wait_s));
            lock.lock();
        }
    }

    std::shared_ptr<ChatBackend> inner_;
    std::mutex mu_;
    std::condition_variable inflight_cv_;
    int in_flight_ = 0;
    double capacity_;
    double tokens_;
    std::chrono::steady_clock::time_point last_refill_;
};

class AuditingBackend : public ChatBackend {
  public:
    AuditingBackend(std::shared_ptr<ChatBackend> inner, std::shared_ptr<AuditWriter> audit)
        : inner_(std::move(inner)), audit_(std::move(audit)) {}

    std::string complete(const ChatRequest& req) override {
        const std::string response = inner_->complete(req);
        audit_->record(req, response, 1, profile().name);
        return response;
    }

    const BackendProfile& profile() const override { return inner_->profile(); }

  private:
    std::shared_ptr<ChatBackend> inner_;
    std::shared_ptr<AuditWriter> audit_;
};

// ---- raw score transport (quality providers) --------------------------------

// TSV lines `video_id<TAB>score`, or a scoring service POSTed at
// <endpoint>/score with {"video_ids": [...]} returning
// {"scores": [{"video_id": ..., "score": ...}]}.
inline std::map<std::string, double> read_score_file(const std::filesystem::path& path) {
    const std::string content = read_file(path);
    std::map<std::string, double> out;
    std::istringstream in(content);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw ValidationError("score file " + path.string() + " line " +
                                  std::to_string(line_no) + ": expected video_id<TAB>score");
        const std::string id = line.substr(0, tab);
        double score = 0.0;
        try {
            score = std::stod(line.substr(tab + 1));
        } catch (const std::exception&) {
            throw ValidationError("score file " + path.string() + " line " +
                                  std::to_string(line_no) + ": bad score");
        }
        if (out.count(id))
            throw ValidationError("score file " + path.string() + ": duplicate video_id '" + id +
                                  "'");
        out[id] = score;
    }
    return out;
}

inline std::vector<std::pair<std::string, double>> fetch_scores(
    const std::vector<std::string>& video_ids, const std::string& source) {
    std::map<std::string, double> available;
    if (starts_with(source, "http://") || starts_with(source, "https://")) {
        auto [base, prefix] = detail::split_endpoint(source);
        httplib::Client client(base);
        nlohmann::json body;
        body["video_ids"] = video_ids;
        auto res = client.Post(prefix + "/score", body.dump(), "application/json");
        if (!res)
            throw BackendError("score service unreachable: " + source);
        if (res->status != 200)
            throw BackendError("score service " + source + " returned HTTP " +
                               std::to_string(res->status));
        try {
            auto j = nlohmann::json::parse(res->body);
            for (const auto& e : j.at("scores"))
                available[e.at("video_id").get<std::string>()] = e.at("score").get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw BackendError(std::string("malformed score service response: ") + e.what());
        }
    } else {
        available = read_score_file(source);
    }

    std::vector<std::string> missing;
    std::vector<std::pair<std::string, double>> out;
    for (const auto& id : video_ids) {
        auto it = available.find(id);
        if (it == available.end()) {
            missing.push_back(id);
            continue;
        }
        if (!std::isfinite(it->second))
            throw ValidationError("score provider returned non-finite score for '" + id + "'");
        out.emplace_back(id, it->second);
    }
    if (!missing.empty()) {
        std::string list;
        for (std::size_t i = 0; i < missing.size(); ++i)
            list += (i ? ", " : "") + missing[i];
        throw ValidationError("score provider missing ids: " + list);
    }
    return out;
}

}  // namespace t2v::backends

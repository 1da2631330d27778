#pragma once

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#include <json.hpp>

#include "droidlens/core/error.hpp"
#include "droidlens/dataset/consensus.hpp"

namespace droidlens {

inline constexpr const char* kOracleKeyVariable = "DROIDLENS_ORACLE_KEY";

inline bool is_sha256_hex(std::string_view s) {
    if (s.size() != 64) return false;
    for (char c : s) {
        if (!std::isxdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

inline std::string lowercase(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

/// Parses `{"engines": {"<name>": {"detected": <bool>}, ...}}`.
inline ScanVerdicts parse_report(std::string_view body, const std::string& hash) {
    ScanVerdicts v;
    v.file_hash = hash;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError("report for " + hash + ": invalid JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("engines") || !j["engines"].is_object()) {
        throw DataError("report for " + hash + ": missing \"engines\" object");
    }
    for (const auto& [name, verdict] : j["engines"].items()) {
        if (!verdict.is_object() || !verdict.contains("detected") || !verdict["detected"].is_boolean()) {
            throw DataError("report for " + hash + ": engine '" + name + "' lacks a boolean \"detected\"");
        }
        v.engines[name] = verdict["detected"].get<bool>();
    }
    return v;
}

/// Source of per-engine verdicts by SHA-256. `lookup` returns nullopt when
/// the oracle has no report for the hash.
class LabelOracle {
public:
    virtual ~LabelOracle() = default;
    virtual std::optional<ScanVerdicts> lookup(const std::string& sha256) = 0;
};

/// Replays recorded responses from `<dir>/<sha256>.json`.
class FixtureOracle final : public LabelOracle {
public:
    explicit FixtureOracle(std::filesystem::path dir) : dir_(std::move(dir)) {
        if (!std::filesystem::is_directory(dir_)) throw DataError("fixture directory not found: " + dir_.string());
    }

    std::optional<ScanVerdicts> lookup(const std::string& sha256) override {
        if (!is_sha256_hex(sha256)) throw DataError("not a SHA-256 hex digest: " + sha256);
        const std::string hash = lowercase(sha256);
        const auto path = dir_ / (hash + ".json");
        std::ifstream in(path, std::ios::binary);
        if (!in) return std::nullopt;
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_report(buf.str(), hash);
    }

private:
    std::filesystem::path dir_;
};

/// Spaces calls at least 60/requests_per_minute seconds apart.
class RateLimiter {
public:
    using Clock = std::chrono::steady_clock;
    using Sleeper = std::function<void(Clock::duration)>;
    using Now = std::function<Clock::time_point()>;

    explicit RateLimiter(double requests_per_minute, Now now = Clock::now,
                         Sleeper sleep = [](Clock::duration d) { std::this_thread::sleep_for(d); })
        : now_(std::move(now)), sleep_(std::move(sleep)) {
        if (!(requests_per_minute > 0.0)) throw InvalidArgument("requests per minute must be positive");
        interval_ = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(60.0 / requests_per_minute));
    }

    void acquire() {
        if (last_) {
            const auto ready = *last_ + interval_;
            const auto t = now_();
            if (t < ready) sleep_(ready - t);
        }
        last_ = now_();
    }

private:
    Now now_;
    Sleeper sleep_;
    Clock::duration interval_{};
    std::optional<Clock::time_point> last_;
};

/// Client for a report service answering `GET <base_url>/report/<sha256>`.
/// The API key, when present, is sent as the `x-apikey` header.
class HttpOracle final : public LabelOracle {
public:
    HttpOracle(const std::string& base_url, std::optional<std::string> api_key, double requests_per_minute = 4.0)
        : api_key_(std::move(api_key)), limiter_(requests_per_minute) {
        const auto scheme_end = base_url.find("://");
        if (scheme_end == std::string::npos) throw UsageError("oracle URL needs a scheme: " + base_url);
        const auto path_start = base_url.find('/', scheme_end + 3);
        const std::string origin = base_url.substr(0, path_start);
        prefix_ = path_start == std::string::npos ? "" : base_url.substr(path_start);
        while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
        client_ = std::make_unique<httplib::Client>(origin);
        client_->set_connection_timeout(10);
        client_->set_read_timeout(30);
    }

    std::optional<ScanVerdicts> lookup(const std::string& sha256) override {
        if (!is_sha256_hex(sha256)) throw DataError("not a SHA-256 hex digest: " + sha256);
        const std::string hash = lowercase(sha256);
        limiter_.acquire();
        httplib::Headers headers;
        if (api_key_) headers.emplace("x-apikey", *api_key_);
        auto res = client_->Get(prefix_ + "/report/" + hash, headers);
        if (!res) throw DataError("oracle request for " + hash + " failed: " + httplib::to_string(res.error()));
        if (res->status == 404) return std::nullopt;
        if (res->status != 200) {
            throw DataError("oracle returned HTTP " + std::to_string(res->status) + " for " + hash);
        }
        return parse_report(res->body, hash);
    }

private:
    std::optional<std::string> api_key_;
    RateLimiter limiter_;
    std::string prefix_;
    std::unique_ptr<httplib::Client> client_;
};

inline std::optional<std::string> oracle_key_from_env() {
    if (const char* k = std::getenv(kOracleKeyVariable); k && *k) return std::string(k);
    return std::nullopt;
}

/// `http://` or `https://` targets the HTTP client; anything else is a fixture directory.
inline std::unique_ptr<LabelOracle> make_oracle(const std::string& target, double requests_per_minute) {
    if (target.starts_with("http://") || target.starts_with("https://")) {
        return std::make_unique<HttpOracle>(target, oracle_key_from_env(), requests_per_minute);
    }
    return std::make_unique<FixtureOracle>(target);
}

} // namespace droidlens

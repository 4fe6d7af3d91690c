#include "blendforge/vlm.hpp"

#include <chrono>
#include <thread>

#include <nlohmann/json.hpp>

#include <httplib.h>

#include "blendforge/errors.hpp"
#include "blendforge/image_io.hpp"
#include "blendforge/rng.hpp"
#include "blendforge/util.hpp"

namespace blendforge {

using nlohmann::json;

Verdict parse_verdict(const std::string& raw) {
    const std::string text = trim(strip_wrapping_quotes(trim(raw)));
    if (text.empty()) throw UnparseableVerdict("empty response");
    if (text.find('\n') != std::string::npos || text.find('\r') != std::string::npos)
        throw UnparseableVerdict("verdict must be a single line");

    bool accepted;
    std::string rest;
    if (text.rfind("GOOD:", 0) == 0) {
        accepted = true;
        rest = text.substr(5);
    } else if (text.rfind("BAD:", 0) == 0) {
        accepted = false;
        rest = text.substr(4);
    } else {
        throw UnparseableVerdict("missing GOOD:/BAD: prefix: " + text);
    }
    const std::string reason = trim(rest);
    if (reason.empty()) throw UnparseableVerdict("empty reason");
    return {accepted, reason};
}

std::string format_verdict(const Verdict& v) {
    return (v.accepted ? "GOOD: " : "BAD: ") + v.reason;
}

Caption parse_caption(const std::string& raw) {
    const std::string text = trim(strip_wrapping_quotes(trim(raw)));
    if (text.empty()) throw UnparseableCaption("empty caption");
    if (text.find('\n') != std::string::npos || text.find('\r') != std::string::npos)
        throw UnparseableCaption("caption must be a single line");
    Caption c;
    c.text = text;
    c.word_count = count_words(text);
    c.length_warning = c.word_count < 8 || c.word_count > 20;
    return c;
}

namespace {

void backoff_sleep(const RetryPolicy& policy, int transport_attempt) {
    if (policy.backoff_base_s <= 0.0) return;
    double delay = policy.backoff_base_s;
    for (int i = 0; i < transport_attempt; ++i) delay *= policy.backoff_factor;
    if (policy.jitter_fraction > 0.0) {
        thread_local Rng jitter_rng(0x6a69747465720ULL ^
                                    std::hash<std::thread::id>{}(std::this_thread::get_id()));
        delay *= 1.0 + policy.jitter_fraction * jitter_rng.next_double();
    }
    std::this_thread::sleep_for(std::chrono::duration<double>(delay));
}

VlmRequest make_request(const RgbImage& image, const std::string& prompt,
                        const std::string& model_name) {
    VlmRequest req;
    req.model_name = model_name;
    req.prompt = prompt;
    req.image_png = encode_rgb_png(image);
    return req;
}

/// Runs one request with transport retries; returns the raw response.
std::string complete_with_retries(VlmGateway& gateway, const VlmRequest& request,
                                  const std::string& image_id, const RetryPolicy& policy) {
    for (int attempt = 0;; ++attempt) {
        try {
            return gateway.complete(request, image_id);
        } catch (const GatewayError&) {
            if (attempt >= policy.transport_retries) throw;
            backoff_sleep(policy, attempt);
        }
    }
}

}  // namespace

Verdict filter_image(VlmGateway& gateway, const RgbImage& image, const std::string& prompt,
                     const RetryPolicy& policy, const std::string& image_id,
                     const std::string& model_name) {
    const VlmRequest request = make_request(image, prompt, model_name);
    for (int attempt = 0; attempt <= policy.semantic_retries; ++attempt) {
        const std::string raw = complete_with_retries(gateway, request, image_id, policy);
        try {
            return parse_verdict(raw);
        } catch (const UnparseableVerdict&) {
            // Semantic failure: re-ask immediately.
        }
    }
    // Ambiguity maps to removal: only reliably captionable images are kept.
    return {false, "unparseable"};
}

Caption caption_image(VlmGateway& gateway, const RgbImage& image, const std::string& prompt,
                      const RetryPolicy& policy, const std::string& image_id,
                      const std::string& model_name) {
    const VlmRequest request = make_request(image, prompt, model_name);
    std::string last_error = "unparseable caption";
    for (int attempt = 0; attempt <= policy.semantic_retries; ++attempt) {
        const std::string raw = complete_with_retries(gateway, request, image_id, policy);
        try {
            return parse_caption(raw);
        } catch (const UnparseableCaption& e) {
            last_error = e.what();
        }
    }
    throw UnparseableCaption(last_error + " (after " + std::to_string(policy.semantic_retries) +
                             " retries)");
}

// ---------------------------------------------------------------------------
// HTTP gateway

HttpVlmGateway::HttpVlmGateway(const std::string& endpoint, double timeout_s)
    : timeout_s_(timeout_s) {
    const auto scheme_pos = endpoint.find("://");
    if (scheme_pos == std::string::npos)
        throw InvalidConfig("vlm endpoint must be scheme://host[:port][/prefix]: " + endpoint);
    const auto path_pos = endpoint.find('/', scheme_pos + 3);
    if (path_pos == std::string::npos) {
        base_ = endpoint;
    } else {
        base_ = endpoint.substr(0, path_pos);
        path_prefix_ = endpoint.substr(path_pos);
        while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    }
}

std::string HttpVlmGateway::complete(const VlmRequest& request, const std::string&) {
    json body;
    body["model"] = request.model_name;
    body["messages"] = json::array(
        {{{"role", "user"},
          {"content",
           json::array(
               {{{"type", "text"}, {"text", request.prompt}},
                {{"type", "image_url"},
                 {"image_url",
                  {{"url", "data:image/png;base64," +
                               base64_encode(request.image_png.data(), request.image_png.size())}}}}})}}});
    body["max_tokens"] = request.max_tokens;
    body["temperature"] = request.temperature;

    httplib::Client client(base_);
    client.set_connection_timeout(std::chrono::duration<double>(timeout_s_));
    client.set_read_timeout(std::chrono::duration<double>(timeout_s_));

    httplib::Headers headers;
    if (const char* key = std::getenv("BLENDFORGE_VLM_API_KEY"))
        headers.emplace("Authorization", std::string("Bearer ") + key);

    const auto res =
        client.Post(path_prefix_ + "/v1/chat/completions", headers, body.dump(), "application/json");
    if (!res) throw GatewayError("vlm request failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw GatewayError("vlm request returned HTTP " + std::to_string(res->status) + ": " +
                           res->body.substr(0, 256));
    try {
        const json reply = json::parse(res->body);
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw GatewayError(std::string("malformed vlm response: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Scripted stub

std::unique_ptr<StubVlmGateway> StubVlmGateway::from_json_file(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    if (!j.is_object()) throw ParseError(path + ": stub file must be a JSON object");
    auto stub = std::make_unique<StubVlmGateway>();
    for (const auto& [key, value] : j.items()) {
        std::vector<std::string> responses;
        if (value.is_string()) {
            responses.push_back(value.get<std::string>());
        } else if (value.is_array()) {
            for (const auto& v : value) responses.push_back(v.get<std::string>());
        } else {
            throw ParseError(path + ": stub values must be strings or arrays of strings");
        }
        stub->script(key, std::move(responses));
    }
    return stub;
}

void StubVlmGateway::script(const std::string& image_id, std::vector<std::string> responses) {
    scripts_[image_id] = std::move(responses);
}

std::string StubVlmGateway::complete(const VlmRequest&, const std::string& image_id) {
    const int current = in_flight_.fetch_add(1) + 1;
    int seen = max_in_flight_seen_.load();
    while (current > seen && !max_in_flight_seen_.compare_exchange_weak(seen, current)) {
    }
    total_calls_.fetch_add(1);

    if (delay_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_));

    std::string response;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = scripts_.find(image_id);
        if (it == scripts_.end()) it = scripts_.find("*");
        if (it == scripts_.end() || it->second.empty()) {
            in_flight_.fetch_sub(1);
            throw GatewayError("stub has no script for image id '" + image_id + "'");
        }
        size_t& cursor = cursors_[it->first == "*" ? "*:" + image_id : image_id];
        response = it->second[std::min(cursor, it->second.size() - 1)];
        ++cursor;
    }
    in_flight_.fetch_sub(1);

    if (response == kTransportErrorMarker) throw GatewayError("stub transport error");
    return response;
}

}  // namespace blendforge

#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "blendforge/image.hpp"

namespace blendforge {

struct VlmRequest {
    std::string model_name = "Qwen3-VL-8B-Instruct";
    std::string prompt;
    std::vector<std::uint8_t> image_png;  // encoded payload sent as a data URI
    int max_tokens = 256;
    double temperature = 0.0;
};

/// Parsed filtering verdict: exactly one line, "GOOD: <reason>" or
/// "BAD: <reason>".
struct Verdict {
    bool accepted = false;
    std::string reason;
};

struct Caption {
    std::string text;  // single line
    int word_count = 0;
    bool length_warning = false;  // word_count outside [8, 20]
};

/// Parses a raw model response into a Verdict. Surrounding whitespace and one
/// pair of wrapping quotes are stripped first. Throws UnparseableVerdict on
/// multi-line input, missing GOOD:/BAD: prefix (case-sensitive), or an empty
/// reason. Total: any input either parses or throws that one error.
Verdict parse_verdict(const std::string& raw);

std::string format_verdict(const Verdict& v);

/// Parses a raw caption response: strips wrapping quotes/whitespace, rejects
/// empty or multi-line text, counts whitespace-separated words and flags
/// lengths outside [8, 20] (a warning, not a rejection).
Caption parse_caption(const std::string& raw);

/// Transport abstraction. complete() returns the raw model text or throws
/// GatewayError for transport-level failures (one attempt; retry policy lives
/// in the callers). image_id is metadata for scripted stubs; the HTTP
/// implementation ignores it.
class VlmGateway {
  public:
    virtual ~VlmGateway() = default;
    virtual std::string complete(const VlmRequest& request, const std::string& image_id) = 0;
};

struct RetryPolicy {
    int semantic_retries = 2;    // re-asks after an unparseable response
    int transport_retries = 3;   // re-sends after a transport failure
    double backoff_base_s = 1.0; // exponential backoff: base * factor^attempt
    double backoff_factor = 2.0;
    double jitter_fraction = 0.25;
};

/// Captionability filter: sends the prompt + image, parses the verdict and
/// retries unparseable responses up to policy.semantic_retries times before
/// giving a conservative reject with reason "unparseable". Transport failures
/// are retried with exponential backoff and then surface as GatewayError.
Verdict filter_image(VlmGateway& gateway, const RgbImage& image, const std::string& prompt,
                     const RetryPolicy& policy = {}, const std::string& image_id = {},
                     const std::string& model_name = "Qwen3-VL-8B-Instruct");

/// Caption generation with the same retry structure; unparseable responses
/// after retries throw UnparseableCaption (an error, not a rejection).
Caption caption_image(VlmGateway& gateway, const RgbImage& image, const std::string& prompt,
                      const RetryPolicy& policy = {}, const std::string& image_id = {},
                      const std::string& model_name = "Qwen3-VL-8B-Instruct");

/// Stock prompts used when no prompt file is configured.
const std::string& default_filter_prompt();
const std::string& default_caption_prompt();

/// OpenAI-compatible chat-completions client. Body schema:
/// messages[0].content = [{type:"text"}, {type:"image_url", image_url.url =
/// "data:image/png;base64,..."}]. The bearer token is read from the
/// BLENDFORGE_VLM_API_KEY environment variable when present.
class HttpVlmGateway : public VlmGateway {
  public:
    /// endpoint: scheme://host[:port][/path-prefix]
    explicit HttpVlmGateway(const std::string& endpoint, double timeout_s = 60.0);

    std::string complete(const VlmRequest& request, const std::string& image_id) override;

  private:
    std::string base_;
    std::string path_prefix_;
    double timeout_s_;
};

/// Scripted gateway for tests and offline runs. Responses are keyed by image
/// id; each id maps to a list consumed in order (the last entry repeats).
/// The key "*" is the fallback script. A response equal to
/// "<transport_error>" raises GatewayError instead of returning. The gateway
/// tracks concurrent calls so tests can assert the in-flight cap.
class StubVlmGateway : public VlmGateway {
  public:
    StubVlmGateway() = default;

    static std::unique_ptr<StubVlmGateway> from_json_file(const std::string& path);

    void script(const std::string& image_id, std::vector<std::string> responses);

    std::string complete(const VlmRequest& request, const std::string& image_id) override;

    int max_observed_in_flight() const { return max_in_flight_seen_; }
    int total_calls() const { return total_calls_; }

    /// Artificial per-call latency, to make concurrency observable in tests.
    void set_delay_ms(int ms) { delay_ms_ = ms; }

    static constexpr const char* kTransportErrorMarker = "<transport_error>";

  private:
    std::map<std::string, std::vector<std::string>> scripts_;
    std::map<std::string, size_t> cursors_;
    std::mutex mutex_;
    std::atomic<int> in_flight_{0};
    std::atomic<int> max_in_flight_seen_{0};
    std::atomic<int> total_calls_{0};
    int delay_ms_ = 0;
};

}  // namespace blendforge

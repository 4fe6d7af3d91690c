#include <doctest.h>

#include <nlohmann/json.hpp>

#include <httplib.h>

#include <atomic>
#include <thread>

#include "blendforge/errors.hpp"
#include "blendforge/rng.hpp"
#include "blendforge/util.hpp"
#include "blendforge/vlm.hpp"
#include "test_util.hpp"

using namespace blendforge;

namespace {

RgbImage tiny_image() {
    RgbImage image(4, 4);
    for (size_t i = 0; i < image.pixels.size(); ++i)
        image.pixels[i] = static_cast<std::uint8_t>(i * 11);
    return image;
}

RetryPolicy fast_retry() {
    RetryPolicy policy;
    policy.backoff_base_s = 0.0;  // no sleeping in tests
    return policy;
}

}  // namespace

TEST_CASE("verdict parsing table") {
    struct Case {
        const char* raw;
        bool ok;
        bool accepted;
        const char* reason;
    };
    const Case cases[] = {
        {"GOOD: clear chair with context", true, true, "clear chair with context"},
        {"BAD: extreme close-up of surface", true, false, "extreme close-up of surface"},
        {"GOOD: red sphere on a plane", true, true, "red sphere on a plane"},
        {"\"GOOD: quoted verdict\"", true, true, "quoted verdict"},
        {"  GOOD: padded with spaces  ", true, true, "padded with spaces"},
        {"GOOD: reason with: inner colon", true, true, "reason with: inner colon"},
        {"GOOD: trailing newline ok\n", true, true, "trailing newline ok"},
        {"BAD: x", true, false, "x"},
        {"GOOD:no space after colon", true, true, "no space after colon"},
        {"\"BAD: quoted bad\"", true, false, "quoted bad"},
        // Malformed.
        {"The image looks fine to me.", false, false, nullptr},
        {"good: lowercase prefix", false, false, nullptr},
        {"Good: capitalized wrong", false, false, nullptr},
        {"GOOD:", false, false, nullptr},
        {"GOOD:    ", false, false, nullptr},
        {"BAD:", false, false, nullptr},
        {"", false, false, nullptr},
        {"\"\"", false, false, nullptr},
        {"GOOD: line one\nBAD: line two", false, false, nullptr},
        {"GOODNESS: wrong token", false, false, nullptr},
    };
    int checked = 0;
    for (const auto& c : cases) {
        INFO("raw = [", c.raw, "]");
        if (c.ok) {
            const Verdict v = parse_verdict(c.raw);
            CHECK(v.accepted == c.accepted);
            CHECK(v.reason == c.reason);
        } else {
            CHECK_THROWS_AS(parse_verdict(c.raw), UnparseableVerdict);
        }
        ++checked;
    }
    CHECK(checked == 20);
}

TEST_CASE("parse_verdict round-trips formatted verdicts") {
    const Verdict cases[] = {{true, "a tidy desk scene"}, {false, "mostly black frame"}};
    for (const auto& v : cases) {
        const Verdict back = parse_verdict(format_verdict(v));
        CHECK(back.accepted == v.accepted);
        CHECK(back.reason == v.reason);
    }
}

TEST_CASE("parse_verdict is total over fuzzed input") {
    Rng rng(41);
    for (int i = 0; i < 2000; ++i) {
        std::string s;
        const int len = static_cast<int>(rng.next_u64() % 40);
        for (int k = 0; k < len; ++k) s.push_back(static_cast<char>(rng.next_u64() % 256));
        try {
            const Verdict v = parse_verdict(s);
            CHECK_FALSE(v.reason.empty());
        } catch (const UnparseableVerdict&) {
            // the only acceptable failure mode
        }
    }
}

TEST_CASE("caption parsing") {
    const Caption ok = parse_caption("Three trees standing on a grassy field under a cloudy sky.");
    CHECK(ok.word_count == 11);
    CHECK_FALSE(ok.length_warning);

    const Caption quoted = parse_caption("\"A wooden chair placed next to a small table in a bright room.\"");
    CHECK(quoted.word_count == 13);
    CHECK(quoted.text.front() == 'A');

    const Caption brief = parse_caption("A chair.");
    CHECK(brief.word_count == 2);
    CHECK(brief.length_warning);

    const Caption wordy = parse_caption(
        "A very long caption that keeps going and going with far too many words to count as a "
        "short factual description of anything at all.");
    CHECK(wordy.length_warning);

    CHECK_THROWS_AS(parse_caption("line1\nline2"), UnparseableCaption);
    CHECK_THROWS_AS(parse_caption(""), UnparseableCaption);
    CHECK_THROWS_AS(parse_caption("   \n  "), UnparseableCaption);
}

TEST_CASE("stub scripts run in order and the last entry repeats") {
    StubVlmGateway stub;
    stub.script("a", {"GOOD: first", "BAD: second"});
    VlmRequest req;
    CHECK(stub.complete(req, "a") == "GOOD: first");
    CHECK(stub.complete(req, "a") == "BAD: second");
    CHECK(stub.complete(req, "a") == "BAD: second");
    CHECK_THROWS_AS(stub.complete(req, "unknown"), GatewayError);
}

TEST_CASE("filter_image retries unparseable output then rejects") {
    StubVlmGateway stub;
    stub.script("img", {"garbage", "more garbage", "still garbage", "GOOD: never reached"});
    const Verdict v = filter_image(stub, tiny_image(), "prompt", fast_retry(), "img");
    CHECK_FALSE(v.accepted);
    CHECK(v.reason == "unparseable");
    CHECK(stub.total_calls() == 3);  // 1 try + 2 retries
}

TEST_CASE("filter_image recovers when a retry parses") {
    StubVlmGateway stub;
    stub.script("img", {"garbage", "GOOD: second time lucky"});
    const Verdict v = filter_image(stub, tiny_image(), "prompt", fast_retry(), "img");
    CHECK(v.accepted);
    CHECK(stub.total_calls() == 2);
}

TEST_CASE("persistent transport errors surface as GatewayError") {
    StubVlmGateway stub;
    stub.script("img", {StubVlmGateway::kTransportErrorMarker});
    CHECK_THROWS_AS(filter_image(stub, tiny_image(), "prompt", fast_retry(), "img"), GatewayError);
    CHECK(stub.total_calls() == 4);  // 1 try + 3 transport retries
}

TEST_CASE("a transient transport error is retried and absorbed") {
    StubVlmGateway stub;
    stub.script("img", {StubVlmGateway::kTransportErrorMarker, "BAD: dark frame"});
    const Verdict v = filter_image(stub, tiny_image(), "prompt", fast_retry(), "img");
    CHECK_FALSE(v.accepted);
    CHECK(v.reason == "dark frame");
}

TEST_CASE("caption_image errors after exhausting retries") {
    StubVlmGateway stub;
    stub.script("img", {"a\nb", "c\nd", "e\nf"});
    CHECK_THROWS_AS(caption_image(stub, tiny_image(), "prompt", fast_retry(), "img"),
                    UnparseableCaption);
}

TEST_CASE("stub observes the in-flight cap") {
    StubVlmGateway stub;
    stub.script("*", {"GOOD: fine"});
    stub.set_delay_ms(5);

    const int cap = 4;
    parallel_map<int>(32, cap, [&](size_t i) {
        filter_image(stub, tiny_image(), "prompt", fast_retry(), "r" + std::to_string(i));
        return 0;
    });
    CHECK(stub.max_observed_in_flight() <= cap);
    CHECK(stub.max_observed_in_flight() >= 2);  // the pool really ran concurrently
    CHECK(stub.total_calls() == 32);
}

TEST_CASE("default prompts carry their key contract lines") {
    CHECK(default_filter_prompt().find("Output exactly one line.") != std::string::npos);
    CHECK(default_filter_prompt().find("GOOD: <brief factual reason>") != std::string::npos);
    CHECK(default_caption_prompt().find("Return only the caption.") != std::string::npos);
    CHECK(default_caption_prompt().find("8–20 words.") != std::string::npos);
}

TEST_CASE("http gateway round trip against a local server") {
    httplib::Server server;
    std::atomic<int> failures_left{2};
    std::string seen_auth, seen_model, seen_url_prefix;

    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        if (failures_left.fetch_sub(1) > 0) {
            res.status = 500;
            res.set_content("overloaded", "text/plain");
            return;
        }
        seen_auth = req.get_header_value("Authorization");
        const auto body = nlohmann::json::parse(req.body);
        seen_model = body.at("model").get<std::string>();
        seen_url_prefix = body.at("messages")[0]["content"][1]["image_url"]["url"]
                              .get<std::string>()
                              .substr(0, 22);
        nlohmann::json reply = {
            {"choices", {{{"message", {{"role", "assistant"}, {"content", "GOOD: red sphere"}}}}}}};
        res.set_content(reply.dump(), "application/json");
    });

    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    setenv("BLENDFORGE_VLM_API_KEY", "sekret", 1);
    HttpVlmGateway gateway("http://127.0.0.1:" + std::to_string(port), 5.0);
    RetryPolicy policy = fast_retry();

    const Verdict v = filter_image(gateway, tiny_image(), "judge this", policy, "img");
    CHECK(v.accepted);
    CHECK(v.reason == "red sphere");
    CHECK(seen_auth == "Bearer sekret");
    CHECK(seen_model == "Qwen3-VL-8B-Instruct");
    CHECK(seen_url_prefix == "data:image/png;base64,");

    server.stop();
    server_thread.join();
    unsetenv("BLENDFORGE_VLM_API_KEY");
}

TEST_CASE("http gateway reports persistent server failure") {
    httplib::Server server;
    server.Post("/v1/chat/completions", [](const httplib::Request&, httplib::Response& res) {
        res.status = 500;
        res.set_content("boom", "text/plain");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpVlmGateway gateway("http://127.0.0.1:" + std::to_string(port), 5.0);
    CHECK_THROWS_AS(filter_image(gateway, tiny_image(), "judge", fast_retry(), "img"),
                    GatewayError);

    server.stop();
    server_thread.join();
}

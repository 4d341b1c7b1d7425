#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "devchat/backend.hpp"
#include "devchat/error.hpp"

using namespace devchat;
using nlohmann::json;

namespace {

// Local chat-completions stand-in. The user message selects the reply.
class FakeServer {
 public:
  FakeServer() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      {
        std::lock_guard lock(mutex_);
        last_body = req.body;
        last_auth = req.get_header_value("Authorization");
      }
      const json body = json::parse(req.body);
      const std::string user = body["messages"][1]["content"];
      if (user == "slow") {
        std::this_thread::sleep_for(std::chrono::milliseconds(1500));
      } else if (user == "busy") {
        res.status = 429;
        return;
      } else if (user == "broken") {
        res.status = 503;
        return;
      } else if (user == "forbidden") {
        res.status = 400;
        res.set_content(R"({"error": "bad request"})", "application/json");
        return;
      } else if (user == "filtered") {
        res.set_content(R"({"choices": [{"finish_reason": "content_filter", "message": {"content": ""}}]})",
                        "application/json");
        return;
      } else if (user == "garbage") {
        res.set_content("<html>oops</html>", "text/html");
        return;
      }
      const json reply = {{"choices", json::array({{{"finish_reason", "stop"},
                                                     {"message", {{"role", "assistant"}, {"content", "echo: " + user}}}}})}};
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

  std::mutex mutex_;
  std::string last_body;
  std::string last_auth;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

CompletionRequest request(std::string user) {
  CompletionRequest r;
  r.system = "You label things.";
  r.user = std::move(user);
  r.temperature = 0.0;
  r.max_output_tokens = 64;
  r.timeout = std::chrono::milliseconds(3000);
  return r;
}

}  // namespace

TEST_SUITE("http_backend") {
  TEST_CASE("wire format and error mapping against a local server") {
    FakeServer server;
    ::setenv("DEVCHAT_TEST_TOKEN", "s3cret", 1);
    HttpBackend backend({server.endpoint(), "/v1/chat/completions", "test-model", "DEVCHAT_TEST_TOKEN", false});

    const auto ok = backend.complete(request("hello"));
    REQUIRE(ok.ok());
    CHECK(ok.text() == "echo: hello");
    {
      std::lock_guard lock(server.mutex_);
      CHECK(server.last_auth == "Bearer s3cret");
      const json sent = json::parse(server.last_body);
      CHECK(sent["model"] == "test-model");
      CHECK(sent["temperature"] == 0.0);
      CHECK(sent["max_tokens"] == 64);
      CHECK(sent["messages"][0]["role"] == "system");
      CHECK(sent["messages"][0]["content"] == "You label things.");
      CHECK(sent["messages"][1]["role"] == "user");
    }

    CHECK(backend.complete(request("busy")).failure_kind() == BackendFailure::RateLimited);
    CHECK(backend.complete(request("broken")).failure_kind() == BackendFailure::TransportError);
    CHECK(backend.complete(request("forbidden")).failure_kind() == BackendFailure::ModelRefusal);
    CHECK(backend.complete(request("filtered")).failure_kind() == BackendFailure::ModelRefusal);
    CHECK(backend.complete(request("garbage")).failure_kind() == BackendFailure::TransportError);

    auto slow = request("slow");
    slow.timeout = std::chrono::milliseconds(200);
    const auto timed_out = backend.complete(slow);
    CHECK_FALSE(timed_out.ok());
    CHECK(timed_out.failure_kind() == BackendFailure::Timeout);
    CHECK(is_transient(BackendFailure::Timeout));
    CHECK_FALSE(is_transient(BackendFailure::ModelRefusal));
  }

  TEST_CASE("unreachable endpoint is a transport error") {
    HttpBackend backend({"http://127.0.0.1:1", "/v1/chat/completions", "m", "DEVCHAT_UNSET_TOKEN", false});
    auto r = request("hello");
    r.timeout = std::chrono::milliseconds(500);
    const auto result = backend.complete(r);
    CHECK_FALSE(result.ok());
    CHECK(is_transient(result.failure_kind()));
  }

  TEST_CASE("configuration is validated") {
    CHECK_THROWS_AS(HttpBackend({"", "/x", "m", "K", false}), ValidationError);
    CHECK_THROWS_AS(HttpBackend({"http://h", "/x", "", "K", false}), ValidationError);
  }
}

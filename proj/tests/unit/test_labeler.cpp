#include <doctest.h>

#include <atomic>
#include <mutex>
#include <vector>

#include "devchat/labeler.hpp"

using namespace devchat;

namespace {

Conversation make_conversation(const std::string& id, const std::string& question) {
  Conversation c;
  c.id = id;
  c.channel = {"team", "chan", ""};
  c.messages = {{id, 1, Timestamp::from_micros(0), "ada", question},
                {id, 2, Timestamp::from_micros(1'000'000), "bob", "Try this."},
                {id, 3, Timestamp::from_micros(2'000'000), "ada", "Thanks, that worked!"}};
  c.start = c.messages.front().ts;
  c.end = c.messages.back().ts;
  return c;
}

// Answers well-formed responses, failing the first `failures_before_success`
// calls of every conversation whose question contains "flaky" and every call
// for "dead" questions.
class ScriptedBackend : public CompletionBackend {
 public:
  explicit ScriptedBackend(BackendFailure failure = BackendFailure::Timeout, int failures_before_success = 0)
      : failure_(failure), failures_before_success_(failures_before_success) {}

  CompletionResult complete(const CompletionRequest& request) override {
    ++calls;
    const bool dead = request.user.find("dead") != std::string::npos;
    const bool flaky = request.user.find("flaky") != std::string::npos;
    if (dead) return CompletionResult::failure(failure_, "scripted");
    if (flaky) {
      std::lock_guard lock(mutex_);
      if (flaky_failures_ < failures_before_success_) {
        ++flaky_failures_;
        return CompletionResult::failure(failure_, "scripted");
      }
    }
    if (request.user.find("garbled") != std::string::npos) return CompletionResult::success("no idea");
    if (request.system.find("software entities") != std::string::npos) {
      return CompletionResult::success(R"(["numpy: Library"])");
    }
    if (request.system.find("intents behind") != std::string::npos) return CompletionResult::success(R"(["API Usage"])");
    if (request.system.find("resolution_status") != std::string::npos) {
      return CompletionResult::success(R"({"resolution_status": "Yes", "confidence_score": "60%"})");
    }
    return CompletionResult::success(R"(["Resolved"])");
  }
  std::string name() const override { return "scripted"; }

  std::atomic<int> calls{0};

 private:
  BackendFailure failure_;
  int failures_before_success_;
  std::mutex mutex_;
  int flaky_failures_ = 0;
};

LabelingOptions quiet_options() {
  LabelingOptions options;
  options.sleep = [](std::chrono::milliseconds) {};
  return options;
}

}  // namespace

TEST_SUITE("labeler") {
  TEST_CASE("labels every conversation in input order") {
    std::vector<Conversation> corpus;
    for (int i = 0; i < 20; ++i) corpus.push_back(make_conversation("c" + std::to_string(i), "How do I use numpy?"));
    ScriptedBackend backend;
    auto options = quiet_options();
    options.jobs = 4;
    options.with_baseline = true;
    const auto report = label_corpus(corpus, backend, options);
    REQUIRE(report.labels.size() == 20);
    for (int i = 0; i < 20; ++i) {
      const auto& l = report.labels[static_cast<std::size_t>(i)];
      CHECK(l.conversation_id == "c" + std::to_string(i));
      CHECK(l.channel_key == "team#chan");
      REQUIRE(l.entities.size() == 1);
      CHECK(l.entities[0].kind == EntityKind::Library);
      CHECK(l.intents == IntentSet{IntentKind::ApiUsage});
      CHECK(l.resolution == ResolutionStatus::Resolved);
      CHECK(l.source == LabelSource::Model);
    }
    CHECK(report.baseline.size() == 20);
    CHECK(report.ner.requests == 20);
    CHECK(report.resume_cursor == 20);
    CHECK_FALSE(report.aborted);
  }

  TEST_CASE("transient failures are retried with backoff") {
    std::vector<Conversation> corpus{make_conversation("c1", "flaky question")};
    ScriptedBackend backend(BackendFailure::RateLimited, 2);
    auto options = quiet_options();
    std::vector<long long> delays;
    options.sleep = [&](std::chrono::milliseconds d) { delays.push_back(d.count()); };
    const auto report = label_corpus(corpus, backend, options);
    CHECK(report.labels.size() == 1);
    CHECK(report.ner.retries == 2);
    CHECK(delays == std::vector<long long>{500, 1000});
  }

  TEST_CASE("refusals are not retried and only fail their conversation") {
    std::vector<Conversation> corpus{make_conversation("c1", "dead end"), make_conversation("c2", "fine")};
    ScriptedBackend backend(BackendFailure::ModelRefusal);
    const auto report = label_corpus(corpus, backend, quiet_options());
    REQUIRE(report.labels.size() == 1);
    CHECK(report.labels[0].conversation_id == "c2");
    CHECK(report.ner.retries == 0);
    CHECK(report.failures.size() >= 2);
    CHECK(report.failures[0].conversation_id == "c1");
    CHECK_FALSE(report.aborted);
  }

  TEST_CASE("parse failures are tallied") {
    std::vector<Conversation> corpus{make_conversation("c1", "garbled")};
    ScriptedBackend backend;
    const auto report = label_corpus(corpus, backend, quiet_options());
    CHECK(report.labels.empty());
    CHECK(report.ner.parse_failures == 1);
    CHECK(report.intent.parse_failures == 1);
  }

  TEST_CASE("a backend that keeps failing aborts with a resume cursor") {
    std::vector<Conversation> corpus;
    for (int i = 0; i < 3; ++i) corpus.push_back(make_conversation("ok" + std::to_string(i), "fine"));
    for (int i = 0; i < 10; ++i) corpus.push_back(make_conversation("d" + std::to_string(i), "dead"));
    ScriptedBackend backend(BackendFailure::Timeout);
    auto options = quiet_options();
    options.config.retry_budget = 1;
    options.abort_after_consecutive_failures = 3;
    const auto report = label_corpus(corpus, backend, options);
    CHECK(report.aborted);
    CHECK(report.labels.size() == 3);
    CHECK(report.resume_cursor == 3);

    auto resumed = options;
    resumed.start_index = 3;
    ScriptedBackend healthy;
    std::vector<Conversation> fixed(corpus);
    for (std::size_t i = 3; i < fixed.size(); ++i) fixed[i].messages[0].text = "fine now";
    const auto rest = label_corpus(fixed, healthy, resumed);
    CHECK(rest.labels.size() == 10);
    CHECK(rest.labels.front().conversation_id == "d0");
  }

  TEST_CASE("empty corpus") {
    ScriptedBackend backend;
    const auto report = label_corpus({}, backend, quiet_options());
    CHECK(report.labels.empty());
    CHECK(backend.calls == 0);
  }
}

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "run_command.hpp"

using devchat::testing::read_file;
using devchat::testing::run_command;

namespace {

const std::string kCli = DEVCHAT_CLI;

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("devchat_cli_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::size_t line_count(const std::string& path) {
  const auto text = read_file(path);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("help and usage errors") {
    CHECK(run_command(kCli + " --help").status == 0);
    CHECK(run_command(kCli + " frobnicate").status == 1);
    CHECK(run_command(kCli + " label --backend carrier-pigeon").status == 1);
  }

  TEST_CASE("ingest the sample archive") {
    const auto dir = scratch("ingest");
    const auto out = (dir / "corpus.jsonl").string();
    const auto r = run_command(kCli + " ingest " + DEVCHAT_FIXTURES + "/sample_archive.json --out " + out);
    REQUIRE(r.status == 0);
    CHECK(line_count(out) == 1);
    const auto conv = nlohmann::json::parse(read_file(out));
    CHECK(conv["id"] == "125");
    CHECK(conv["messages"].size() == 2);
    const auto manifest = nlohmann::json::parse(read_file(out + ".manifest.json"));
    CHECK(manifest["command"] == "ingest");
    CHECK(manifest["inputs"].size() == 1);
  }

  TEST_CASE("missing input names the path and exits 1") {
    const auto dir = scratch("missing");
    const auto r = run_command(kCli + " ingest /nonexistent/archive.json --out " + (dir / "c.jsonl").string());
    CHECK(r.status == 1);
    CHECK(r.output.find("/nonexistent/archive.json") != std::string::npos);
  }

  TEST_CASE("mock labeling of an empty corpus succeeds") {
    const auto dir = scratch("empty");
    const auto corpus = (dir / "corpus.jsonl").string();
    std::ofstream(corpus).close();
    const auto labels = (dir / "labels.jsonl").string();
    const auto r = run_command(kCli + " label --backend mock --corpus " + corpus + " --out " + labels);
    CHECK(r.status == 0);
    CHECK(read_file(labels).empty());
  }

  TEST_CASE("http backend without an endpoint is a configuration error") {
    const auto dir = scratch("http");
    const auto corpus = (dir / "corpus.jsonl").string();
    std::ofstream(corpus).close();
    const auto r = run_command(kCli + " label --backend http --corpus " + corpus + " --out " + (dir / "l.jsonl").string());
    CHECK(r.status == 1);
    CHECK(r.output.find("endpoint") != std::string::npos);
  }

  TEST_CASE("credentials in the config file are refused") {
    const auto dir = scratch("secret");
    const auto ini = (dir / "c.ini").string();
    std::ofstream(ini) << "[labeler]\napi_key = sk-live\n";
    const auto r = run_command(kCli + " synth --n 10 --out " + (dir / "s").string() + " --config " + ini);
    CHECK(r.status == 1);
    CHECK(r.output.find("credential") != std::string::npos);
  }

  TEST_CASE("small pipeline is byte-reproducible") {
    auto run = [](const std::filesystem::path& dir) {
      const auto d = dir.string();
      const std::string steps[] = {
          kCli + " synth --n 300 --seed 5 --out " + d,
          kCli + " ingest " + d + "/archive.json --out " + d + "/corpus.jsonl",
          kCli + " label --backend mock --corpus " + d + "/corpus.jsonl --out " + d + "/labels.jsonl --baseline-out " + d +
              "/baseline.jsonl",
          kCli + " evaluate --corpus " + d + "/corpus.jsonl --golden " + d + "/golden.jsonl --labels " + d +
              "/labels.jsonl --out " + d + "/metrics.json",
          kCli + " features --corpus " + d + "/corpus.jsonl --labels " + d + "/labels.jsonl --out " + d + "/features.csv",
          kCli + " prune --seed 5 --features " + d + "/features.csv --out " + d + "/pruned.csv",
          kCli + " train --seed 5 --features " + d + "/pruned.csv --out " + d +
              "/model.json --strategy undersample --folds 5 --bootstrap 3 --baseline " + d + "/baseline.jsonl",
          kCli + " analyze --labels " + d + "/labels.jsonl --out " + d + "/analysis --min-pair-occurrences 3",
          kCli + " report --model " + d + "/model.json --analysis " + d + "/analysis --metrics " + d +
              "/metrics.json --out " + d + "/report.md",
      };
      for (const auto& s : steps) {
        const auto r = run_command(s);
        INFO(s);
        INFO(r.output);
        REQUIRE(r.status == 0);
      }
    };
    const auto a = scratch("repro_a");
    const auto b = scratch("repro_b");
    run(a);
    run(b);
    CHECK(line_count((a / "corpus.jsonl").string()) == 300);
    CHECK(line_count((a / "labels.jsonl").string()) == 300);
    CHECK(line_count((a / "features.csv").string()) == 301);
    for (const char* f : {"corpus.jsonl", "labels.jsonl", "features.csv", "pruned.csv", "model.json",
                          "analysis/intent_success.csv", "analysis/analysis.json", "report.md"}) {
      INFO(f);
      CHECK(read_file((a / f).string()) == read_file((b / f).string()));
    }
    const auto report = read_file((a / "report.md").string());
    CHECK(report.find("AUC") != std::string::npos);
  }
}

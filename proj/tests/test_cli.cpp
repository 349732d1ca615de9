#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>

#include "support.hpp"

using nlohmann::json;
using tasktrace::testing::fixture;
using tasktrace::testing::read_file;
using tasktrace::testing::TempDir;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI with the given arguments; stderr goes to a file under `dir`.
Run run(const std::string& args, const std::filesystem::path& dir) {
  const auto cmd = std::string(TASKTRACE_CLI_PATH) + " " + args + " 2>" + (dir / "stderr.txt").string();
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string f(const char* name) { return fixture(name).string(); }

}  // namespace

TEST_CASE("stats table") {
  TempDir dir;
  const auto r = run("stats --input " + f("f1.jsonl"), dir.path());
  CHECK(r.code == 0);
  CHECK(r.out.find("traces                      3\n") != std::string::npos);
  CHECK(r.out.find("steps per trace             3.00 (min 3, max 3)") != std::string::npos);
}

TEST_CASE("stats json round-trips") {
  TempDir dir;
  const auto r = run("stats --json --input " + f("f2.jsonl"), dir.path());
  REQUIRE(r.code == 0);
  const auto doc = json::parse(r.out);
  CHECK(doc["total_traces"] == 5);
  CHECK(doc["total_steps"] == 19);
  CHECK(doc["steps_per_trace"]["mean"].get<double>() == doctest::Approx(3.8));
}

TEST_CASE("screen partitions the input") {
  TempDir dir;
  const auto approved = dir.path() / "approved.jsonl";
  const auto rejected = dir.path() / "rejected.jsonl";
  const auto r = run("screen --input " + f("mixed.jsonl") + " --out " + approved.string() + " --rejected " +
                         rejected.string(),
                     dir.path());
  CHECK(r.code == 0);
  const auto kept = tasktrace::read_jsonl_file(approved.string());
  std::vector<std::string> ids;
  for (const auto& t : kept.traces()) ids.push_back(t.id);
  CHECK(ids == std::vector<std::string>{"a2", "a3", "c1", "c2"});
  CHECK(tasktrace::read_jsonl_file(rejected.string()).records.size() == 4);

  const auto js = run("screen --json --input " + f("mixed.jsonl"), dir.path());
  CHECK(json::parse(js.out)["rejected_workers"] == json::array({"wb"}));
}

TEST_CASE("ingest exit codes") {
  TempDir dir;
  const auto out = dir.path() / "canon.jsonl";
  CHECK(run("ingest --input " + f("f2.jsonl") + " --out " + out.string(), dir.path()).code == 0);
  CHECK(read_file(out) == read_file(fixture("f2.jsonl")));
  CHECK(run("ingest --input " + f("bad_kind.jsonl"), dir.path()).code == 1);
  const auto err = read_file(dir.path() / "stderr.txt");
  CHECK(err.find("steps[0].kind") != std::string::npos);
  CHECK(run("ingest --input " + (dir.path() / "missing.jsonl").string(), dir.path()).code == 1);
}

TEST_CASE("usage errors exit 2") {
  TempDir dir;
  CHECK(run("", dir.path()).code == 2);
  CHECK(run("frobnicate", dir.path()).code == 2);
  CHECK(run("stats", dir.path()).code == 2);
  CHECK(run("suggest --model x --hint y --k 0", dir.path()).code == 2);
  CHECK(read_file(dir.path() / "stderr.txt").find("Usage") != std::string::npos);
  CHECK(run("--help", dir.path()).code == 0);
}

TEST_CASE("build-model then suggest") {
  TempDir dir;
  const auto model = dir.path() / "mail.model.json";
  REQUIRE(run("build-model --input " + f("f1.jsonl") + " --category mail --out " + model.string(), dir.path())
              .code == 0);
  const auto doc = json::parse(read_file(model));
  CHECK(doc["category"] == "mail");
  CHECK(doc["trace_count"] == 3);

  auto r = run("suggest --json --model " + model.string() + " --hint " + f("hint_mail.json") + " --k 3",
               dir.path());
  REQUIRE(r.code == 0);
  auto out = json::parse(r.out);
  REQUIRE(out["suggestions"].size() == 1);
  CHECK(out["suggestions"][0]["step"]["kind"] == "deliver");
  CHECK(out["suggestions"][0]["score"] == 1.0);
  CHECK(out["end_probability"] == 0.0);

  const auto empty_hint = dir.path() / "empty.json";
  std::ofstream(empty_hint) << "[]";
  r = run("suggest --json --model " + model.string() + " --hint " + empty_hint.string() + " --k 3", dir.path());
  out = json::parse(r.out);
  REQUIRE(out["suggestions"].size() == 2);
  CHECK(out["suggestions"][0]["step"]["kind"] == "move_to");
  CHECK(out["suggestions"][1]["step"]["kind"] == "find");

  r = run("suggest --model " + model.string() + " --hint " + f("hint_mail.json") + " --traces " +
              f("f1.jsonl"),
          dir.path());
  CHECK(r.code == 0);
  CHECK(r.out.find("deliver") != std::string::npos);
}

TEST_CASE("build-model out-dir writes one file per category") {
  TempDir dir;
  const auto r = run("build-model --input " + f("f2.jsonl") + " --out-dir " + dir.path().string(), dir.path());
  CHECK(r.code == 0);
  CHECK(std::filesystem::exists(dir.path() / "greeting.model.json"));
  CHECK(std::filesystem::exists(dir.path() / "groceries.model.json"));
  CHECK(std::filesystem::exists(dir.path() / "vacuum.model.json"));
}

TEST_CASE("diff and loops") {
  TempDir dir;
  const auto hint = dir.path() / "hint.json";
  std::ofstream(hint) << R"([{"kind":"grab","args":{"item":"mail"}},{"kind":"deliver","args":{"item":"mail","target":"kitchen table"}}])";
  auto r = run("diff --json --hint " + hint.string() + " --input " + f("f1.jsonl"), dir.path());
  REQUIRE(r.code == 0);
  auto out = json::parse(r.out);
  CHECK(out["trace"] == "t1");
  CHECK(out["cost"] == 1.0);
  REQUIRE(out["suggestions"].size() == 1);
  CHECK(out["suggestions"][0]["step"]["kind"] == "move_to");
  CHECK(out["suggestions"][0]["position"] == 0);

  r = run("loops --json --hint " + f("hint_groceries.json"), dir.path());
  REQUIRE(r.code == 0);
  out = json::parse(r.out);
  REQUIRE(out["suggestions"].size() == 1);
  CHECK(out["suggestions"][0]["kind"] == "foreach_loop");
  CHECK(out["suggestions"][0]["region"] == json::parse(R"({"start":0,"period":2,"repetitions":3})"));
}

TEST_CASE("output is byte-identical across runs") {
  TempDir dir;
  const std::vector<std::string> commands{
      "stats --json --input " + f("f2.jsonl"),
      "screen --json --input " + f("mixed.jsonl"),
      "loops --hint " + f("hint_groceries.json"),
      "diff --hint " + f("hint_mail.json") + " --input " + f("f1.jsonl"),
  };
  for (const auto& c : commands) {
    const auto a = run(c, dir.path());
    const auto b = run(c, dir.path());
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
  }
}

#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <unistd.h>
#include <string>
#include <vector>

#include "tasktrace/dataset.hpp"
#include "tasktrace/step.hpp"
#include "tasktrace/trace.hpp"

namespace tasktrace::testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(TASKTRACE_FIXTURE_DIR) / name;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline std::vector<Trace> load_fixture(const std::string& name) {
  auto contents = read_jsonl_file(fixture(name).string());
  return contents.traces();
}

inline Trace make_trace(std::string id, std::string category, std::string worker,
                        std::vector<StepInstance> steps) {
  Trace t;
  t.id = std::move(id);
  t.category = std::move(category);
  t.worker_id = std::move(worker);
  t.created_at = *parse_timestamp("2022-01-01T00:00:00Z");
  t.steps = std::move(steps);
  return t;
}

inline StepInstance s(StepKind kind, std::vector<std::string> values = {}) {
  return make_step(kind, std::move(values));
}

// The three mail traces used throughout the model tests.
inline std::vector<Trace> f1() {
  using K = StepKind;
  return {
      make_trace("t1", "mail", "w1",
                 {s(K::move_to, {"front door"}), s(K::grab, {"mail"}),
                  s(K::deliver, {"mail", "kitchen table"})}),
      make_trace("t2", "mail", "w1",
                 {s(K::move_to, {"front door"}), s(K::grab, {"mail"}),
                  s(K::deliver, {"mail", "office"})}),
      make_trace("t3", "mail", "w1",
                 {s(K::find, {"mail"}), s(K::grab, {"mail"}), s(K::deliver, {"mail", "office"})}),
  };
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("tasktrace-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Random generators for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
  std::mt19937_64& engine() { return rng_; }

  std::string word() {
    static const std::vector<std::string> words{
        "mail", "Front Door", "kitchen  table", "office", "Guest 1", "keys", "lamp",
        "fridge", "milk", "café", "  living room ", "TV"};
    return words[index(words.size())];
  }

  StepInstance step(std::span<const StepKind> kinds) {
    const auto kind = kinds[index(kinds.size())];
    std::vector<std::string> values;
    for (std::size_t i = 0; i < step_schema(kind).size(); ++i) values.push_back(word());
    std::optional<std::string> description;
    if (coin(0.3)) description = "because " + word();
    return make_step(kind, std::move(values), std::move(description));
  }

  StepInstance step() { return step(all_step_kinds()); }

  Trace trace(std::string id, std::string category, std::string worker, std::size_t min_len,
              std::size_t max_len) {
    const auto len = min_len + index(max_len - min_len + 1);
    std::vector<StepInstance> steps;
    for (std::size_t i = 0; i < len; ++i) steps.push_back(step());
    auto t = make_trace(std::move(id), std::move(category), std::move(worker), std::move(steps));
    t.created_at += std::chrono::seconds(index(100000000));
    if (coin(0.2)) t.feedback = "feedback: " + word();
    return t;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace tasktrace::testing

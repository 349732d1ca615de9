#include <doctest.h>

#include <algorithm>

#include "support.hpp"
#include "tasktrace/suggest.hpp"

using namespace tasktrace;
using testing::make_trace;
using testing::s;
using K = StepKind;

namespace {

std::size_t count_kind(const std::vector<Suggestion>& sugs, SuggestionKind kind) {
  return static_cast<std::size_t>(
      std::count_if(sugs.begin(), sugs.end(), [&](const Suggestion& x) { return x.kind == kind; }));
}

}  // namespace

TEST_CASE("next steps from START") {
  const auto traces = testing::f1();
  const auto m = build_markov(traces);
  const auto next = suggest_next(m, {}, 3);
  REQUIRE(next.suggestions.size() == 2);
  CHECK(*next.suggestions[0].step() == s(K::move_to, {"front door"}));
  CHECK(next.suggestions[0].score == doctest::Approx(2.0 / 3.0));
  CHECK(next.suggestions[1].step()->kind == K::find);
  CHECK(next.suggestions[1].score == doctest::Approx(1.0 / 3.0));
  CHECK(next.suggestions[0].position == 0u);
  CHECK(next.suggestions[0].provenance == "markov:mail");
  CHECK(next.end_probability == 0.0);
  CHECK_FALSE(next.unknown_state);
}

TEST_CASE("next step after grab is deliver") {
  const auto traces = testing::f1();
  const auto m = build_markov(traces);
  const std::vector<StepInstance> prefix{s(K::move_to, {"front door"}), s(K::grab, {"mail"})};
  const auto next = suggest_next(m, prefix, 1);
  REQUIRE(next.suggestions.size() == 1);
  CHECK(*next.suggestions[0].step() == s(K::deliver, {"mail", "office"}));
  CHECK(next.suggestions[0].score == 1.0);
  CHECK(next.suggestions[0].position == 2u);

  const auto done = suggest_next(m, traces[0].steps, 3);
  CHECK(done.suggestions.empty());
  CHECK(done.end_probability == 1.0);
}

TEST_CASE("unknown last state") {
  const auto traces = testing::f1();
  const auto m = build_markov(traces);
  const std::vector<StepInstance> prefix{s(K::vacuum, {"hall"})};
  const auto next = suggest_next(m, prefix, 3);
  CHECK(next.suggestions.empty());
  CHECK(next.unknown_state);
  CHECK_THROWS_AS(suggest_next(m, prefix, 0), std::invalid_argument);
}

TEST_CASE("kind+args payloads use the state signature") {
  const auto traces = testing::f1();
  const auto m = build_markov(traces, Abstraction::kind_args);
  const std::vector<StepInstance> prefix{s(K::grab, {"mail"})};
  const auto next = suggest_next(m, prefix, 5);
  REQUIRE(next.suggestions.size() == 2);
  CHECK(*next.suggestions[0].step() == s(K::deliver, {"mail", "office"}));
  CHECK(next.suggestions[0].score == doctest::Approx(2.0 / 3.0));
  CHECK(*next.suggestions[1].step() == s(K::deliver, {"mail", "kitchen table"}));
}

TEST_CASE("smoothed ties break by kind order") {
  const auto traces = testing::f1();
  const auto m = build_markov(traces, Abstraction::kind, 1.0);
  const std::vector<StepInstance> prefix{s(K::deliver, {"mail", "office"})};
  const auto next = suggest_next(m, prefix, 4);
  REQUIRE(next.suggestions.size() == 4);
  std::vector<K> kinds;
  for (const auto& x : next.suggestions) kinds.push_back(x.step()->kind);
  CHECK(kinds == std::vector<K>{K::move_to, K::find, K::grab, K::deliver});
  CHECK(next.end_probability == doctest::Approx(0.5));
}

TEST_CASE("branches") {
  const auto traces = testing::f1();
  const auto m = build_markov(traces);
  auto br = detect_branches(m, 0.2);
  REQUIRE(br.size() == 1);
  const auto* bp = br[0].branch();
  REQUIRE(bp);
  CHECK(bp->state == StateKey::start());
  REQUIRE(bp->alternatives.size() == 2);
  CHECK(bp->alternatives[0].state.kind == K::move_to);
  CHECK(bp->alternatives[0].probability == doctest::Approx(2.0 / 3.0));
  CHECK(bp->alternatives[1].state.kind == K::find);
  CHECK(br[0].score == doctest::Approx(1.0 / 3.0));
  CHECK(detect_branches(m, 0.5).empty());
  CHECK_THROWS_AS(detect_branches(m, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(detect_branches(m, 1.0), std::invalid_argument);
}

TEST_CASE("a single trace has no branches at any threshold or alpha") {
  const std::vector<Trace> one{testing::f1()[0]};
  for (double alpha : {0.0, 1.0, 10.0}) {
    const auto m = build_markov(one, Abstraction::kind, alpha);
    for (double th : {0.001, 0.2, 0.5, 0.999}) CHECK(detect_branches(m, th).empty());
  }
}

TEST_CASE("suggest_edits on a training trace has no step suggestions") {
  const auto traces = testing::f1();
  const auto m = build_markov(traces);
  const auto sugs = suggest_edits(m, traces, traces[0].steps);
  CHECK(count_kind(sugs, SuggestionKind::next_step) == 0);
  CHECK(count_kind(sugs, SuggestionKind::missing_step) == 0);
  CHECK(count_kind(sugs, SuggestionKind::branch_point) == 1);
}

TEST_CASE("suggest_edits on an empty hint") {
  const auto traces = testing::f1();
  const auto m = build_markov(traces);
  const auto sugs = suggest_edits(m, traces, {});
  CHECK(count_kind(sugs, SuggestionKind::branch_point) == 0);
  // move_to(front door) at 0 comes from both sources and is merged.
  std::size_t move_to = 0;
  for (const auto& x : sugs) {
    if (x.step() && x.step()->kind == K::move_to) {
      ++move_to;
      CHECK(x.kind == SuggestionKind::next_step);
      CHECK(x.score == doctest::Approx(2.0 / 3.0));
    }
  }
  CHECK(move_to == 1);
  CHECK(count_kind(sugs, SuggestionKind::missing_step) == 2);
  CHECK(count_kind(sugs, SuggestionKind::next_step) == 2);
  CHECK(std::is_sorted(sugs.begin(), sugs.end(), suggestion_before));
}

TEST_CASE("merge keeps the higher score") {
  const auto traces = testing::f1();
  const auto m = build_markov(traces);
  const std::vector<StepInstance> hint{s(K::find, {"mail"}), s(K::grab, {"mail"})};
  const auto sugs = suggest_edits(m, traces, hint);
  CHECK(count_kind(sugs, SuggestionKind::missing_step) == 0);
  std::size_t deliver = 0;
  for (const auto& x : sugs) {
    if (x.step() && x.step()->kind == K::deliver && x.position == 2u &&
        same_step(*x.step(), s(K::deliver, {"mail", "office"}))) {
      ++deliver;
      CHECK(x.score == 1.0);
      CHECK(x.kind == SuggestionKind::next_step);
    }
  }
  CHECK(deliver == 1);
}

TEST_CASE("groceries hint gets a foreach loop") {
  const auto traces = testing::load_fixture("f2.jsonl");
  std::vector<Trace> groceries;
  for (const auto& t : traces) {
    if (t.category == "groceries") groceries.push_back(t);
  }
  const auto m = build_markov(groceries);
  const auto hint = groceries[0].steps;
  const auto sugs = suggest_edits(m, groceries, hint);
  REQUIRE(count_kind(sugs, SuggestionKind::foreach_loop) == 1);
  for (const auto& x : sugs) {
    if (x.kind == SuggestionKind::foreach_loop) CHECK(*x.region() == LoopRegion{0, 2, 3});
  }
}

TEST_CASE("suggestions are deterministic and JSON round-trips") {
  testing::Gen gen(4);
  const std::array<K, 4> kinds{K::grab, K::place, K::say, K::wait};
  for (int round = 0; round < 40; ++round) {
    std::vector<Trace> traces;
    for (int i = 0; i < 4; ++i) {
      std::vector<StepInstance> steps;
      const auto n = 2 + gen.index(5);
      for (std::size_t k = 0; k < n; ++k) steps.push_back(gen.step(kinds));
      traces.push_back(make_trace("t" + std::to_string(i), "mail", "w", steps));
    }
    const auto m = build_markov(traces, gen.coin() ? Abstraction::kind : Abstraction::kind_args, 0.5);
    std::vector<StepInstance> hint;
    for (std::size_t k = 0, n = gen.index(5); k < n; ++k) hint.push_back(gen.step(kinds));
    const auto a = suggest_edits(m, traces, hint);
    const auto b = suggest_edits(m, traces, hint);
    CHECK(a == b);
    CHECK(std::is_sorted(a.begin(), a.end(), suggestion_before));
    for (const auto& x : a) {
      CHECK(x.score >= 0.0);
      CHECK(x.score <= 1.0);
      CHECK(suggestion_from_json(nlohmann::json::parse(suggestion_to_json(x).dump())) == x);
    }
    auto shuffled = a;
    std::shuffle(shuffled.begin(), shuffled.end(), gen.engine());
    sort_suggestions(shuffled);
    CHECK(shuffled == a);
  }
}

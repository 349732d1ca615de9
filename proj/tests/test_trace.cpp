#include <doctest.h>

#include "support.hpp"
#include "tasktrace/trace.hpp"

using namespace tasktrace;
using testing::make_trace;
using testing::s;
using K = StepKind;

namespace {

std::vector<Rule> rules(const ValidationReport& r) {
  std::vector<Rule> out;
  for (const auto& v : r.violations) out.push_back(v.rule);
  return out;
}

}  // namespace

TEST_CASE("one-step trace is rejected with MIN_STEPS") {
  const auto report = validate_trace(make_trace("t", "mail", "w", {s(K::grab, {"mail"})}));
  CHECK(report.verdict == Verdict::rejected);
  CHECK(rules(report) == std::vector<Rule>{Rule::min_steps});
}

TEST_CASE("two valid steps are approved") {
  const auto report = validate_trace(
      make_trace("t", "greeting", "w", {s(K::approach, {"guest 1"}), s(K::say, {"hello"})}));
  CHECK(report.approved());
  CHECK(report.violations.empty());
}

TEST_CASE("deliver without a target violates the schema") {
  auto bad = s(K::deliver, {"mail", "office"});
  bad.args.pop_back();
  const auto report = validate_trace(make_trace("t", "mail", "w", {s(K::grab, {"mail"}), bad}));
  CHECK(report.verdict == Verdict::rejected);
  CHECK(rules(report) == std::vector<Rule>{Rule::bad_step_args});
  CHECK(report.violations[0].message.find("steps[1]") != std::string::npos);
}

TEST_CASE("swapped slots are also a schema violation") {
  auto swapped = s(K::place, {"milk", "fridge"});
  std::swap(swapped.args[0], swapped.args[1]);
  const auto report = validate_trace(make_trace("t", "groceries", "w", {s(K::grab, {"milk"}), swapped}));
  CHECK(rules(report) == std::vector<Rule>{Rule::bad_step_args});
}

TEST_CASE("blank arguments are EMPTY_ARG") {
  const auto report = validate_trace(
      make_trace("t", "greeting", "w", {s(K::approach, {"  \t"}), s(K::say, {"hello"})}));
  CHECK(rules(report) == std::vector<Rule>{Rule::empty_arg});
  CHECK(report.verdict == Verdict::rejected);
}

TEST_CASE("unknown category and unknown kind") {
  auto t = make_trace("t", "laundry", "w", {s(K::grab, {"shirt"}), s(K::wait)});
  CHECK(rules(validate_trace(t)) == std::vector<Rule>{Rule::unknown_category});
  t.category = "mail";
  t.steps[0].kind = static_cast<StepKind>(42);
  CHECK(rules(validate_trace(t)) == std::vector<Rule>{Rule::unknown_kind});
}

TEST_CASE("wait may carry a description but no args") {
  auto t = make_trace("t", "greeting", "w",
                      {s(K::say, {"hello"}), make_step(K::wait, {}, "for them to answer")});
  CHECK(validate_trace(t).approved());
}

TEST_CASE("violations accumulate") {
  const auto report = validate_trace(make_trace("t", "nope", "w", {s(K::say, {""})}));
  CHECK(rules(report) == std::vector<Rule>{Rule::unknown_category, Rule::min_steps, Rule::empty_arg});
}

TEST_CASE("relevance flag is advisory") {
  auto report = validate_trace(
      make_trace("t", "mail", "w", {s(K::say, {"hello"}), s(K::tell, {"a story"})}));
  report = with_relevance_flag(report, "does not fetch the mail");
  CHECK(report.approved());
  CHECK(report.has(Rule::relevance_flag));

  auto rejected = with_relevance_flag(validate_trace(make_trace("t", "mail", "w", {s(K::wait)})), "x");
  CHECK(rejected.verdict == Verdict::rejected);
}

TEST_CASE("validation is deterministic") {
  testing::Gen gen(3);
  for (int i = 0; i < 200; ++i) {
    const auto t = gen.trace("t" + std::to_string(i), "mail", "w", 0, 6);
    CHECK(validate_trace(t) == validate_trace(t));
  }
}

TEST_CASE("rule ids") {
  for (auto r : {Rule::min_steps, Rule::bad_step_args, Rule::unknown_kind, Rule::unknown_category,
                 Rule::empty_arg, Rule::relevance_flag}) {
    CHECK(parse_rule_id(rule_id(r)) == r);
  }
  CHECK(rule_id(Rule::min_steps) == "MIN_STEPS");
  CHECK(rule_id(Rule::relevance_flag) == "RELEVANCE_FLAG");
}

TEST_CASE("timestamps") {
  const auto ts = parse_timestamp("2022-01-01T00:00:00Z");
  REQUIRE(ts);
  CHECK(format_timestamp(*ts) == "2022-01-01T00:00:00Z");
  CHECK(format_timestamp(*parse_timestamp("2024-02-29T23:59:59Z")) == "2024-02-29T23:59:59Z");
  CHECK(*parse_timestamp("2022-01-01T00:00:01Z") > *ts);
  CHECK_FALSE(parse_timestamp("2023-02-29T00:00:00Z"));
  CHECK_FALSE(parse_timestamp("2022-01-01 00:00:00Z"));
  CHECK_FALSE(parse_timestamp("2022-01-01T00:00:00+01:00"));
  CHECK_FALSE(parse_timestamp("2022-01-01T24:00:00Z"));
  CHECK_FALSE(parse_timestamp(""));
}

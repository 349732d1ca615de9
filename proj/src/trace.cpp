#include "tasktrace/trace.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

#include "tasktrace/category.hpp"

namespace tasktrace {
namespace {

constexpr std::array<std::string_view, 6> kRuleIds{
    "MIN_STEPS", "BAD_STEP_ARGS", "UNKNOWN_KIND", "UNKNOWN_CATEGORY", "EMPTY_ARG", "RELEVANCE_FLAG",
};

bool parse_digits(std::string_view text, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > text.size()) return false;
  int value = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    const char c = text[i];
    if (c < '0' || c > '9') return false;
    value = value * 10 + (c - '0');
  }
  out = value;
  return true;
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  // 2022-01-01T00:00:00Z
  if (text.size() != 20 || text[4] != '-' || text[7] != '-' || text[10] != 'T' ||
      text[13] != ':' || text[16] != ':' || text[19] != 'Z') {
    return std::nullopt;
  }
  int y, mo, d, h, mi, s;
  if (!parse_digits(text, 0, 4, y) || !parse_digits(text, 5, 2, mo) ||
      !parse_digits(text, 8, 2, d) || !parse_digits(text, 11, 2, h) ||
      !parse_digits(text, 14, 2, mi) || !parse_digits(text, 17, 2, s)) {
    return std::nullopt;
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) return std::nullopt;
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

std::string format_timestamp(Timestamp ts) {
  using namespace std::chrono;
  const auto day_point = floor<days>(ts);
  const year_month_day ymd{day_point};
  const hh_mm_ss<seconds> tod{ts - day_point};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()));
  return buf;
}

std::string_view rule_id(Rule rule) { return kRuleIds.at(static_cast<std::size_t>(rule)); }

std::optional<Rule> parse_rule_id(std::string_view text) {
  for (std::size_t i = 0; i < kRuleIds.size(); ++i) {
    if (kRuleIds[i] == text) return static_cast<Rule>(i);
  }
  return std::nullopt;
}

std::string_view to_string(Verdict verdict) {
  return verdict == Verdict::approved ? "approved" : "rejected";
}

bool ValidationReport::has(Rule rule) const {
  return std::any_of(violations.begin(), violations.end(),
                     [rule](const Violation& v) { return v.rule == rule; });
}

ValidationReport make_report(std::vector<Violation> violations) {
  ValidationReport report{Verdict::approved, std::move(violations)};
  for (const auto& v : report.violations) {
    if (v.rule != Rule::relevance_flag) report.verdict = Verdict::rejected;
  }
  return report;
}

ValidationReport with_relevance_flag(ValidationReport report, std::string message) {
  report.violations.push_back({Rule::relevance_flag, std::move(message)});
  return make_report(std::move(report.violations));
}

ValidationReport validate_trace(const Trace& trace) {
  std::vector<Violation> out;
  if (!is_known_category(trace.category)) {
    out.push_back({Rule::unknown_category, "category '" + trace.category + "' is not one of the 18 task categories"});
  }
  if (trace.steps.size() < 2) {
    out.push_back({Rule::min_steps, "trace has " + std::to_string(trace.steps.size()) +
                                        " step(s); at least 2 are required"});
  }
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& step = trace.steps[i];
    const std::string where = "steps[" + std::to_string(i) + "]";
    if (static_cast<std::size_t>(step.kind) >= kStepKindCount) {
      out.push_back({Rule::unknown_kind, where + ".kind: not a toolbox step"});
      continue;
    }
    if (!args_match_schema(step)) {
      std::string expected;
      for (auto slot : step_schema(step.kind)) {
        if (!expected.empty()) expected += ", ";
        expected += to_string(slot);
      }
      out.push_back({Rule::bad_step_args, where + ".args: " + std::string(to_string(step.kind)) +
                                              " expects [" + expected + "]"});
    }
    for (const auto& arg : step.args) {
      if (canonicalize(arg.value).empty()) {
        out.push_back({Rule::empty_arg,
                       where + ".args." + std::string(to_string(arg.slot)) + ": empty"});
      }
    }
  }
  return make_report(std::move(out));
}

}  // namespace tasktrace

#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tasktrace/step.hpp"

namespace tasktrace {

using Timestamp = std::chrono::sys_seconds;

// Strict "YYYY-MM-DDTHH:MM:SSZ".
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);

struct Trace {
  std::string id;
  std::string category;
  std::string worker_id;
  Timestamp created_at{};
  std::vector<StepInstance> steps;
  std::optional<std::string> feedback;

  friend bool operator==(const Trace&, const Trace&) = default;
};

enum class Rule {
  min_steps,
  bad_step_args,
  unknown_kind,
  unknown_category,
  empty_arg,
  relevance_flag,
};

std::string_view rule_id(Rule rule);
std::optional<Rule> parse_rule_id(std::string_view text);

enum class Verdict { approved, rejected };

std::string_view to_string(Verdict verdict);

struct Violation {
  Rule rule;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  Verdict verdict{Verdict::approved};
  std::vector<Violation> violations;

  bool approved() const { return verdict == Verdict::approved; }
  bool has(Rule rule) const;

  friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

// Rebuilds a report from violations; relevance flags never reject.
ValidationReport make_report(std::vector<Violation> violations);

// Advisory reviewer flag. Leaves the verdict untouched.
ValidationReport with_relevance_flag(ValidationReport report, std::string message);

ValidationReport validate_trace(const Trace& trace);

}  // namespace tasktrace

#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tasktrace/category.hpp"
#include "tasktrace/trace.hpp"

namespace tasktrace {

// Structural problem in a trace document. `path()` is a JSON path such as
// "steps[0].kind"; `rule()` is set when the problem maps onto a validation rule.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string path, std::string message, std::optional<Rule> rule = std::nullopt);

  const std::string& path() const { return path_; }
  const std::string& detail() const { return detail_; }
  std::optional<Rule> rule() const { return rule_; }

 private:
  std::string path_;
  std::string detail_;
  std::optional<Rule> rule_;
};

StepInstance step_from_json(const nlohmann::json& doc, const std::string& path = "");
nlohmann::ordered_json step_to_json(const StepInstance& step);

Trace trace_from_json(const nlohmann::json& doc);
nlohmann::ordered_json trace_to_json(const Trace& trace);

// Throws SchemaError; malformed JSON is reported at the root path.
Trace parse_trace(std::string_view document);
// Canonical form: compact UTF-8, keys id, category, worker_id, created_at,
// steps, feedback; step keys kind, args, description; args in slot order.
std::string serialize_trace(const Trace& trace);

nlohmann::ordered_json report_to_json(const ValidationReport& report);
ValidationReport report_from_json(const nlohmann::json& doc);

enum class RecordStatus { approved, rejected, pending_review };

std::string_view to_string(RecordStatus status);
std::optional<RecordStatus> parse_record_status(std::string_view text);

// One line of the append-only store. A later record with the same trace id
// supersedes an earlier one.
struct StoreRecord {
  Trace trace;
  RecordStatus status{RecordStatus::approved};
  ValidationReport report;

  friend bool operator==(const StoreRecord&, const StoreRecord&) = default;
};

StoreRecord record_for(Trace trace);
nlohmann::ordered_json record_to_json(const StoreRecord& record);
StoreRecord record_from_json(const nlohmann::json& doc);
std::string serialize_record(const StoreRecord& record);

struct Dataset {
  std::vector<Trace> traces;
  std::vector<TaskCategory> categories = default_categories();
};

// First invariant violation (duplicate id, category missing from the
// category list), if any.
std::optional<std::string> check_dataset(const Dataset& dataset);

struct LineError {
  std::size_t line = 0;
  std::string path;
  std::optional<Rule> rule;
  std::string message;
};

struct JsonlContents {
  std::vector<StoreRecord> records;
  std::vector<LineError> errors;

  std::vector<Trace> traces() const;
};

// Reads JSON-lines where each line is either a bare trace or a store record.
// Bare traces get a fresh validation report. Blank lines are skipped; later
// records with a repeated id replace the earlier one in place.
JsonlContents read_jsonl(std::istream& in);
JsonlContents read_jsonl_file(const std::string& path);
void write_traces_jsonl(std::ostream& out, std::span<const Trace> traces);

struct CountSummary {
  double mean = 0.0;
  std::size_t min = 0;
  std::size_t max = 0;

  friend bool operator==(const CountSummary&, const CountSummary&) = default;
};

struct StatsSummary {
  std::size_t total_traces = 0;
  std::size_t total_workers = 0;
  // Every known slug (zero when absent) plus any unknown slug that occurs.
  std::map<std::string, std::size_t> traces_per_category;
  // Over categories with at least one trace; absent for an empty dataset.
  std::optional<CountSummary> per_category;
  std::optional<CountSummary> steps_per_trace;
  std::size_t total_steps = 0;
  std::size_t total_descriptions = 0;
  std::optional<double> description_rate;
  std::size_t workers_with_descriptions = 0;
  std::size_t workers_using_wait = 0;
  std::optional<double> wait_usage;

  friend bool operator==(const StatsSummary&, const StatsSummary&) = default;
};

StatsSummary dataset_stats(std::span<const Trace> traces);
inline StatsSummary dataset_stats(const Dataset& dataset) { return dataset_stats(dataset.traces); }
nlohmann::ordered_json stats_to_json(const StatsSummary& stats);

struct ScreeningRule {
  // A worker with at least this many failed traces loses all of them.
  // Zero disables the worker-level rule.
  std::size_t worker_failure_threshold = 2;
};

struct RejectedTrace {
  Trace trace;
  ValidationReport report;
  // Valid on its own, rejected because its worker crossed the threshold.
  bool worker_rejected = false;
};

struct ScreenResult {
  std::vector<Trace> approved;
  std::vector<RejectedTrace> rejected_traces;
  std::vector<std::string> rejected_workers;
};

ScreenResult screen_dataset(const Dataset& dataset, const ScreeningRule& rule = {});
// Screens using stored statuses; only `rejected` counts as a failure,
// `pending_review` is held back without counting against the worker.
ScreenResult screen_records(std::span<const StoreRecord> records, const ScreeningRule& rule = {});

}  // namespace tasktrace

#include "tasktrace/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>

namespace tasktrace {
namespace {

using json = nlohmann::json;

std::string join(const std::string& path, std::string_view key) {
  if (path.empty()) return std::string(key);
  return path + "." + std::string(key);
}

std::string at_index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

void require_object(const json& doc, const std::string& path) {
  if (!doc.is_object()) throw SchemaError(path, "expected an object");
}

void reject_extra_keys(const json& doc, const std::string& path,
                       std::initializer_list<std::string_view> allowed,
                       std::optional<Rule> rule = std::nullopt) {
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw SchemaError(join(path, key), "unexpected field", rule);
    }
  }
}

std::string require_string(const json& doc, const std::string& path, std::string_view key) {
  const std::string where = join(path, key);
  if (!doc.contains(key)) throw SchemaError(where, "missing required field");
  const auto& value = doc.at(std::string(key));
  if (!value.is_string()) throw SchemaError(where, "expected a string");
  return value.get<std::string>();
}

std::optional<std::string> optional_string(const json& doc, const std::string& path,
                                           std::string_view key) {
  if (!doc.contains(key)) return std::nullopt;
  const auto& value = doc.at(std::string(key));
  if (!value.is_string()) throw SchemaError(join(path, key), "expected a string");
  return value.get<std::string>();
}

CountSummary summarize(const std::vector<std::size_t>& values) {
  CountSummary s;
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  std::size_t total = 0;
  for (auto v : values) total += v;
  s.mean = static_cast<double>(total) / static_cast<double>(values.size());
  return s;
}

nlohmann::ordered_json summary_json(const std::optional<CountSummary>& s) {
  if (!s) return {{"mean", nullptr}, {"min", nullptr}, {"max", nullptr}};
  return {{"mean", s->mean}, {"min", s->min}, {"max", s->max}};
}

nlohmann::ordered_json optional_number(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

}  // namespace

SchemaError::SchemaError(std::string path, std::string message, std::optional<Rule> rule)
    : std::runtime_error((path.empty() ? std::string("(root)") : path) + ": " +
                         (rule ? std::string(rule_id(*rule)) + ": " : std::string()) + message),
      path_(std::move(path)),
      detail_(std::move(message)),
      rule_(rule) {}

StepInstance step_from_json(const json& doc, const std::string& path) {
  require_object(doc, path);
  reject_extra_keys(doc, path, {"kind", "args", "description"});
  const std::string kind_text = require_string(doc, path, "kind");
  const auto kind = parse_step_kind(kind_text);
  if (!kind) {
    throw SchemaError(join(path, "kind"), "unknown step kind '" + kind_text + "'",
                      Rule::unknown_kind);
  }
  StepInstance step{*kind, {}, optional_string(doc, path, "description")};
  const auto schema = step_schema(*kind);
  const std::string args_path = join(path, "args");
  if (!doc.contains("args")) {
    if (!schema.empty()) throw SchemaError(args_path, "missing required field", Rule::bad_step_args);
    return step;
  }
  const auto& args = doc.at("args");
  if (!args.is_object()) throw SchemaError(args_path, "expected an object", Rule::bad_step_args);
  for (const auto& [key, value] : args.items()) {
    (void)value;
    const auto slot = parse_param_slot(key);
    if (!slot || std::find(schema.begin(), schema.end(), *slot) == schema.end()) {
      throw SchemaError(join(args_path, key),
                        "not a parameter of '" + kind_text + "'", Rule::bad_step_args);
    }
  }
  for (auto slot : schema) {
    const std::string name(to_string(slot));
    if (!args.contains(name)) {
      throw SchemaError(join(args_path, name), "missing argument", Rule::bad_step_args);
    }
    const auto& value = args.at(name);
    if (!value.is_string()) {
      throw SchemaError(join(args_path, name), "expected a string", Rule::bad_step_args);
    }
    step.args.push_back({slot, value.get<std::string>()});
  }
  return step;
}

nlohmann::ordered_json step_to_json(const StepInstance& step) {
  nlohmann::ordered_json out;
  out["kind"] = to_string(step.kind);
  nlohmann::ordered_json args = nlohmann::ordered_json::object();
  for (const auto& arg : step.args) args[std::string(to_string(arg.slot))] = arg.value;
  out["args"] = std::move(args);
  if (step.description) out["description"] = *step.description;
  return out;
}

Trace trace_from_json(const json& doc) {
  require_object(doc, "");
  reject_extra_keys(doc, "", {"id", "category", "worker_id", "created_at", "steps", "feedback"});
  Trace trace;
  trace.id = require_string(doc, "", "id");
  trace.category = require_string(doc, "", "category");
  trace.worker_id = require_string(doc, "", "worker_id");
  const auto created = require_string(doc, "", "created_at");
  const auto ts = parse_timestamp(created);
  if (!ts) throw SchemaError("created_at", "expected ISO-8601 UTC 'YYYY-MM-DDTHH:MM:SSZ'");
  trace.created_at = *ts;
  if (!doc.contains("steps")) throw SchemaError("steps", "missing required field");
  const auto& steps = doc.at("steps");
  if (!steps.is_array()) throw SchemaError("steps", "expected an array");
  trace.steps.reserve(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) {
    trace.steps.push_back(step_from_json(steps[i], at_index("steps", i)));
  }
  trace.feedback = optional_string(doc, "", "feedback");
  return trace;
}

nlohmann::ordered_json trace_to_json(const Trace& trace) {
  nlohmann::ordered_json out;
  out["id"] = trace.id;
  out["category"] = trace.category;
  out["worker_id"] = trace.worker_id;
  out["created_at"] = format_timestamp(trace.created_at);
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (const auto& step : trace.steps) steps.push_back(step_to_json(step));
  out["steps"] = std::move(steps);
  if (trace.feedback) out["feedback"] = *trace.feedback;
  return out;
}

Trace parse_trace(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("malformed JSON: ") + e.what());
  }
  return trace_from_json(doc);
}

std::string serialize_trace(const Trace& trace) { return trace_to_json(trace).dump(); }

nlohmann::ordered_json report_to_json(const ValidationReport& report) {
  nlohmann::ordered_json violations = nlohmann::ordered_json::array();
  for (const auto& v : report.violations) {
    violations.push_back({{"rule", rule_id(v.rule)}, {"message", v.message}});
  }
  return {{"verdict", to_string(report.verdict)}, {"violations", std::move(violations)}};
}

ValidationReport report_from_json(const json& doc) {
  require_object(doc, "report");
  reject_extra_keys(doc, "report", {"verdict", "violations"});
  const auto verdict = require_string(doc, "report", "verdict");
  if (!doc.contains("violations") || !doc.at("violations").is_array()) {
    throw SchemaError("report.violations", "expected an array");
  }
  std::vector<Violation> violations;
  const auto& list = doc.at("violations");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string path = at_index("report.violations", i);
    require_object(list[i], path);
    const auto id = require_string(list[i], path, "rule");
    const auto rule = parse_rule_id(id);
    if (!rule) throw SchemaError(join(path, "rule"), "unknown rule id '" + id + "'");
    violations.push_back({*rule, require_string(list[i], path, "message")});
  }
  auto report = make_report(std::move(violations));
  if (to_string(report.verdict) != verdict) {
    throw SchemaError("report.verdict", "verdict does not follow from the violations");
  }
  return report;
}

std::string_view to_string(RecordStatus status) {
  switch (status) {
    case RecordStatus::approved: return "approved";
    case RecordStatus::rejected: return "rejected";
    case RecordStatus::pending_review: return "pending_review";
  }
  return "rejected";
}

std::optional<RecordStatus> parse_record_status(std::string_view text) {
  if (text == "approved") return RecordStatus::approved;
  if (text == "rejected") return RecordStatus::rejected;
  if (text == "pending_review") return RecordStatus::pending_review;
  return std::nullopt;
}

StoreRecord record_for(Trace trace) {
  auto report = validate_trace(trace);
  const auto status = report.approved() ? RecordStatus::approved : RecordStatus::rejected;
  return {std::move(trace), status, std::move(report)};
}

nlohmann::ordered_json record_to_json(const StoreRecord& record) {
  nlohmann::ordered_json out;
  out["trace"] = trace_to_json(record.trace);
  out["status"] = to_string(record.status);
  out["report"] = report_to_json(record.report);
  return out;
}

StoreRecord record_from_json(const json& doc) {
  require_object(doc, "");
  reject_extra_keys(doc, "", {"trace", "status", "report"});
  if (!doc.contains("trace")) throw SchemaError("trace", "missing required field");
  StoreRecord record;
  try {
    record.trace = trace_from_json(doc.at("trace"));
  } catch (const SchemaError& e) {
    throw SchemaError(join("trace", e.path()), e.detail(), e.rule());
  }
  const auto status = require_string(doc, "", "status");
  const auto parsed = parse_record_status(status);
  if (!parsed) throw SchemaError("status", "unknown status '" + status + "'");
  record.status = *parsed;
  if (!doc.contains("report")) throw SchemaError("report", "missing required field");
  record.report = report_from_json(doc.at("report"));
  return record;
}

std::string serialize_record(const StoreRecord& record) { return record_to_json(record).dump(); }

std::optional<std::string> check_dataset(const Dataset& dataset) {
  std::set<std::string_view> ids;
  for (const auto& trace : dataset.traces) {
    if (!ids.insert(trace.id).second) return "duplicate trace id '" + trace.id + "'";
    if (!find_category(dataset.categories, trace.category)) {
      return "trace '" + trace.id + "' has unknown category '" + trace.category + "'";
    }
  }
  return std::nullopt;
}

std::vector<Trace> JsonlContents::traces() const {
  std::vector<Trace> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.trace);
  return out;
}

JsonlContents read_jsonl(std::istream& in) {
  JsonlContents out;
  std::unordered_map<std::string, std::size_t> position;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json doc;
      try {
        doc = json::parse(line);
      } catch (const json::parse_error& e) {
        throw SchemaError("", std::string("malformed JSON: ") + e.what());
      }
      StoreRecord record = doc.is_object() && doc.contains("trace")
                               ? record_from_json(doc)
                               : record_for(trace_from_json(doc));
      const auto [it, inserted] = position.try_emplace(record.trace.id, out.records.size());
      if (inserted) {
        out.records.push_back(std::move(record));
      } else {
        out.records[it->second] = std::move(record);
      }
    } catch (const SchemaError& e) {
      out.errors.push_back({number, e.path(), e.rule(), e.what()});
    }
  }
  return out;
}

JsonlContents read_jsonl_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_jsonl(in);
}

void write_traces_jsonl(std::ostream& out, std::span<const Trace> traces) {
  for (const auto& trace : traces) out << serialize_trace(trace) << '\n';
}

StatsSummary dataset_stats(std::span<const Trace> traces) {
  StatsSummary s;
  for (auto slug : category_slugs()) s.traces_per_category[std::string(slug)] = 0;
  std::set<std::string_view> workers, describing, waiting;
  std::vector<std::size_t> lengths;
  lengths.reserve(traces.size());
  for (const auto& trace : traces) {
    ++s.total_traces;
    ++s.traces_per_category[trace.category];
    workers.insert(trace.worker_id);
    lengths.push_back(trace.steps.size());
    s.total_steps += trace.steps.size();
    for (const auto& step : trace.steps) {
      if (step.description && !canonicalize(*step.description).empty()) {
        ++s.total_descriptions;
        describing.insert(trace.worker_id);
      }
      if (step.kind == StepKind::wait) waiting.insert(trace.worker_id);
    }
  }
  s.total_workers = workers.size();
  s.workers_with_descriptions = describing.size();
  s.workers_using_wait = waiting.size();
  if (!lengths.empty()) s.steps_per_trace = summarize(lengths);
  std::vector<std::size_t> per_category;
  for (const auto& [slug, count] : s.traces_per_category) {
    if (count > 0) per_category.push_back(count);
  }
  if (!per_category.empty()) s.per_category = summarize(per_category);
  if (s.total_steps > 0) {
    s.description_rate =
        static_cast<double>(s.total_descriptions) / static_cast<double>(s.total_steps);
  }
  if (s.total_workers > 0) {
    s.wait_usage = static_cast<double>(s.workers_using_wait) / static_cast<double>(s.total_workers);
  }
  return s;
}

nlohmann::ordered_json stats_to_json(const StatsSummary& s) {
  nlohmann::ordered_json per_category = nlohmann::ordered_json::object();
  for (auto slug : category_slugs()) {
    per_category[std::string(slug)] = s.traces_per_category.at(std::string(slug));
  }
  for (const auto& [slug, count] : s.traces_per_category) {
    if (!is_known_category(slug)) per_category[slug] = count;
  }
  nlohmann::ordered_json out;
  out["total_traces"] = s.total_traces;
  out["total_workers"] = s.total_workers;
  out["traces_per_category"] = std::move(per_category);
  out["per_category"] = summary_json(s.per_category);
  out["steps_per_trace"] = summary_json(s.steps_per_trace);
  out["total_steps"] = s.total_steps;
  out["total_descriptions"] = s.total_descriptions;
  out["description_rate"] = optional_number(s.description_rate);
  out["workers_with_descriptions"] = s.workers_with_descriptions;
  out["workers_using_wait"] = s.workers_using_wait;
  out["wait_usage"] = optional_number(s.wait_usage);
  return out;
}

ScreenResult screen_records(std::span<const StoreRecord> records, const ScreeningRule& rule) {
  std::map<std::string, std::size_t> failures;
  for (const auto& r : records) {
    if (r.status == RecordStatus::rejected) ++failures[r.trace.worker_id];
  }
  std::set<std::string> rejected_workers;
  if (rule.worker_failure_threshold > 0) {
    for (const auto& [worker, count] : failures) {
      if (count >= rule.worker_failure_threshold) rejected_workers.insert(worker);
    }
  }
  ScreenResult out;
  for (const auto& r : records) {
    const bool worker_out = rejected_workers.contains(r.trace.worker_id);
    if (r.status == RecordStatus::approved && !worker_out) {
      out.approved.push_back(r.trace);
    } else {
      out.rejected_traces.push_back(
          {r.trace, r.report, worker_out && r.status == RecordStatus::approved});
    }
  }
  out.rejected_workers.assign(rejected_workers.begin(), rejected_workers.end());
  return out;
}

ScreenResult screen_dataset(const Dataset& dataset, const ScreeningRule& rule) {
  std::vector<StoreRecord> records;
  records.reserve(dataset.traces.size());
  for (const auto& trace : dataset.traces) records.push_back(record_for(trace));
  return screen_records(records, rule);
}

}  // namespace tasktrace

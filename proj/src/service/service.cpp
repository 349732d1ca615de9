#include "tasktrace/service/service.hpp"

#include <sstream>

#include "tasktrace/hmm.hpp"

namespace tasktrace::service {
namespace {

using ojson = nlohmann::ordered_json;

Response json_response(int status, const ojson& body) { return {status, body.dump(), "application/json"}; }

Response error(int status, const std::string& message, const std::string& path = {},
               std::optional<Rule> rule = std::nullopt) {
  ojson body{{"error", message}};
  if (!path.empty()) body["path"] = path;
  if (rule) body["rule"] = rule_id(*rule);
  return json_response(status, body);
}

ojson model_versions(const ModelSnapshot& snapshot) {
  ojson categories = ojson::object();
  for (auto slug : category_slugs()) {
    const auto model = snapshot.find(std::string(slug));
    if (model) {
      categories[std::string(slug)] = {{"status", "ready"},
                                       {"version", model->version},
                                       {"trace_count", model->model().trace_count()}};
    } else {
      categories[std::string(slug)] = {{"status", "model not ready"}};
    }
  }
  return {{"version", snapshot.version}, {"categories", std::move(categories)}};
}

}  // namespace

Service::Service(ServiceConfig config)
    : config_(std::move(config)),
      categories_(default_categories()),
      store_(config_.data_dir, config_.store),
      registry_(config_.models) {
  const auto categories_file = config_.data_dir / "categories.json";
  std::error_code ec;
  if (std::filesystem::is_regular_file(categories_file, ec)) {
    categories_ = load_categories(categories_file);
  }
  registry_.rebuild([this] { return approved_traces(); });
}

std::vector<Trace> Service::approved_traces() const {
  const auto records = store_.records();
  return screen_records(records, config_.screening).approved;
}

Response Service::list_categories() const {
  ojson out = ojson::array();
  for (const auto& cat : categories_) {
    ojson hints = ojson::array();
    for (const auto& h : cat.layout_hints) hints.push_back({{"region", h.region}, {"tooltip", h.tooltip}});
    out.push_back({{"slug", cat.slug}, {"prompt_text", cat.prompt_text}, {"layout_hints", std::move(hints)}});
  }
  return json_response(200, out);
}

Response Service::category_steps(const std::string& slug) const {
  if (!find_category(categories_, slug)) return error(404, "unknown category '" + slug + "'");
  ojson steps = ojson::array();
  for (auto kind : all_step_kinds()) {
    ojson slots = ojson::array();
    for (auto slot : step_schema(kind)) slots.push_back(to_string(slot));
    steps.push_back({{"kind", to_string(kind)},
                     {"slots", std::move(slots)},
                     {"description", step_description(kind)}});
  }
  return json_response(200, {{"category", slug}, {"steps", std::move(steps)}});
}

Response Service::submit_trace(const std::string& body, const std::optional<std::string>& session) {
  if (config_.require_acknowledgement && (!session || !store_.session_acknowledged(*session))) {
    return error(403, "session has not acknowledged the tutorial");
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    return error(400, std::string("malformed JSON: ") + e.what(), "(root)");
  }
  Trace trace;
  try {
    trace = trace_from_json(doc);
  } catch (const SchemaError& e) {
    return error(422, e.detail(), e.path().empty() ? "(root)" : e.path(), e.rule());
  }
  if (!is_known_category(trace.category)) {
    return error(400, "unknown category '" + trace.category + "'", "category", Rule::unknown_category);
  }

  const auto record = record_for(std::move(trace));
  try {
    if (!store_.append(record)) return error(409, "trace id '" + record.trace.id + "' already exists", "id");
  } catch (const StorageError& e) {
    return error(500, e.what());
  }

  if (record.status == RecordStatus::approved && config_.rebuild_every > 0) {
    bool due = false;
    {
      std::lock_guard lock(trigger_mutex_);
      if (++approved_since_rebuild_ >= config_.rebuild_every) {
        approved_since_rebuild_ = 0;
        due = true;
      }
    }
    if (due) registry_.rebuild([this] { return approved_traces(); });
  }

  return json_response(201, {{"id", record.trace.id},
                             {"status", to_string(record.status)},
                             {"report", report_to_json(record.report)}});
}

Response Service::export_traces() const {
  std::ostringstream out;
  store_.write_export(out);
  return {200, out.str(), "application/x-ndjson"};
}

Response Service::stats() const {
  const auto approved = approved_traces();
  return json_response(200, stats_to_json(dataset_stats(approved)));
}

Response Service::rebuild_models() {
  {
    std::lock_guard lock(trigger_mutex_);
    approved_since_rebuild_ = 0;
  }
  const auto snapshot = registry_.rebuild([this] { return approved_traces(); });
  return json_response(200, model_versions(*snapshot));
}

Response Service::suggest(const std::string& slug, const std::string& body) const {
  if (!find_category(categories_, slug)) return error(404, "unknown category '" + slug + "'");
  const auto snapshot = registry_.snapshot();
  const auto entry = snapshot->find(slug);
  if (!entry) return error(404, "model not ready");

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body.empty() ? std::string("{}") : body);
  } catch (const nlohmann::json::parse_error& e) {
    return error(400, std::string("malformed JSON: ") + e.what(), "(root)");
  }
  if (!doc.is_object()) return error(400, "expected an object", "(root)");

  auto config = config_.suggest;
  std::vector<ObservedStep> observations;
  try {
    if (doc.contains("k")) {
      const auto& k = doc.at("k");
      if (!k.is_number_unsigned() || k.get<std::size_t>() == 0) {
        return error(400, "k must be a positive integer", "k");
      }
      config.k = k.get<std::size_t>();
    }
    if (doc.contains("hint")) {
      const auto& hint = doc.at("hint");
      if (!hint.is_array()) return error(400, "expected an array", "hint");
      for (std::size_t i = 0; i < hint.size(); ++i) {
        observations.push_back(observed_step_from_json(hint[i], "hint[" + std::to_string(i) + "]"));
      }
    }
  } catch (const SchemaError& e) {
    return error(422, e.detail(), e.path(), e.rule());
  }

  const auto resolved = resolve_observations(entry->hmm, observations);
  if (!resolved) return error(422, "inconsistent observation: the hint has zero likelihood under the model", "hint");

  const auto suggestions = suggest_edits(entry->model(), entry->traces, *resolved, config);
  ojson hint = ojson::array();
  for (const auto& step : *resolved) hint.push_back(step_to_json(step));
  return json_response(200, {{"category", slug},
                             {"model_version", entry->version},
                             {"snapshot_version", snapshot->version},
                             {"trace_count", entry->model().trace_count()},
                             {"hint", std::move(hint)},
                             {"suggestions", suggestions_to_json(suggestions)}});
}

Response Service::acknowledge_session(const std::string& body) {
  std::string worker;
  if (!body.empty()) {
    try {
      const auto doc = nlohmann::json::parse(body);
      if (doc.is_object() && doc.contains("worker_id") && doc.at("worker_id").is_string()) {
        worker = doc.at("worker_id").get<std::string>();
      }
    } catch (const nlohmann::json::parse_error& e) {
      return error(400, std::string("malformed JSON: ") + e.what(), "(root)");
    }
  }
  try {
    const auto token = store_.acknowledge_session(worker);
    return json_response(201, {{"session", token}, {"acknowledged", true}});
  } catch (const StorageError& e) {
    return error(500, e.what());
  }
}

}  // namespace tasktrace::service

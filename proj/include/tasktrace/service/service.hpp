#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tasktrace/category.hpp"
#include "tasktrace/dataset.hpp"
#include "tasktrace/service/model_registry.hpp"
#include "tasktrace/service/trace_store.hpp"
#include "tasktrace/suggest.hpp"

namespace tasktrace::service {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = "data";
  ModelSettings models;
  ScreeningRule screening;
  SuggestConfig suggest;
  // Rebuild after this many approved submissions; 0 rebuilds only on request.
  std::size_t rebuild_every = 10;
  bool require_acknowledgement = true;
  StoreOptions store;
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// Transport-independent request handling. Every method is safe to call
// concurrently; submissions are serialized by the store.
class Service {
 public:
  // Opens the store, loads <data_dir>/categories.json when present (built-in
  // prompts otherwise) and builds the initial models.
  explicit Service(ServiceConfig config);

  Response list_categories() const;
  Response category_steps(const std::string& slug) const;
  Response submit_trace(const std::string& body, const std::optional<std::string>& session);
  Response export_traces() const;
  Response stats() const;
  Response rebuild_models();
  Response suggest(const std::string& slug, const std::string& body) const;
  Response acknowledge_session(const std::string& body);

  const TraceStore& store() const { return store_; }
  TraceStore& store() { return store_; }
  std::shared_ptr<const ModelSnapshot> models() const { return registry_.snapshot(); }
  const ServiceConfig& config() const { return config_; }

  // Traces that survive screening.
  std::vector<Trace> approved_traces() const;

 private:
  ServiceConfig config_;
  std::vector<TaskCategory> categories_;
  TraceStore store_;
  ModelRegistry registry_;
  std::mutex trigger_mutex_;
  std::size_t approved_since_rebuild_ = 0;
};

}  // namespace tasktrace::service

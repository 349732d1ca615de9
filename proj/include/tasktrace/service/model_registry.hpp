#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "tasktrace/hmm.hpp"
#include "tasktrace/markov.hpp"
#include "tasktrace/trace.hpp"

namespace tasktrace::service {

struct CategoryModel {
  Hmm hmm;
  std::vector<Trace> traces;
  // Registry version at which this category's trace set last changed.
  std::uint64_t version = 0;

  const MarkovModel& model() const { return hmm.transitions(); }
};

struct ModelSnapshot {
  std::uint64_t version = 0;
  // Only categories with at least one approved trace appear.
  std::map<std::string, std::shared_ptr<const CategoryModel>> models;

  std::shared_ptr<const CategoryModel> find(const std::string& slug) const;
};

struct ModelSettings {
  Abstraction abstraction = Abstraction::kind;
  double alpha = 0.0;
  EmissionParams emission;
};

// Holds the current snapshot. Readers pin a snapshot for the length of a
// request; rebuilds construct a complete new snapshot and swap it in, so a
// reader sees either the old or the new models and never a mix.
class ModelRegistry {
 public:
  explicit ModelRegistry(ModelSettings settings);

  std::shared_ptr<const ModelSnapshot> snapshot() const;

  // Groups approved traces by category and rebuilds every model. Categories
  // whose trace list is unchanged keep their previous model and version.
  std::shared_ptr<const ModelSnapshot> rebuild(std::span<const Trace> approved);
  // Calls `source` while holding the rebuild lock, so successive rebuilds
  // never publish an older trace set than their predecessor.
  std::shared_ptr<const ModelSnapshot> rebuild(const std::function<std::vector<Trace>()>& source);

  const ModelSettings& settings() const { return settings_; }

 private:
  std::shared_ptr<const ModelSnapshot> rebuild_locked(std::span<const Trace> approved);

  ModelSettings settings_;
  std::mutex rebuild_mutex_;
  mutable std::mutex swap_mutex_;
  std::shared_ptr<const ModelSnapshot> current_;
};

}  // namespace tasktrace::service

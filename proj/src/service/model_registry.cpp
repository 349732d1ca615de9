#include "tasktrace/service/model_registry.hpp"

namespace tasktrace::service {

std::shared_ptr<const CategoryModel> ModelSnapshot::find(const std::string& slug) const {
  const auto it = models.find(slug);
  return it == models.end() ? nullptr : it->second;
}

ModelRegistry::ModelRegistry(ModelSettings settings)
    : settings_(settings), current_(std::make_shared<const ModelSnapshot>()) {
  settings_.emission.validate();
}

std::shared_ptr<const ModelSnapshot> ModelRegistry::snapshot() const {
  std::lock_guard lock(swap_mutex_);
  return current_;
}

std::shared_ptr<const ModelSnapshot> ModelRegistry::rebuild(std::span<const Trace> approved) {
  std::lock_guard rebuild_lock(rebuild_mutex_);
  return rebuild_locked(approved);
}

std::shared_ptr<const ModelSnapshot> ModelRegistry::rebuild(
    const std::function<std::vector<Trace>()>& source) {
  std::lock_guard rebuild_lock(rebuild_mutex_);
  const auto approved = source();
  return rebuild_locked(approved);
}

std::shared_ptr<const ModelSnapshot> ModelRegistry::rebuild_locked(std::span<const Trace> approved) {
  const auto previous = snapshot();

  std::map<std::string, std::vector<Trace>> grouped;
  for (const auto& trace : approved) grouped[trace.category].push_back(trace);

  auto next = std::make_shared<ModelSnapshot>();
  next->version = previous->version + 1;
  for (auto& [slug, traces] : grouped) {
    const auto old = previous->find(slug);
    if (old && old->traces == traces) {
      next->models.emplace(slug, old);
      continue;
    }
    auto model = build_markov(traces, settings_.abstraction, settings_.alpha);
    next->models.emplace(
        slug, std::make_shared<const CategoryModel>(CategoryModel{
                  Hmm(std::move(model), settings_.emission), std::move(traces), next->version}));
  }

  std::shared_ptr<const ModelSnapshot> published = std::move(next);
  {
    std::lock_guard lock(swap_mutex_);
    current_ = published;
  }
  return published;
}

}  // namespace tasktrace::service

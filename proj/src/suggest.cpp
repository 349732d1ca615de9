#include "tasktrace/suggest.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "tasktrace/loops.hpp"

namespace tasktrace {
namespace {

StepInstance payload_for(const MarkovModel& model, std::size_t state) {
  const auto& key = model.states()[state];
  auto values = key.arg_signature ? *key.arg_signature : model.modal_args(state);
  values.resize(step_schema(key.kind).size());
  return make_step(key.kind, std::move(values));
}

std::string provenance(const MarkovModel& model) { return "markov:" + model.category(); }

}  // namespace

NextSteps suggest_next(const MarkovModel& model, std::span<const StepInstance> prefix,
                       std::size_t k) {
  if (k == 0) throw std::invalid_argument("suggest_next: k must be positive");
  NextSteps out;
  std::size_t from = model.start_index();
  if (!prefix.empty()) {
    const auto idx = model.index_of(prefix.back());
    if (!idx) {
      out.unknown_state = true;
      return out;
    }
    from = *idx;
  }
  out.end_probability = model.probability(from, model.end_index());
  for (std::size_t to = 1; to < model.end_index(); ++to) {
    const double p = model.probability(from, to);
    if (p <= 0.0) continue;
    out.suggestions.push_back(
        {SuggestionKind::next_step, payload_for(model, to), prefix.size(), p, provenance(model)});
  }
  sort_suggestions(out.suggestions);
  if (out.suggestions.size() > k) out.suggestions.resize(k);
  return out;
}

std::vector<Suggestion> detect_branches(const MarkovModel& model, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("detect_branches: threshold must lie in (0,1)");
  }
  std::vector<Suggestion> out;
  const auto states = model.states();
  for (std::size_t from = 0; from < model.end_index(); ++from) {
    BranchPoint branch{states[from], {}};
    for (std::size_t to = 1; to < model.end_index(); ++to) {
      if (model.count(from, to) == 0) continue;
      const double p = model.probability(from, to);
      if (p >= threshold) branch.alternatives.push_back({states[to], p});
    }
    if (branch.alternatives.size() < 2) continue;
    std::stable_sort(branch.alternatives.begin(), branch.alternatives.end(),
                     [](const BranchAlternative& a, const BranchAlternative& b) {
                       return a.probability > b.probability;
                     });
    const double score = branch.alternatives[1].probability;
    out.push_back({SuggestionKind::branch_point, std::move(branch), std::nullopt, score,
                   provenance(model)});
  }
  sort_suggestions(out);
  return out;
}

std::vector<Suggestion> suggest_edits(const MarkovModel& model, std::span<const Trace> traces,
                                      std::span<const StepInstance> hint,
                                      const SuggestConfig& config) {
  std::vector<Suggestion> all = suggest_next(model, hint, config.k).suggestions;
  if (!traces.empty()) {
    auto missing = diff_complete(hint, traces, config.costs);
    all.insert(all.end(), missing.begin(), missing.end());
  }

  std::vector<Suggestion> merged;
  for (auto& s : all) {
    auto same = std::find_if(merged.begin(), merged.end(), [&](const Suggestion& m) {
      return m.position == s.position && same_step(*m.step(), *s.step());
    });
    if (same == merged.end()) {
      merged.push_back(std::move(s));
    } else if (s.score > same->score) {
      *same = std::move(s);
    }
  }

  auto loops = suggest_foreach(hint, config.min_reps);
  merged.insert(merged.end(), loops.begin(), loops.end());

  std::set<StateKey> on_path;
  if (!hint.empty()) on_path.insert(StateKey::start());
  for (const auto& step : hint) on_path.insert(StateKey::of(step, model.abstraction()));
  for (auto& b : detect_branches(model, config.branch_threshold)) {
    if (on_path.contains(b.branch()->state)) merged.push_back(std::move(b));
  }
  sort_suggestions(merged);
  return merged;
}

}  // namespace tasktrace

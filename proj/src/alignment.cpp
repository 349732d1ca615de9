#include "tasktrace/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tasktrace {

void AlignCosts::validate() const {
  for (double c : {match, substitute_same_kind, substitute_other_kind, insert, remove}) {
    if (!std::isfinite(c) || c < 0.0) throw std::invalid_argument("alignment costs must be finite and non-negative");
  }
  if (match > substitute_same_kind) throw std::invalid_argument("match cost exceeds substitution cost");
  if (substitute_same_kind > substitute_other_kind) {
    throw std::invalid_argument("cross-kind substitution is cheaper than same-kind substitution");
  }
}

double AlignCosts::pair_cost(const StepInstance& a, const StepInstance& b) const {
  if (a.kind != b.kind) return substitute_other_kind;
  return canonical_args(a) == canonical_args(b) ? match : substitute_same_kind;
}

std::string_view to_string(EditType type) {
  switch (type) {
    case EditType::match: return "match";
    case EditType::substitute: return "substitute";
    case EditType::insert: return "insert";
    case EditType::remove: return "delete";
  }
  return "match";
}

Alignment align(std::span<const StepInstance> source, std::span<const StepInstance> target,
                const AlignCosts& costs) {
  costs.validate();
  const auto n = source.size();
  const auto m = target.size();
  std::vector<std::vector<double>> table(n + 1, std::vector<double>(m + 1, 0.0));
  for (std::size_t i = 1; i <= n; ++i) table[i][0] = table[i - 1][0] + costs.remove;
  for (std::size_t j = 1; j <= m; ++j) table[0][j] = table[0][j - 1] + costs.insert;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      table[i][j] = std::min({table[i - 1][j - 1] + costs.pair_cost(source[i - 1], target[j - 1]),
                              table[i - 1][j] + costs.remove, table[i][j - 1] + costs.insert});
    }
  }

  Alignment out;
  out.cost = table[n][m];
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const double here = table[i][j];
    if (i > 0 && j > 0) {
      const double pair = costs.pair_cost(source[i - 1], target[j - 1]);
      if (table[i - 1][j - 1] + pair == here) {
        const bool same = source[i - 1].kind == target[j - 1].kind &&
                          canonical_args(source[i - 1]) == canonical_args(target[j - 1]);
        out.ops.push_back({same ? EditType::match : EditType::substitute, i - 1, j - 1});
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && table[i - 1][j] + costs.remove == here) {
      out.ops.push_back({EditType::remove, i - 1, 0});
      --i;
      continue;
    }
    out.ops.push_back({EditType::insert, 0, j - 1});
    --j;
  }
  std::reverse(out.ops.begin(), out.ops.end());
  return out;
}

std::vector<StepInstance> replay(const Alignment& alignment, std::span<const StepInstance> source,
                                 std::span<const StepInstance> target) {
  std::vector<StepInstance> out;
  for (const auto& op : alignment.ops) {
    switch (op.type) {
      case EditType::match: out.push_back(source[op.source]); break;
      case EditType::substitute:
      case EditType::insert: out.push_back(target[op.target]); break;
      case EditType::remove: break;
    }
  }
  return out;
}

DiffResult diff_against(std::span<const StepInstance> hint, std::span<const Trace> traces,
                        const AlignCosts& costs) {
  DiffResult out;
  for (std::size_t t = 0; t < traces.size(); ++t) {
    if (traces[t].category != traces.front().category) {
      throw std::invalid_argument("diff_complete: traces span several categories");
    }
    auto candidate = align(hint, traces[t].steps, costs);
    const bool better =
        !out.best_trace || candidate.cost < out.alignment.cost ||
        (candidate.cost == out.alignment.cost && traces[t].id < traces[*out.best_trace].id);
    if (better) {
      out.best_trace = t;
      out.alignment = std::move(candidate);
    }
  }
  if (!out.best_trace) return out;

  const auto& best = traces[*out.best_trace];
  const double score = 1.0 / (1.0 + out.alignment.cost);
  std::size_t consumed = 0;
  for (const auto& op : out.alignment.ops) {
    if (op.type == EditType::insert) {
      StepInstance step = best.steps[op.target];
      for (auto& arg : step.args) arg.value = canonicalize(arg.value);
      step.description.reset();
      out.suggestions.push_back(
          {SuggestionKind::missing_step, std::move(step), consumed, score, "trace:" + best.id});
    } else {
      ++consumed;
    }
  }
  sort_suggestions(out.suggestions);
  return out;
}

std::vector<Suggestion> diff_complete(std::span<const StepInstance> hint,
                                      std::span<const Trace> traces, const AlignCosts& costs) {
  return diff_against(hint, traces, costs).suggestions;
}

}  // namespace tasktrace

#include "tasktrace/loops.hpp"

#include <algorithm>
#include <stdexcept>

namespace tasktrace {

std::vector<LoopRegion> detect_loops(std::span<const StepInstance> steps, std::size_t min_reps) {
  if (min_reps < 2) throw std::invalid_argument("detect_loops: min_reps must be at least 2");
  const auto n = steps.size();
  std::vector<LoopRegion> candidates;
  // run[i]: how many consecutive positions from i agree with the position p later.
  std::vector<std::size_t> run(n + 1);
  for (std::size_t p = 1; p * min_reps <= n; ++p) {
    std::fill(run.begin(), run.end(), 0);
    for (std::size_t i = n - p; i-- > 0;) {
      run[i] = steps[i].kind == steps[i + p].kind ? run[i + 1] + 1 : 0;
    }
    for (std::size_t s = 0; s + p * min_reps <= n; ++s) {
      const std::size_t reps = 1 + run[s] / p;
      for (std::size_t r = min_reps; r <= reps; ++r) candidates.push_back({s, p, r});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const LoopRegion& a, const LoopRegion& b) {
    if (a.length() != b.length()) return a.length() > b.length();
    if (a.start != b.start) return a.start < b.start;
    return a.period < b.period;
  });
  std::vector<LoopRegion> chosen;
  std::vector<bool> covered(n, false);
  for (const auto& c : candidates) {
    const auto first = covered.begin() + static_cast<std::ptrdiff_t>(c.start);
    if (std::any_of(first, first + static_cast<std::ptrdiff_t>(c.length()),
                    [](bool b) { return b; })) {
      continue;
    }
    std::fill(first, first + static_cast<std::ptrdiff_t>(c.length()), true);
    chosen.push_back(c);
  }
  std::sort(chosen.begin(), chosen.end(),
            [](const LoopRegion& a, const LoopRegion& b) { return a.start < b.start; });
  return chosen;
}

std::vector<Suggestion> suggest_foreach(std::span<const StepInstance> steps, std::size_t min_reps) {
  std::vector<Suggestion> out;
  for (const auto& region : detect_loops(steps, min_reps)) {
    const double score = static_cast<double>(region.length()) / static_cast<double>(steps.size());
    out.push_back({SuggestionKind::foreach_loop, region, std::nullopt, score, "hint"});
  }
  sort_suggestions(out);
  return out;
}

}  // namespace tasktrace

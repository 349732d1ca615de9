#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tasktrace/alignment.hpp"
#include "tasktrace/markov.hpp"
#include "tasktrace/suggestion.hpp"
#include "tasktrace/trace.hpp"

namespace tasktrace {

struct NextSteps {
  std::vector<Suggestion> suggestions;
  // Probability that the task ends after the prefix.
  double end_probability = 0.0;
  // The prefix's last step maps to a state the model has never seen.
  bool unknown_state = false;
};

// Top-k successors of the prefix's last state (START for an empty prefix),
// END excluded. Zero-probability successors are never proposed. Payload args
// are the state's modal args (kind abstraction) or its own signature.
// Throws std::invalid_argument if k == 0.
NextSteps suggest_next(const MarkovModel& model, std::span<const StepInstance> prefix,
                       std::size_t k);

// One branch point per non-END state with at least two observed successors
// (END excluded) whose probability is >= threshold. Throws
// std::invalid_argument unless threshold lies in (0,1).
std::vector<Suggestion> detect_branches(const MarkovModel& model, double threshold);

struct SuggestConfig {
  std::size_t k = 3;
  AlignCosts costs;
  double branch_threshold = 0.2;
  std::size_t min_reps = 2;
};

// Next steps at the hint end, missing steps from the closest trace, foreach
// loops in the hint, and branch points along the hint's path (START counts
// once the hint has a first step). Step suggestions proposing the same step
// at the same position are merged, keeping the higher score.
std::vector<Suggestion> suggest_edits(const MarkovModel& model, std::span<const Trace> traces,
                                      std::span<const StepInstance> hint,
                                      const SuggestConfig& config = {});

}  // namespace tasktrace

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tasktrace/step.hpp"
#include "tasktrace/suggestion.hpp"

namespace tasktrace {

// Tandem repeats compared by step kind only, so grab(a) place(a) grab(b)
// place(b) repeats. Overlaps resolve to the larger covered length, then the
// smaller start, then the smaller period. Regions come back ordered by start
// and never overlap. Throws std::invalid_argument if min_reps < 2.
std::vector<LoopRegion> detect_loops(std::span<const StepInstance> steps, std::size_t min_reps = 2);

std::vector<Suggestion> suggest_foreach(std::span<const StepInstance> steps,
                                        std::size_t min_reps = 2);

}  // namespace tasktrace

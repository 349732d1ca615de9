#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "tasktrace/step.hpp"
#include "tasktrace/suggestion.hpp"
#include "tasktrace/trace.hpp"

namespace tasktrace {

// Edit costs between step sequences. Requires non-negative values with
// match <= substitute_same_kind <= substitute_other_kind.
struct AlignCosts {
  double match = 0.0;                  // same kind, same canonical args
  double substitute_same_kind = 0.5;   // same kind, different args
  double substitute_other_kind = 1.0;
  double insert = 1.0;
  double remove = 1.0;

  // Throws std::invalid_argument when the constraints above do not hold.
  void validate() const;
  double pair_cost(const StepInstance& a, const StepInstance& b) const;
};

enum class EditType { match, substitute, insert, remove };

std::string_view to_string(EditType type);

struct EditOp {
  EditType type = EditType::match;
  std::size_t source = 0;  // unused for insert
  std::size_t target = 0;  // unused for remove

  friend bool operator==(const EditOp&, const EditOp&) = default;
};

struct Alignment {
  std::vector<EditOp> ops;
  double cost = 0.0;
};

// Minimum-cost edit script from `source` to `target`. On equal cost the
// backtrace prefers match, then substitute, then delete, then insert.
Alignment align(std::span<const StepInstance> source, std::span<const StepInstance> target,
                const AlignCosts& costs = {});

// Applies `alignment` to `source`, taking inserted and substituted steps
// from `target`.
std::vector<StepInstance> replay(const Alignment& alignment, std::span<const StepInstance> source,
                                 std::span<const StepInstance> target);

struct DiffResult {
  std::vector<Suggestion> suggestions;
  // Index into the trace list of the closest trace; absent for no traces.
  std::optional<std::size_t> best_trace;
  Alignment alignment;
};

// Aligns the hint against every trace and proposes the closest trace's
// insertions as missing steps. Ties between traces go to the smaller id.
DiffResult diff_against(std::span<const StepInstance> hint, std::span<const Trace> traces,
                        const AlignCosts& costs = {});
std::vector<Suggestion> diff_complete(std::span<const StepInstance> hint,
                                      std::span<const Trace> traces, const AlignCosts& costs = {});

}  // namespace tasktrace

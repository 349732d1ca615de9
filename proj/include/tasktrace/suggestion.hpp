#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "tasktrace/markov.hpp"
#include "tasktrace/step.hpp"

namespace tasktrace {

enum class SuggestionKind { next_step, missing_step, foreach_loop, branch_point };

std::string_view to_string(SuggestionKind kind);
std::optional<SuggestionKind> parse_suggestion_kind(std::string_view text);

struct LoopRegion {
  std::size_t start = 0;
  std::size_t period = 0;
  std::size_t repetitions = 0;

  std::size_t length() const { return period * repetitions; }
  friend bool operator==(const LoopRegion&, const LoopRegion&) = default;
};

struct BranchAlternative {
  StateKey state;
  double probability = 0.0;

  friend bool operator==(const BranchAlternative&, const BranchAlternative&) = default;
};

struct BranchPoint {
  StateKey state;
  // Descending probability, ties in state order.
  std::vector<BranchAlternative> alternatives;

  friend bool operator==(const BranchPoint&, const BranchPoint&) = default;
};

// Scores are ranking scores in [0,1], not calibrated probabilities:
//   next_step     transition probability
//   missing_step  1 / (1 + alignment cost)
//   foreach_loop  covered steps / hint length
//   branch_point  second-highest qualifying transition probability
struct Suggestion {
  SuggestionKind kind = SuggestionKind::next_step;
  std::variant<StepInstance, LoopRegion, BranchPoint> payload;
  // Insertion index in hint coordinates (next_step and missing_step only).
  std::optional<std::size_t> position;
  double score = 0.0;
  std::string provenance;

  const StepInstance* step() const { return std::get_if<StepInstance>(&payload); }
  const LoopRegion* region() const { return std::get_if<LoopRegion>(&payload); }
  const BranchPoint* branch() const { return std::get_if<BranchPoint>(&payload); }

  friend bool operator==(const Suggestion&, const Suggestion&) = default;
};

// Descending score; ties by toolbox kind order, then argument signature,
// then the remaining fields so the order is total.
bool suggestion_before(const Suggestion& a, const Suggestion& b);
void sort_suggestions(std::vector<Suggestion>& suggestions);

nlohmann::ordered_json suggestion_to_json(const Suggestion& suggestion);
Suggestion suggestion_from_json(const nlohmann::json& doc);
nlohmann::ordered_json suggestions_to_json(const std::vector<Suggestion>& suggestions);

}  // namespace tasktrace

#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tasktrace/step.hpp"
#include "tasktrace/trace.hpp"

namespace tasktrace {

enum class Abstraction { kind, kind_args };

std::string_view to_string(Abstraction abstraction);
std::optional<Abstraction> parse_abstraction(std::string_view text);

// A Markov state. START sorts before every step state and END after; step
// states order by toolbox kind order, then by argument signature.
struct StateKey {
  enum class Role : std::uint8_t { start, step, end };

  Role role = Role::step;
  StepKind kind = StepKind::move_to;
  // Present only under Abstraction::kind_args.
  std::optional<std::vector<std::string>> arg_signature;

  static StateKey start() { return {Role::start, StepKind::move_to, std::nullopt}; }
  static StateKey end() { return {Role::end, StepKind::move_to, std::nullopt}; }
  static StateKey of(const StepInstance& step, Abstraction abstraction);

  bool is_step() const { return role == Role::step; }

  friend bool operator==(const StateKey&, const StateKey&) = default;
  friend std::strong_ordering operator<=>(const StateKey& a, const StateKey& b);
};

std::string to_string(const StateKey& state);
nlohmann::ordered_json state_to_json(const StateKey& state);
StateKey state_from_json(const nlohmann::json& doc);

using ArgCounts = std::map<std::vector<std::string>, std::uint64_t>;

// First-order transition counts over abstracted steps with additive
// smoothing. Immutable once built; probabilities are derived from counts.
class MarkovModel {
 public:
  // `states` must be sorted, unique, start with START and end with END.
  // `counts` is square over `states`; `arg_counts` is parallel to `states`.
  // Throws std::invalid_argument if the structure is inconsistent.
  MarkovModel(std::string category, Abstraction abstraction, double alpha,
              std::vector<StateKey> states, std::vector<std::vector<std::uint64_t>> counts,
              std::vector<ArgCounts> arg_counts, std::size_t trace_count);

  const std::string& category() const { return category_; }
  Abstraction abstraction() const { return abstraction_; }
  double alpha() const { return alpha_; }
  std::size_t trace_count() const { return trace_count_; }

  std::span<const StateKey> states() const { return states_; }
  std::size_t start_index() const { return 0; }
  std::size_t end_index() const { return states_.size() - 1; }
  std::optional<std::size_t> index_of(const StateKey& state) const;
  std::optional<std::size_t> index_of(const StepInstance& step) const;

  std::uint64_t count(std::size_t from, std::size_t to) const { return counts_[from][to]; }
  std::uint64_t row_total(std::size_t from) const { return row_totals_[from]; }
  // Observed step states plus END.
  std::size_t successor_alphabet_size() const { return states_.size() - 1; }

  double probability(std::size_t from, std::size_t to) const;
  // Zero when either state is unknown to the model.
  double probability(const StateKey& from, const StateKey& to) const;

  // Most frequent canonical args observed for a state; ties resolve to the
  // lexicographically smallest signature.
  std::vector<std::string> modal_args(std::size_t state) const;
  const ArgCounts& arg_counts(std::size_t state) const { return arg_counts_[state]; }
  const std::vector<std::vector<std::uint64_t>>& counts() const { return counts_; }

 private:
  std::string category_;
  Abstraction abstraction_;
  double alpha_;
  std::vector<StateKey> states_;
  std::vector<std::vector<std::uint64_t>> counts_;
  std::vector<ArgCounts> arg_counts_;
  std::vector<std::uint64_t> row_totals_;
  std::size_t trace_count_;
};

// Throws std::invalid_argument on an empty list, mixed categories, or a
// negative alpha.
MarkovModel build_markov(std::span<const Trace> traces, Abstraction abstraction = Abstraction::kind,
                         double alpha = 0.0);

// Sum of log transition probabilities along START -> steps -> END;
// -infinity when any transition has probability zero.
double sequence_log_prob(const MarkovModel& model, std::span<const StepInstance> steps);

// Export: {category, abstraction, alpha, states[], counts[][], trace_count,
// arg_observations[]}. Probabilities are recomputed on load.
nlohmann::ordered_json model_to_json(const MarkovModel& model);
MarkovModel model_from_json(const nlohmann::json& doc);

}  // namespace tasktrace

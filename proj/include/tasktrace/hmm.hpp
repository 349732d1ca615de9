#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tasktrace/markov.hpp"
#include "tasktrace/step.hpp"

namespace tasktrace {

// A hint step whose kind and/or args may be unknown, e.g. an utterance like
// "that goes over there".
struct ObservedStep {
  std::optional<StepKind> kind;
  // Canonical arg tokens; nullopt when unknown.
  std::optional<std::vector<std::string>> args;
  // The fully specified step when the observation came from one.
  std::optional<StepInstance> step;

  static ObservedStep from(const StepInstance& step);
  bool fully_known() const { return step.has_value(); }
};

// {"kind": "grab", "args": {...}} is a known step; {"kind": null, "args":
// ["mail"]} (or with either field omitted) is an ambiguous one.
ObservedStep observed_step_from_json(const nlohmann::json& doc, const std::string& path = "");

struct EmissionParams {
  double kind_match_prob = 0.9;
  double arg_similarity_weight = 0.5;

  // Throws std::invalid_argument unless p in (0,1) and w in [0,1].
  void validate() const;
};

// Hidden states are the model's step states; START supplies the initial
// distribution. Emission of observation o from state s is
//   kind term: p if kinds match, (1-p)/16 if both known and different,
//              1/17 if o's kind is unknown
//   times (w * jaccard(args(s), args(o)) + 1 - w)
// where args(s) is the state's signature (kind+args) or its modal args
// (kind), and jaccard is 1 when either side has no args.
class Hmm {
 public:
  Hmm(MarkovModel transitions, EmissionParams params = {});

  const MarkovModel& transitions() const { return transitions_; }
  const EmissionParams& params() const { return params_; }
  // Indices into transitions().states() of the hidden states.
  std::span<const std::size_t> hidden_states() const { return hidden_; }

  double emission(std::size_t state, const ObservedStep& observation) const;

 private:
  MarkovModel transitions_;
  EmissionParams params_;
  std::vector<std::size_t> hidden_;
  std::vector<std::vector<std::string>> state_args_;
};

struct ViterbiResult {
  // False when every path has zero likelihood.
  bool consistent = false;
  std::vector<StateKey> path;
  double log_score = 0.0;
};

struct ForwardResult {
  bool consistent = false;
  double log_likelihood = 0.0;
};

// Backpointer and final-state ties resolve to the smaller state.
ViterbiResult viterbi(const Hmm& hmm, std::span<const ObservedStep> observations);
ForwardResult forward_likelihood(const Hmm& hmm, std::span<const ObservedStep> observations);

// Replaces ambiguous observations with their decoded steps; known steps pass
// through unchanged. Decoded args come from the observation when it supplies
// the right number of tokens, otherwise from the state. nullopt when the
// observations are inconsistent with the model.
std::optional<std::vector<StepInstance>> resolve_observations(
    const Hmm& hmm, std::span<const ObservedStep> observations);

}  // namespace tasktrace

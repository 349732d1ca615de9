#include "tasktrace/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "tasktrace/dataset.hpp"

namespace tasktrace {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 1.0;
  const std::set<std::string> x(a.begin(), a.end());
  const std::set<std::string> y(b.begin(), b.end());
  std::size_t common = 0;
  for (const auto& token : x) common += y.count(token);
  const std::size_t uni = x.size() + y.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

}  // namespace

ObservedStep ObservedStep::from(const StepInstance& step) {
  return {step.kind, canonical_args(step), step};
}

ObservedStep observed_step_from_json(const nlohmann::json& doc, const std::string& path) {
  if (!doc.is_object()) throw SchemaError(path, "expected an object");
  if (doc.contains("kind") && doc.at("kind").is_string()) {
    return ObservedStep::from(step_from_json(doc, path));
  }
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (key != "kind" && key != "args" && key != "description") {
      throw SchemaError(path.empty() ? key : path + "." + key, "unexpected field");
    }
  }
  ObservedStep obs;
  if (doc.contains("kind") && !doc.at("kind").is_null()) {
    throw SchemaError(path.empty() ? "kind" : path + ".kind", "expected a string or null");
  }
  if (doc.contains("args") && !doc.at("args").is_null()) {
    const auto& args = doc.at("args");
    const std::string where = path.empty() ? "args" : path + ".args";
    if (!args.is_array()) throw SchemaError(where, "ambiguous steps take an array of tokens");
    std::vector<std::string> tokens;
    for (const auto& token : args) {
      if (!token.is_string()) throw SchemaError(where, "expected strings");
      tokens.push_back(canonicalize(token.get<std::string>()));
    }
    obs.args = std::move(tokens);
  }
  return obs;
}

void EmissionParams::validate() const {
  if (!(kind_match_prob > 0.0 && kind_match_prob < 1.0)) {
    throw std::invalid_argument("kind_match_prob must lie in (0,1)");
  }
  if (!(arg_similarity_weight >= 0.0 && arg_similarity_weight <= 1.0)) {
    throw std::invalid_argument("arg_similarity_weight must lie in [0,1]");
  }
}

Hmm::Hmm(MarkovModel transitions, EmissionParams params)
    : transitions_(std::move(transitions)), params_(params) {
  params_.validate();
  const auto states = transitions_.states();
  state_args_.resize(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (!states[i].is_step()) continue;
    hidden_.push_back(i);
    state_args_[i] = states[i].arg_signature ? *states[i].arg_signature : transitions_.modal_args(i);
  }
}

double Hmm::emission(std::size_t state, const ObservedStep& observation) const {
  const auto& key = transitions_.states()[state];
  const double kinds = static_cast<double>(kStepKindCount);
  double kind_term;
  if (!observation.kind) {
    kind_term = 1.0 / kinds;
  } else if (*observation.kind == key.kind) {
    kind_term = params_.kind_match_prob;
  } else {
    kind_term = (1.0 - params_.kind_match_prob) / (kinds - 1.0);
  }
  const double overlap = observation.args ? jaccard(state_args_[state], *observation.args) : 1.0;
  const double w = params_.arg_similarity_weight;
  return kind_term * (w * overlap + (1.0 - w));
}

ViterbiResult viterbi(const Hmm& hmm, std::span<const ObservedStep> observations) {
  ViterbiResult out;
  if (observations.empty()) return out;
  const auto& model = hmm.transitions();
  const auto hidden = hmm.hidden_states();
  const auto h = hidden.size();
  const auto steps = observations.size();
  if (h == 0) return out;

  std::vector<std::vector<double>> score(steps, std::vector<double>(h, kNegInf));
  std::vector<std::vector<std::size_t>> back(steps, std::vector<std::size_t>(h, 0));
  for (std::size_t s = 0; s < h; ++s) {
    score[0][s] = safe_log(model.probability(model.start_index(), hidden[s])) +
                  safe_log(hmm.emission(hidden[s], observations[0]));
  }
  for (std::size_t t = 1; t < steps; ++t) {
    for (std::size_t s = 0; s < h; ++s) {
      double best = kNegInf;
      std::size_t arg = 0;
      for (std::size_t p = 0; p < h; ++p) {
        const double cand = score[t - 1][p] + safe_log(model.probability(hidden[p], hidden[s]));
        if (cand > best) {
          best = cand;
          arg = p;
        }
      }
      back[t][s] = arg;
      score[t][s] = best + safe_log(hmm.emission(hidden[s], observations[t]));
    }
  }
  double best = kNegInf;
  std::size_t last = 0;
  for (std::size_t s = 0; s < h; ++s) {
    if (score[steps - 1][s] > best) {
      best = score[steps - 1][s];
      last = s;
    }
  }
  if (best == kNegInf) return out;
  std::vector<std::size_t> path(steps);
  path[steps - 1] = last;
  for (std::size_t t = steps - 1; t > 0; --t) path[t - 1] = back[t][path[t]];
  out.consistent = true;
  out.log_score = best;
  out.path.reserve(steps);
  for (auto s : path) out.path.push_back(model.states()[hidden[s]]);
  return out;
}

ForwardResult forward_likelihood(const Hmm& hmm, std::span<const ObservedStep> observations) {
  ForwardResult out;
  if (observations.empty()) return out;
  const auto& model = hmm.transitions();
  const auto hidden = hmm.hidden_states();
  const auto h = hidden.size();
  if (h == 0) return out;

  std::vector<double> alpha(h, kNegInf);
  for (std::size_t s = 0; s < h; ++s) {
    alpha[s] = safe_log(model.probability(model.start_index(), hidden[s])) +
               safe_log(hmm.emission(hidden[s], observations[0]));
  }
  std::vector<double> next(h);
  for (std::size_t t = 1; t < observations.size(); ++t) {
    for (std::size_t s = 0; s < h; ++s) {
      double acc = kNegInf;
      for (std::size_t p = 0; p < h; ++p) {
        acc = log_add(acc, alpha[p] + safe_log(model.probability(hidden[p], hidden[s])));
      }
      next[s] = acc + safe_log(hmm.emission(hidden[s], observations[t]));
    }
    alpha.swap(next);
  }
  double total = kNegInf;
  for (double a : alpha) total = log_add(total, a);
  if (total == kNegInf) return out;
  out.consistent = true;
  out.log_likelihood = total;
  return out;
}

std::optional<std::vector<StepInstance>> resolve_observations(
    const Hmm& hmm, std::span<const ObservedStep> observations) {
  if (std::all_of(observations.begin(), observations.end(),
                  [](const ObservedStep& o) { return o.fully_known(); })) {
    std::vector<StepInstance> out;
    for (const auto& o : observations) out.push_back(*o.step);
    return out;
  }
  const auto decoded = viterbi(hmm, observations);
  if (!decoded.consistent) return std::nullopt;
  const auto& model = hmm.transitions();
  std::vector<StepInstance> out;
  out.reserve(observations.size());
  for (std::size_t t = 0; t < observations.size(); ++t) {
    const auto& obs = observations[t];
    if (obs.fully_known()) {
      out.push_back(*obs.step);
      continue;
    }
    const auto& state = decoded.path[t];
    const auto arity = step_schema(state.kind).size();
    std::vector<std::string> values;
    if (obs.args && obs.args->size() == arity) {
      values = *obs.args;
    } else {
      values = model.modal_args(*model.index_of(state));
    }
    values.resize(arity);
    out.push_back(make_step(state.kind, std::move(values)));
  }
  return out;
}

}  // namespace tasktrace

#include "tasktrace/markov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace tasktrace {

std::string_view to_string(Abstraction abstraction) {
  return abstraction == Abstraction::kind ? "kind" : "kind+args";
}

std::optional<Abstraction> parse_abstraction(std::string_view text) {
  if (text == "kind") return Abstraction::kind;
  if (text == "kind+args") return Abstraction::kind_args;
  return std::nullopt;
}

StateKey StateKey::of(const StepInstance& step, Abstraction abstraction) {
  StateKey key{Role::step, step.kind, std::nullopt};
  if (abstraction == Abstraction::kind_args) key.arg_signature = canonical_args(step);
  return key;
}

std::strong_ordering operator<=>(const StateKey& a, const StateKey& b) {
  if (auto c = a.role <=> b.role; c != 0) return c;
  if (a.role != StateKey::Role::step) return std::strong_ordering::equal;
  if (auto c = a.kind <=> b.kind; c != 0) return c;
  if (a.arg_signature.has_value() != b.arg_signature.has_value()) {
    return a.arg_signature.has_value() ? std::strong_ordering::greater
                                       : std::strong_ordering::less;
  }
  if (!a.arg_signature) return std::strong_ordering::equal;
  const auto& x = *a.arg_signature;
  const auto& y = *b.arg_signature;
  if (std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end())) {
    return std::strong_ordering::less;
  }
  if (std::lexicographical_compare(y.begin(), y.end(), x.begin(), x.end())) {
    return std::strong_ordering::greater;
  }
  return std::strong_ordering::equal;
}

std::string to_string(const StateKey& state) {
  if (state.role == StateKey::Role::start) return "START";
  if (state.role == StateKey::Role::end) return "END";
  std::string out(to_string(state.kind));
  if (state.arg_signature) {
    out.push_back('(');
    for (std::size_t i = 0; i < state.arg_signature->size(); ++i) {
      if (i) out += ", ";
      out += (*state.arg_signature)[i];
    }
    out.push_back(')');
  }
  return out;
}

nlohmann::ordered_json state_to_json(const StateKey& state) {
  if (state.role == StateKey::Role::start) return "START";
  if (state.role == StateKey::Role::end) return "END";
  nlohmann::ordered_json out;
  out["kind"] = to_string(state.kind);
  if (state.arg_signature) out["args"] = *state.arg_signature;
  return out;
}

StateKey state_from_json(const nlohmann::json& doc) {
  if (doc.is_string()) {
    const auto text = doc.get<std::string>();
    if (text == "START") return StateKey::start();
    if (text == "END") return StateKey::end();
    throw std::invalid_argument("unknown synthetic state '" + text + "'");
  }
  if (!doc.is_object() || !doc.contains("kind") || !doc.at("kind").is_string()) {
    throw std::invalid_argument("state must be \"START\", \"END\" or {kind[, args]}");
  }
  const auto kind = parse_step_kind(doc.at("kind").get<std::string>());
  if (!kind) throw std::invalid_argument("unknown step kind in state");
  StateKey key{StateKey::Role::step, *kind, std::nullopt};
  if (doc.contains("args")) key.arg_signature = doc.at("args").get<std::vector<std::string>>();
  return key;
}

MarkovModel::MarkovModel(std::string category, Abstraction abstraction, double alpha,
                         std::vector<StateKey> states,
                         std::vector<std::vector<std::uint64_t>> counts,
                         std::vector<ArgCounts> arg_counts, std::size_t trace_count)
    : category_(std::move(category)),
      abstraction_(abstraction),
      alpha_(alpha),
      states_(std::move(states)),
      counts_(std::move(counts)),
      arg_counts_(std::move(arg_counts)),
      trace_count_(trace_count) {
  if (!(alpha_ >= 0.0) || !std::isfinite(alpha_)) {
    throw std::invalid_argument("alpha must be a finite non-negative number");
  }
  const auto n = states_.size();
  if (n < 2 || states_.front() != StateKey::start() || states_.back() != StateKey::end()) {
    throw std::invalid_argument("states must begin with START and end with END");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(states_[i - 1] < states_[i])) {
      throw std::invalid_argument("states must be sorted and unique");
    }
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const bool has_sig = states_[i].arg_signature.has_value();
    if (has_sig != (abstraction_ == Abstraction::kind_args)) {
      throw std::invalid_argument("state '" + to_string(states_[i]) +
                                  "' does not match the model abstraction");
    }
    if (has_sig && states_[i].arg_signature->size() != step_schema(states_[i].kind).size()) {
      throw std::invalid_argument("state '" + to_string(states_[i]) +
                                  "' has the wrong number of arguments");
    }
  }
  if (counts_.size() != n) throw std::invalid_argument("counts must be square over states");
  for (const auto& row : counts_) {
    if (row.size() != n) throw std::invalid_argument("counts must be square over states");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (counts_[i][0] != 0) throw std::invalid_argument("START cannot have incoming transitions");
    if (counts_[n - 1][i] != 0) throw std::invalid_argument("END cannot have outgoing transitions");
  }
  if (arg_counts_.empty()) arg_counts_.resize(n);
  if (arg_counts_.size() != n) throw std::invalid_argument("arg_counts must parallel states");
  row_totals_.resize(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto c : counts_[i]) row_totals_[i] += c;
  }
}

std::optional<std::size_t> MarkovModel::index_of(const StateKey& state) const {
  const auto it = std::lower_bound(states_.begin(), states_.end(), state);
  if (it == states_.end() || *it != state) return std::nullopt;
  return static_cast<std::size_t>(it - states_.begin());
}

std::optional<std::size_t> MarkovModel::index_of(const StepInstance& step) const {
  return index_of(StateKey::of(step, abstraction_));
}

double MarkovModel::probability(std::size_t from, std::size_t to) const {
  if (from == end_index() || to == start_index()) return 0.0;
  const double denom = static_cast<double>(row_totals_[from]) +
                       alpha_ * static_cast<double>(successor_alphabet_size());
  if (denom <= 0.0) return 0.0;
  return (static_cast<double>(counts_[from][to]) + alpha_) / denom;
}

double MarkovModel::probability(const StateKey& from, const StateKey& to) const {
  const auto f = index_of(from);
  const auto t = index_of(to);
  if (!f || !t) return 0.0;
  return probability(*f, *t);
}

std::vector<std::string> MarkovModel::modal_args(std::size_t state) const {
  const auto& counts = arg_counts_.at(state);
  const std::vector<std::string>* best = nullptr;
  std::uint64_t best_count = 0;
  // std::map iterates in lexicographic order, so strict > keeps the smallest.
  for (const auto& [args, count] : counts) {
    if (count > best_count) {
      best = &args;
      best_count = count;
    }
  }
  if (best) return *best;
  if (states_[state].arg_signature) return *states_[state].arg_signature;
  return {};
}

MarkovModel build_markov(std::span<const Trace> traces, Abstraction abstraction, double alpha) {
  if (traces.empty()) throw std::invalid_argument("build_markov: no traces");
  const auto& category = traces.front().category;
  for (const auto& t : traces) {
    if (t.category != category) {
      throw std::invalid_argument("build_markov: mixed categories '" + category + "' and '" +
                                  t.category + "'");
    }
  }
  std::set<StateKey> seen{StateKey::start(), StateKey::end()};
  for (const auto& t : traces) {
    for (const auto& step : t.steps) seen.insert(StateKey::of(step, abstraction));
  }
  std::vector<StateKey> states(seen.begin(), seen.end());
  const auto n = states.size();
  auto index = [&](const StateKey& key) {
    return static_cast<std::size_t>(std::lower_bound(states.begin(), states.end(), key) -
                                    states.begin());
  };
  std::vector<std::vector<std::uint64_t>> counts(n, std::vector<std::uint64_t>(n, 0));
  std::vector<ArgCounts> arg_counts(n);
  for (const auto& t : traces) {
    std::size_t prev = 0;
    for (const auto& step : t.steps) {
      const auto cur = index(StateKey::of(step, abstraction));
      ++counts[prev][cur];
      ++arg_counts[cur][canonical_args(step)];
      prev = cur;
    }
    ++counts[prev][n - 1];
  }
  return MarkovModel(category, abstraction, alpha, std::move(states), std::move(counts),
                     std::move(arg_counts), traces.size());
}

double sequence_log_prob(const MarkovModel& model, std::span<const StepInstance> steps) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  double total = 0.0;
  std::size_t prev = model.start_index();
  auto add = [&](std::size_t to) {
    const double p = model.probability(prev, to);
    if (p <= 0.0) return false;
    total += std::log(p);
    prev = to;
    return true;
  };
  for (const auto& step : steps) {
    const auto idx = model.index_of(step);
    if (!idx || !add(*idx)) return kNegInf;
  }
  if (!add(model.end_index())) return kNegInf;
  return total;
}

nlohmann::ordered_json model_to_json(const MarkovModel& model) {
  nlohmann::ordered_json out;
  out["category"] = model.category();
  out["abstraction"] = to_string(model.abstraction());
  out["alpha"] = model.alpha();
  nlohmann::ordered_json states = nlohmann::ordered_json::array();
  for (const auto& s : model.states()) states.push_back(state_to_json(s));
  out["states"] = std::move(states);
  out["counts"] = model.counts();
  out["trace_count"] = model.trace_count();
  nlohmann::ordered_json observations = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < model.states().size(); ++i) {
    nlohmann::ordered_json per_state = nlohmann::ordered_json::array();
    for (const auto& [args, count] : model.arg_counts(i)) {
      per_state.push_back({{"args", args}, {"count", count}});
    }
    observations.push_back(std::move(per_state));
  }
  out["arg_observations"] = std::move(observations);
  return out;
}

MarkovModel model_from_json(const nlohmann::json& doc) {
  try {
    const auto abstraction = parse_abstraction(doc.at("abstraction").get<std::string>());
    if (!abstraction) throw std::invalid_argument("unknown abstraction");
    std::vector<StateKey> states;
    for (const auto& s : doc.at("states")) states.push_back(state_from_json(s));
    auto counts = doc.at("counts").get<std::vector<std::vector<std::uint64_t>>>();
    std::vector<ArgCounts> arg_counts;
    if (doc.contains("arg_observations")) {
      for (const auto& per_state : doc.at("arg_observations")) {
        ArgCounts entry;
        for (const auto& obs : per_state) {
          entry[obs.at("args").get<std::vector<std::string>>()] =
              obs.at("count").get<std::uint64_t>();
        }
        arg_counts.push_back(std::move(entry));
      }
    }
    return MarkovModel(doc.at("category").get<std::string>(), *abstraction,
                       doc.at("alpha").get<double>(), std::move(states), std::move(counts),
                       std::move(arg_counts), doc.at("trace_count").get<std::size_t>());
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("model document: ") + e.what());
  }
}

}  // namespace tasktrace

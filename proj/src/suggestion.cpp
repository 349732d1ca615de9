#include "tasktrace/suggestion.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

#include "tasktrace/dataset.hpp"

namespace tasktrace {
namespace {

struct TieKey {
  int kind_rank;
  std::vector<std::string> signature;
};

int state_rank(const StateKey& s) {
  switch (s.role) {
    case StateKey::Role::start: return -1;
    case StateKey::Role::end: return static_cast<int>(kStepKindCount);
    case StateKey::Role::step: return static_cast<int>(s.kind);
  }
  return 0;
}

TieKey tie_key(const Suggestion& s) {
  if (const auto* step = s.step()) return {static_cast<int>(step->kind), canonical_args(*step)};
  if (const auto* branch = s.branch()) {
    return {state_rank(branch->state), branch->state.arg_signature.value_or(std::vector<std::string>{})};
  }
  return {static_cast<int>(kStepKindCount) + 1, {}};
}

std::tuple<std::size_t, std::size_t, std::size_t> region_key(const Suggestion& s) {
  if (const auto* r = s.region()) return {r->start, r->period, r->repetitions};
  return {0, 0, 0};
}

}  // namespace

std::string_view to_string(SuggestionKind kind) {
  switch (kind) {
    case SuggestionKind::next_step: return "next_step";
    case SuggestionKind::missing_step: return "missing_step";
    case SuggestionKind::foreach_loop: return "foreach_loop";
    case SuggestionKind::branch_point: return "branch_point";
  }
  return "next_step";
}

std::optional<SuggestionKind> parse_suggestion_kind(std::string_view text) {
  for (auto k : {SuggestionKind::next_step, SuggestionKind::missing_step,
                 SuggestionKind::foreach_loop, SuggestionKind::branch_point}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

bool suggestion_before(const Suggestion& a, const Suggestion& b) {
  if (a.score != b.score) return a.score > b.score;
  const auto ka = tie_key(a);
  const auto kb = tie_key(b);
  if (ka.kind_rank != kb.kind_rank) return ka.kind_rank < kb.kind_rank;
  if (ka.signature != kb.signature) return ka.signature < kb.signature;
  if (a.kind != b.kind) return a.kind < b.kind;
  if (a.position != b.position) return a.position < b.position;
  if (region_key(a) != region_key(b)) return region_key(a) < region_key(b);
  return a.provenance < b.provenance;
}

void sort_suggestions(std::vector<Suggestion>& suggestions) {
  std::stable_sort(suggestions.begin(), suggestions.end(), suggestion_before);
}

nlohmann::ordered_json suggestion_to_json(const Suggestion& s) {
  nlohmann::ordered_json out;
  out["kind"] = to_string(s.kind);
  out["score"] = s.score;
  out["provenance"] = s.provenance;
  if (s.position) out["position"] = *s.position;
  if (const auto* step = s.step()) {
    out["step"] = step_to_json(*step);
  } else if (const auto* r = s.region()) {
    out["region"] = {{"start", r->start}, {"period", r->period}, {"repetitions", r->repetitions}};
  } else if (const auto* b = s.branch()) {
    out["state"] = state_to_json(b->state);
    nlohmann::ordered_json alternatives = nlohmann::ordered_json::array();
    for (const auto& alt : b->alternatives) {
      alternatives.push_back({{"state", state_to_json(alt.state)}, {"probability", alt.probability}});
    }
    out["alternatives"] = std::move(alternatives);
  }
  return out;
}

Suggestion suggestion_from_json(const nlohmann::json& doc) {
  try {
    Suggestion s;
    const auto kind = parse_suggestion_kind(doc.at("kind").get<std::string>());
    if (!kind) throw std::invalid_argument("unknown suggestion kind");
    s.kind = *kind;
    s.score = doc.at("score").get<double>();
    s.provenance = doc.at("provenance").get<std::string>();
    if (doc.contains("position")) s.position = doc.at("position").get<std::size_t>();
    switch (s.kind) {
      case SuggestionKind::next_step:
      case SuggestionKind::missing_step:
        s.payload = step_from_json(doc.at("step"), "step");
        break;
      case SuggestionKind::foreach_loop: {
        const auto& r = doc.at("region");
        s.payload = LoopRegion{r.at("start").get<std::size_t>(), r.at("period").get<std::size_t>(),
                               r.at("repetitions").get<std::size_t>()};
        break;
      }
      case SuggestionKind::branch_point: {
        BranchPoint b{state_from_json(doc.at("state")), {}};
        for (const auto& alt : doc.at("alternatives")) {
          b.alternatives.push_back(
              {state_from_json(alt.at("state")), alt.at("probability").get<double>()});
        }
        s.payload = std::move(b);
        break;
      }
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("suggestion document: ") + e.what());
  }
}

nlohmann::ordered_json suggestions_to_json(const std::vector<Suggestion>& suggestions) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& s : suggestions) out.push_back(suggestion_to_json(s));
  return out;
}

}  // namespace tasktrace

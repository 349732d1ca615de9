#include "tasktrace/step.hpp"

#include <array>
#include <stdexcept>

namespace tasktrace {
namespace {

constexpr std::array<StepKind, kStepKindCount> kKinds{
    StepKind::move_to,  StepKind::find,     StepKind::grab,       StepKind::open,
    StepKind::close,    StepKind::deliver,  StepKind::receive,    StepKind::place,
    StepKind::approach, StepKind::say,      StepKind::tell,       StepKind::ask,
    StepKind::activate, StepKind::deactivate, StepKind::vacuum,   StepKind::wipe,
    StepKind::wait,
};

constexpr std::array<std::string_view, kStepKindCount> kKindNames{
    "move_to", "find",     "grab",       "open",   "close", "deliver",
    "receive", "place",    "approach",   "say",    "tell",  "ask",
    "activate", "deactivate", "vacuum",  "wipe",   "wait",
};

constexpr std::array<std::string_view, 9> kSlotNames{
    "target", "item", "container", "person", "exact_speech",
    "story",  "device", "room",    "surface",
};

constexpr std::array<std::string_view, kStepKindCount> kDescriptions{
    "move to a target",
    "search for a target",
    "grab an item",
    "open a container",
    "close a container",
    "bring an item to a target",
    "receive an item from someone",
    "place an item in a container",
    "approach a person",
    "say the exact speech as specified",
    "tell a story",
    "ask a question using exact speech",
    "turn a device on",
    "turn a device off",
    "clean a room by vacuuming it",
    "clean a surface by wiping it",
    "wait for something to happen",
};

using P = ParamSlot;
constexpr std::array<P, 1> kTarget{P::target};
constexpr std::array<P, 1> kItem{P::item};
constexpr std::array<P, 1> kContainer{P::container};
constexpr std::array<P, 2> kItemTarget{P::item, P::target};
constexpr std::array<P, 2> kItemContainer{P::item, P::container};
constexpr std::array<P, 1> kPerson{P::person};
constexpr std::array<P, 1> kSpeech{P::exact_speech};
constexpr std::array<P, 1> kStory{P::story};
constexpr std::array<P, 1> kDevice{P::device};
constexpr std::array<P, 1> kRoom{P::room};
constexpr std::array<P, 1> kSurface{P::surface};

std::size_t index(StepKind kind) { return static_cast<std::size_t>(kind); }

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

std::span<const StepKind> all_step_kinds() { return kKinds; }

std::string_view to_string(StepKind kind) { return kKindNames.at(index(kind)); }

std::string_view to_string(ParamSlot slot) {
  return kSlotNames.at(static_cast<std::size_t>(slot));
}

std::optional<StepKind> parse_step_kind(std::string_view text) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == text) return kKinds[i];
  }
  return std::nullopt;
}

std::optional<ParamSlot> parse_param_slot(std::string_view text) {
  for (std::size_t i = 0; i < kSlotNames.size(); ++i) {
    if (kSlotNames[i] == text) return static_cast<ParamSlot>(i);
  }
  return std::nullopt;
}

std::span<const ParamSlot> step_schema(StepKind kind) {
  switch (kind) {
    case StepKind::move_to:
    case StepKind::find:
      return kTarget;
    case StepKind::grab:
    case StepKind::receive:
      return kItem;
    case StepKind::open:
    case StepKind::close:
      return kContainer;
    case StepKind::deliver:
      return kItemTarget;
    case StepKind::place:
      return kItemContainer;
    case StepKind::approach:
      return kPerson;
    case StepKind::say:
    case StepKind::ask:
      return kSpeech;
    case StepKind::tell:
      return kStory;
    case StepKind::activate:
    case StepKind::deactivate:
      return kDevice;
    case StepKind::vacuum:
      return kRoom;
    case StepKind::wipe:
      return kSurface;
    case StepKind::wait:
      return {};
  }
  return {};
}

std::string_view step_description(StepKind kind) { return kDescriptions.at(index(kind)); }

std::string canonicalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    out.push_back(c);
  }
  return out;
}

StepInstance make_step(StepKind kind, std::vector<std::string> values,
                       std::optional<std::string> description) {
  const auto schema = step_schema(kind);
  if (values.size() != schema.size()) {
    throw std::invalid_argument("step '" + std::string(to_string(kind)) + "' takes " +
                                std::to_string(schema.size()) + " argument(s), got " +
                                std::to_string(values.size()));
  }
  StepInstance step{kind, {}, std::move(description)};
  step.args.reserve(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    step.args.push_back({schema[i], std::move(values[i])});
  }
  return step;
}

std::vector<std::string> canonical_args(const StepInstance& step) {
  std::vector<std::string> out;
  out.reserve(step.args.size());
  for (const auto& arg : step.args) out.push_back(canonicalize(arg.value));
  return out;
}

bool args_match_schema(const StepInstance& step) {
  const auto schema = step_schema(step.kind);
  if (schema.size() != step.args.size()) return false;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (step.args[i].slot != schema[i]) return false;
  }
  return true;
}

bool same_step(const StepInstance& a, const StepInstance& b) {
  return a.kind == b.kind && canonical_args(a) == canonical_args(b);
}

std::string describe(const StepInstance& step) {
  std::string out(to_string(step.kind));
  out.push_back('(');
  for (std::size_t i = 0; i < step.args.size(); ++i) {
    if (i) out += ", ";
    out += step.args[i].value;
  }
  out.push_back(')');
  return out;
}

}  // namespace tasktrace

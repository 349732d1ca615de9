#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tasktrace {

// The closed toolbox vocabulary. Enumerator order is the toolbox order and is
// used for deterministic tie-breaking throughout.
enum class StepKind : std::uint8_t {
  move_to,
  find,
  grab,
  open,
  close,
  deliver,
  receive,
  place,
  approach,
  say,
  tell,
  ask,
  activate,
  deactivate,
  vacuum,
  wipe,
  wait,
};

inline constexpr std::size_t kStepKindCount = 17;

enum class ParamSlot : std::uint8_t {
  target,
  item,
  container,
  person,
  exact_speech,
  story,
  device,
  room,
  surface,
};

std::span<const StepKind> all_step_kinds();

std::string_view to_string(StepKind kind);
std::string_view to_string(ParamSlot slot);
std::optional<StepKind> parse_step_kind(std::string_view text);
std::optional<ParamSlot> parse_param_slot(std::string_view text);

// Ordered parameter slots for a kind. Never changes at runtime.
std::span<const ParamSlot> step_schema(StepKind kind);

// Tooltip text shown next to each toolbox entry.
std::string_view step_description(StepKind kind);

// Lowercase, trim, and collapse internal whitespace runs to one space.
// Idempotent. Only ASCII letters are case-folded; other bytes pass through.
std::string canonicalize(std::string_view text);

struct StepArg {
  ParamSlot slot;
  std::string value;

  friend bool operator==(const StepArg&, const StepArg&) = default;
};

struct StepInstance {
  StepKind kind{StepKind::wait};
  std::vector<StepArg> args;
  std::optional<std::string> description;

  friend bool operator==(const StepInstance&, const StepInstance&) = default;
};

// Builds a step whose args follow step_schema(kind) order. Throws
// std::invalid_argument when the value count does not match the schema.
StepInstance make_step(StepKind kind, std::vector<std::string> values,
                       std::optional<std::string> description = std::nullopt);

// Canonicalized arg values in slot order.
std::vector<std::string> canonical_args(const StepInstance& step);

// True when the args carry exactly the schema's slots in schema order.
bool args_match_schema(const StepInstance& step);

// Same kind and same canonical args; descriptions are ignored.
bool same_step(const StepInstance& a, const StepInstance& b);

// "deliver(mail, office)" style rendering for human-facing output.
std::string describe(const StepInstance& step);

}  // namespace tasktrace

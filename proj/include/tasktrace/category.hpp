#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace tasktrace {

struct LayoutHint {
  std::string region;
  std::string tooltip;

  friend bool operator==(const LayoutHint&, const LayoutHint&) = default;
};

struct TaskCategory {
  std::string slug;
  std::string prompt_text;
  std::vector<LayoutHint> layout_hints;

  friend bool operator==(const TaskCategory&, const TaskCategory&) = default;
};

// The 18 category slugs in their canonical order.
std::span<const std::string_view> category_slugs();
bool is_known_category(std::string_view slug);

// Built-in prompts; every prompt ends with the open-endedness reminder.
std::vector<TaskCategory> default_categories();

// Categories file: {"<slug>": {"prompt_text": "...", "layout_hints": [{"region", "tooltip"}]}}.
// The file must cover exactly the 18 slugs. Throws std::runtime_error on any
// schema problem.
std::vector<TaskCategory> categories_from_json(const nlohmann::json& doc);
nlohmann::ordered_json categories_to_json(std::span<const TaskCategory> categories);
std::vector<TaskCategory> load_categories(const std::filesystem::path& path);

const TaskCategory* find_category(std::span<const TaskCategory> categories,
                                  std::string_view slug);

}  // namespace tasktrace

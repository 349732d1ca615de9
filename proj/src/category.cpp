#include "tasktrace/category.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <stdexcept>

namespace tasktrace {
namespace {

constexpr std::array<std::string_view, 18> kSlugs{
    "mail",          "greeting",       "farewell",      "groceries",   "storytelling",
    "alarm",         "announcement",   "vacuum",        "answer_door", "turn_on_lights",
    "delivery",      "ask_about_day",  "phone_call",    "patrol",      "find",
    "dust",          "declutter",      "answer_question",
};

constexpr std::string_view kClosing =
    " This task is very open-ended, so please use your imagination based on your past "
    "experiences and the steps that YOU would perform in this situation!";

struct PromptSeed {
  std::string_view slug;
  std::string_view body;
};

// Scenario openers; each is followed by kClosing.
constexpr std::array<PromptSeed, 18> kPrompts{{
    {"mail",
     "Imagine that you live in the home shown to the left and the mail has just come "
     "through the slot in the front door. Starting from anywhere in the home and without "
     "opening anything, what steps would you take to fetch the mail?"},
    {"greeting",
     "Imagine that a guest has just arrived at the front door of the home shown to the "
     "left. What steps would you take to greet them?"},
    {"farewell",
     "Imagine that a guest in the home shown to the left is about to leave. What steps "
     "would you take to see them off?"},
    {"groceries",
     "Imagine that bags of groceries have just been left by the front door of the home "
     "shown to the left. What steps would you take to put the groceries away?"},
    {"storytelling",
     "Imagine that a child in the home shown to the left would like to hear a story "
     "before bed. What steps would you take to tell them one?"},
    {"alarm",
     "Imagine that someone in the home shown to the left needs to be woken up in the "
     "morning. What steps would you take to wake them?"},
    {"announcement",
     "Imagine that dinner is ready in the home shown to the left and everyone needs to "
     "know. What steps would you take to make the announcement?"},
    {"vacuum",
     "Imagine that the floors of the home shown to the left are dirty. What steps would "
     "you take to vacuum them?"},
    {"answer_door",
     "Imagine that someone has just knocked on the front door of the home shown to the "
     "left. What steps would you take to answer the door?"},
    {"turn_on_lights",
     "Imagine that it is getting dark in the home shown to the left. What steps would "
     "you take to turn on the lights?"},
    {"delivery",
     "Imagine that someone in the home shown to the left needs an object brought to "
     "another person. What steps would you take to make the delivery?"},
    {"ask_about_day",
     "Imagine that a resident of the home shown to the left has just come home from "
     "work. What steps would you take to ask them about their day?"},
    {"phone_call",
     "Imagine that the phone is ringing in the home shown to the left and the person it "
     "is for is elsewhere. What steps would you take to handle the call?"},
    {"patrol",
     "Imagine that everyone has gone to bed in the home shown to the left. What steps "
     "would you take to check that the home is secure?"},
    {"find",
     "Imagine that a resident of the home shown to the left has misplaced their keys. "
     "What steps would you take to find them?"},
    {"dust",
     "Imagine that the furniture in the home shown to the left has become dusty. What "
     "steps would you take to dust it?"},
    {"declutter",
     "Imagine that the living room of the home shown to the left is cluttered with "
     "belongings. What steps would you take to tidy it up?"},
    {"answer_question",
     "Imagine that a resident of the home shown to the left has asked a question you "
     "do not know the answer to. What steps would you take to answer it?"},
}};

std::vector<LayoutHint> default_layout() {
  return {
      {"front door", "The main entrance; mail arrives through a slot here."},
      {"living room", "Couch, coffee table, and television."},
      {"kitchen", "Counters, refrigerator, pantry, and the kitchen table."},
      {"office", "Desk, bookshelf, and telephone."},
      {"bedroom", "Bed, dresser, and nightstand with an alarm clock."},
      {"bathroom", "Sink, cabinet, and shower."},
  };
}

}  // namespace

std::span<const std::string_view> category_slugs() { return kSlugs; }

bool is_known_category(std::string_view slug) {
  return std::find(kSlugs.begin(), kSlugs.end(), slug) != kSlugs.end();
}

std::vector<TaskCategory> default_categories() {
  std::vector<TaskCategory> out;
  out.reserve(kPrompts.size());
  for (const auto& seed : kPrompts) {
    out.push_back({std::string(seed.slug), std::string(seed.body) + std::string(kClosing),
                   default_layout()});
  }
  return out;
}

std::vector<TaskCategory> categories_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw std::runtime_error("categories: expected an object keyed by slug");
  std::vector<TaskCategory> out;
  for (auto slug : kSlugs) {
    const std::string key(slug);
    if (!doc.contains(key)) throw std::runtime_error("categories: missing slug '" + key + "'");
    const auto& entry = doc.at(key);
    if (!entry.is_object() || !entry.contains("prompt_text") ||
        !entry.at("prompt_text").is_string()) {
      throw std::runtime_error("categories." + key + ": prompt_text must be a string");
    }
    TaskCategory cat{key, entry.at("prompt_text").get<std::string>(), {}};
    if (entry.contains("layout_hints")) {
      const auto& hints = entry.at("layout_hints");
      if (!hints.is_array()) {
        throw std::runtime_error("categories." + key + ".layout_hints: expected an array");
      }
      for (const auto& h : hints) {
        if (!h.is_object() || !h.contains("region") || !h.contains("tooltip") ||
            !h.at("region").is_string() || !h.at("tooltip").is_string()) {
          throw std::runtime_error("categories." + key +
                                   ".layout_hints: entries need string region and tooltip");
        }
        cat.layout_hints.push_back({h.at("region").get<std::string>(),
                                    h.at("tooltip").get<std::string>()});
      }
    }
    out.push_back(std::move(cat));
  }
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (!is_known_category(key)) throw std::runtime_error("categories: unknown slug '" + key + "'");
  }
  return out;
}

nlohmann::ordered_json categories_to_json(std::span<const TaskCategory> categories) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& cat : categories) {
    nlohmann::ordered_json hints = nlohmann::ordered_json::array();
    for (const auto& h : cat.layout_hints) {
      hints.push_back({{"region", h.region}, {"tooltip", h.tooltip}});
    }
    doc[cat.slug] = {{"prompt_text", cat.prompt_text}, {"layout_hints", std::move(hints)}};
  }
  return doc;
}

std::vector<TaskCategory> load_categories(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open categories file '" + path.string() + "'");
  return categories_from_json(nlohmann::json::parse(in));
}

const TaskCategory* find_category(std::span<const TaskCategory> categories,
                                  std::string_view slug) {
  for (const auto& cat : categories) {
    if (cat.slug == slug) return &cat;
  }
  return nullptr;
}

}  // namespace tasktrace

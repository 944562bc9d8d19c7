#pragma once

// Seeded generator for synthetic benchmark sets with the 10-category layout,
// and export of gold data as a submission directory.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ipa/bench/image_io.hpp"
#include "ipa/bench/manifest.hpp"
#include "ipa/env_model.hpp"
#include "ipa/realisation_lang.hpp"

namespace ipa::bench {

class FixtureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct FixtureElement {
  std::string_view id;
  std::string_view descriptor;
  BoundingBox box;
  bool typeable;
};

struct FixtureInterface {
  std::string_view id;
  std::string_view application;
  std::vector<FixtureElement> elements;
};

inline const std::vector<FixtureInterface>& fixture_interfaces() {
  static const std::vector<FixtureInterface> kInterfaces = {
      {"Sheet",
       "spreadsheet",
       {{"file_menu", "menu", {0, 0, 60, 20}, false},
        {"open_item", "menu item", {0, 20, 120, 40}, false},
        {"formula_bar", "text field", {40, 30, 600, 50}, true},
        {"cell_a1", "cell", {40, 60, 140, 80}, true},
        {"cell_b1", "cell", {140, 60, 240, 80}, true},
        {"cell_c1", "cell", {240, 60, 340, 80}, true},
        {"new_column", "button", {340, 60, 380, 80}, false},
        {"save_button", "button", {600, 0, 640, 20}, false}}},
      {"Browser",
       "browser",
       {{"address_bar", "text field", {80, 10, 900, 40}, true},
        {"back_button", "button", {10, 10, 40, 40}, false},
        {"new_tab", "button", {40, 10, 70, 40}, false},
        {"search_box", "text field", {300, 200, 700, 230}, true},
        {"search_button", "button", {700, 200, 780, 230}, false},
        {"result_link", "link", {300, 260, 700, 280}, false}}},
      {"Mail",
       "webmail",
       {{"inbox_item", "list item", {10, 100, 140, 130}, false},
        {"compose_button", "button", {10, 60, 120, 90}, false},
        {"to_field", "text field", {150, 100, 800, 125}, true},
        {"subject_field", "text field", {150, 130, 800, 155}, true},
        {"body_field", "text area", {150, 160, 800, 500}, true},
        {"send_button", "button", {150, 510, 230, 540}, false}}},
      {"Social",
       "social media site",
       {{"search_box", "text field", {300, 20, 680, 50}, true},
        {"post_item", "list item", {200, 100, 680, 300}, false},
        {"trending_panel", "panel", {700, 100, 950, 500}, false},
        {"hashtag_link", "link", {710, 120, 900, 140}, false}}},
  };
  return kInterfaces;
}

// Interfaces used by each category, indices into fixture_interfaces().
inline std::vector<std::size_t> category_interfaces(std::size_t category) {
  switch (category) {
    case 0: return {0};
    case 1: return {0, 1};
    case 2: return {0, 1};
    case 3: return {2};
    case 4: return {0, 2};
    case 5: return {2, 1};
    case 6: return {1, 0, 2};
    case 7: return {1, 3};
    case 8: return {1, 3, 0};
    default: return {};
  }
}

inline constexpr std::string_view kTexts[] = {
    "monthly report", "flight to tokyo", "carrot cake", "average marks", "top hashtags", "book a flight",
    "manchester",     "lowest price",    "movie trailer", "student names", "quantity",   "ingredients",
};
inline constexpr std::string_view kKeys[] = {"enter", "tab", "escape", "down"};

/// Deterministic across platforms: only raw engine output is used.
class FixtureRng {
 public:
  explicit FixtureRng(std::uint64_t seed) : eng_(seed) {}
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(eng_() % n); }
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }

 private:
  std::mt19937_64 eng_;
};

inline std::string label(std::string_view id) {
  std::string s(id);
  for (auto& c : s)
    if (c == '_') c = ' ';
  return s;
}

inline Environment fixture_environment() {
  Environment::Builder b;
  for (const auto& iface : fixture_interfaces()) {
    b.interface(std::string(iface.id));
    for (const auto& e : iface.elements)
      b.element(std::string(iface.id), std::string(e.id), e.box, std::string(e.descriptor));
  }
  b.action("open", {KindConstraint::symbol});
  b.action("click", {KindConstraint::any});
  b.action("type", {KindConstraint::element, KindConstraint::symbol});
  b.action("copy", {KindConstraint::element});
  b.action("paste", {KindConstraint::element});
  b.action("press", {KindConstraint::symbol});
  b.action("wait", {KindConstraint::symbol});
  return b.build();
}

inline GrayImage fixture_image(std::string_view iface, std::string_view elem) {
  std::uint32_t h = 7;
  for (char c : iface) h = h * 31 + static_cast<unsigned char>(c);
  for (char c : elem) h = h * 31 + static_cast<unsigned char>(c);
  std::vector<double> px;
  for (std::size_t r = 0; r < 8; ++r)
    for (std::size_t c = 0; c < 8; ++c) px.push_back(static_cast<double>((r * 29 + c * 13 + h) % 256));
  return GrayImage(8, 8, std::move(px));
}

struct GeneratedStep {
  Statement statement;
  std::string sentence;
  std::optional<std::pair<std::string, GrayImage>> image;  // relative path, pixels
};

inline GeneratedStep random_step(FixtureRng& rng, const FixtureInterface& iface) {
  const auto& el = iface.elements[rng.below(iface.elements.size())];
  const std::string iid(iface.id), eid(el.id);
  const std::string what = "the " + std::string(el.descriptor) + " '" + label(el.id) + "'";
  GeneratedStep g;
  switch (rng.below(el.typeable ? 7 : 5)) {
    case 0:
    case 1:
      g.statement = {"click", {ArgumentValue::element(iid, eid)}};
      g.sentence = "Click on " + what + ".";
      break;
    case 2: {
      const std::string path = "images/" + iid + "_" + eid + ".pgm";
      g.statement = {"click", {ArgumentValue::image(path, el.box)}};
      g.sentence = "Click on the image of " + what + ".";
      g.image = std::make_pair(path, fixture_image(iface.id, el.id));
      break;
    }
    case 3:
      if (rng.below(2)) {
        const std::string key(kKeys[rng.below(std::size(kKeys))]);
        g.statement = {"press", {ArgumentValue::symbol(key)}};
        g.sentence = "Press the " + key + " key.";
      } else {
        const std::string secs = std::to_string(rng.between(1, 5));
        g.statement = {"wait", {ArgumentValue::symbol(secs)}};
        g.sentence = "Wait " + secs + " seconds.";
      }
      break;
    case 4:
      g.statement = {"copy", {ArgumentValue::element(iid, eid)}};
      g.sentence = "Copy the contents of " + what + ".";
      break;
    case 5:
      g.statement = {"paste", {ArgumentValue::element(iid, eid)}};
      g.sentence = "Paste into " + what + ".";
      break;
    default: {
      const std::string text(kTexts[rng.below(std::size(kTexts))]);
      g.statement = {"type", {ArgumentValue::element(iid, eid), ArgumentValue::symbol(text)}};
      g.sentence = "Type '" + text + "' into " + what + ".";
      break;
    }
  }
  return g;
}

inline void write_file(const fs::path& p, const std::string& content) {
  std::error_code ec;
  fs::create_directories(p.parent_path(), ec);
  if (ec) throw FixtureError("cannot create directory '" + p.parent_path().string() + "': " + ec.message());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw FixtureError("cannot write '" + p.string() + "'");
  out << content;
  if (!out) throw FixtureError("write failed for '" + p.string() + "'");
}

}  // namespace detail

/// Writes a loadable benchmark of 10 * tasks_per_category tasks under `dest`.
/// Output depends only on (seed, tasks_per_category).
inline void generate_fixtures(const fs::path& dest, std::uint64_t seed, std::size_t tasks_per_category) {
  using namespace detail;
  if (tasks_per_category < 1) throw std::invalid_argument("tasks_per_category must be >= 1");
  FixtureRng rng(seed);
  const auto& ifaces = fixture_interfaces();
  const std::string env_json = environment_to_json(fixture_environment()).dump(2) + "\n";

  nlohmann::ordered_json manifest;
  manifest["name"] = "synthetic-seed" + std::to_string(seed);
  manifest["generator"] = {{"seed", seed}, {"per_category", tasks_per_category}};
  manifest["tasks"] = nlohmann::ordered_json::array();

  for (std::size_t cat = 0; cat < kCategories.size(); ++cat) {
    for (std::size_t k = 0; k < tasks_per_category; ++k) {
      char num[32];
      std::snprintf(num, sizeof num, "%03zu", k + 1);
      const std::string task_id = std::string(kCategories[cat]) + "_" + num;
      const fs::path dir = dest / "tasks" / task_id;

      std::vector<std::size_t> used = category_interfaces(cat);
      std::string os_label = "windows-10";
      if (used.empty()) {
        used = category_interfaces(rng.below(kCategories.size() - 1));
        os_label = "ubuntu-16.04";
      }

      const std::size_t length = rng.between(3, 12);
      Process gold;
      std::vector<std::string> sentences;
      std::vector<std::pair<std::string, GrayImage>> images;
      const auto& first = ifaces[used.front()];
      gold.statements.push_back({"open", {ArgumentValue::symbol(std::string(first.application))}});
      sentences.push_back("Open the " + std::string(first.application) + ".");
      while (gold.size() < length) {
        auto g = random_step(rng, ifaces[used[rng.below(used.size())]]);
        gold.statements.push_back(std::move(g.statement));
        sentences.push_back(std::move(g.sentence));
        if (g.image) images.push_back(std::move(*g.image));
      }

      nlohmann::ordered_json steps = nlohmann::ordered_json::array();
      double t = 1.0;
      for (const auto& s : sentences) {
        const double len = static_cast<double>(rng.between(4, 16)) / 2.0;
        steps.push_back({{"start", t}, {"end", t + len}, {"sentence", s}});
        t += len + static_cast<double>(rng.below(3)) / 2.0;
      }

      std::string apps;
      for (std::size_t i = 0; i < used.size(); ++i) {
        if (i) apps += i + 1 == used.size() ? " and the " : ", the ";
        apps += ifaces[used[i]].application;
      }
      write_file(dir / "summary.txt",
                 "Use the " + apps + " to complete a " + std::to_string(length) + "-step office task.\n");
      write_file(dir / "steps.json", steps.dump(2) + "\n");
      write_file(dir / "gold.ipa", "# " + task_id + "\n" + serialize(gold).text);
      write_file(dir / "env.json", env_json);
      nlohmann::ordered_json video = {{"path", "video.mp4"}, {"duration_s", t}};
      write_file(dir / "video.meta.json", video.dump(2) + "\n");
      for (const auto& [path, img] : images) {
        std::error_code ec;
        fs::create_directories((dir / path).parent_path(), ec);
        write_pgm(dir / path, img);
      }

      manifest["tasks"].push_back({{"task_id", task_id}, {"category", kCategories[cat]}, {"os_label", os_label}});
    }
  }
  write_file(dest / "manifest.json", manifest.dump(2) + "\n");
}

/// Submission directory reproducing the gold data: `<id>.ipa`, `<id>.txt`
/// (steps joined) and the task's images under `<id>/`.
inline void export_gold_submissions(const Manifest& m, const fs::path& dest) {
  for (const auto& t : m.tasks) {
    detail::write_file(dest / (t.task_id + ".ipa"), serialize(t.gold).text);
    detail::write_file(dest / (t.task_id + ".txt"), t.steps_text() + "\n");
    const fs::path images = t.directory() / "images";
    if (fs::is_directory(images)) {
      std::error_code ec;
      fs::create_directories(dest / t.task_id, ec);
      fs::copy(images, dest / t.task_id / "images",
               fs::copy_options::recursive | fs::copy_options::overwrite_existing, ec);
      if (ec) throw FixtureError("cannot copy images for '" + t.task_id + "': " + ec.message());
    }
  }
}

}  // namespace ipa::bench

#pragma once

// Benchmark manifest: a root directory holding `manifest.json` and one
// directory per task under `tasks/<task_id>/` with `summary.txt`,
// `steps.json`, `gold.ipa`, `env.json` and an optional `video.meta.json`.

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ipa/env_model.hpp"
#include "ipa/process_ir.hpp"
#include "ipa/realisation_lang.hpp"

namespace ipa::bench {

namespace fs = std::filesystem;

inline constexpr std::array<std::string_view, 10> kCategories = {
    "spreadsheet",
    "spreadsheet_browser_simple",
    "spreadsheet_browser_elaborate",
    "webmail",
    "spreadsheet_webmail",
    "webmail_browser",
    "browser_spreadsheet_webmail",
    "browser_social",
    "browser_social_spreadsheet",
    "different_os",
};

inline bool is_category(std::string_view s) {
  return std::find(kCategories.begin(), kCategories.end(), s) != kCategories.end();
}

struct Step {
  double start = 0.0;  // seconds
  double end = 0.0;
  std::string sentence;
};

struct VideoMeta {
  std::string path;
  double duration_s = 0.0;
};

struct TaskEntry {
  std::string task_id;
  std::string category;
  std::string summary;
  std::vector<Step> steps;
  fs::path gold_program;  // path to gold.ipa
  Process gold;
  Environment environment;
  std::optional<VideoMeta> video;
  std::optional<std::string> os_label;

  fs::path directory() const { return gold_program.parent_path(); }

  std::string steps_text() const {
    std::string out;
    for (const auto& s : steps) {
      if (!out.empty()) out += ' ';
      out += s.sentence;
    }
    return out;
  }
};

struct Manifest {
  std::string name;
  fs::path root;
  std::vector<TaskEntry> tasks;

  const TaskEntry* find(const std::string& id) const {
    for (const auto& t : tasks)
      if (t.task_id == id) return &t;
    return nullptr;
  }
};

struct Diagnostic {
  std::string file;
  std::size_t line = 0;  // 0 when not tied to a position
  std::size_t column = 0;
  std::string message;

  std::string str() const {
    std::ostringstream os;
    os << file;
    if (line) os << ':' << line << ':' << column;
    os << ": " << message;
    return os.str();
  }
};

struct LoadResult {
  std::optional<Manifest> manifest;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return manifest.has_value(); }
};

/// Task ids double as directory and file names.
inline bool is_task_id(std::string_view s) {
  if (s.empty() || s == "." || s == "..") return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
           c == '.';
  });
}

namespace detail {

inline std::optional<std::string> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline std::optional<nlohmann::json> read_json(const fs::path& p, std::vector<Diagnostic>& diags) {
  auto text = slurp(p);
  if (!text) {
    diags.push_back({p.string(), 0, 0, "missing file"});
    return std::nullopt;
  }
  try {
    return nlohmann::json::parse(*text);
  } catch (const nlohmann::json::parse_error& ex) {
    diags.push_back({p.string(), 0, 0, std::string("invalid JSON: ") + ex.what()});
    return std::nullopt;
  }
}

inline void load_task(const fs::path& root, const nlohmann::json& jt, std::vector<TaskEntry>& out,
                      std::vector<Diagnostic>& diags, std::set<std::string>& seen) {
  const std::string mpath = (root / "manifest.json").string();
  if (!jt.is_object() || !jt.contains("task_id") || !jt.at("task_id").is_string()) {
    diags.push_back({mpath, 0, 0, "task entry without a string task_id"});
    return;
  }
  TaskEntry t;
  t.task_id = jt.at("task_id").get<std::string>();
  if (!is_task_id(t.task_id)) {
    diags.push_back({mpath, 0, 0, "invalid task_id '" + t.task_id + "'"});
    return;
  }
  if (!seen.insert(t.task_id).second) {
    diags.push_back({mpath, 0, 0, "duplicate task_id '" + t.task_id + "'"});
    return;
  }
  const std::size_t before = diags.size();
  if (!jt.contains("category") || !jt.at("category").is_string()) {
    diags.push_back({mpath, 0, 0, "task '" + t.task_id + "' has no category"});
  } else {
    t.category = jt.at("category").get<std::string>();
    if (!is_category(t.category))
      diags.push_back({mpath, 0, 0, "task '" + t.task_id + "': unknown category '" + t.category + "'"});
  }
  if (jt.contains("os_label") && jt.at("os_label").is_string()) t.os_label = jt.at("os_label").get<std::string>();

  const fs::path dir = root / "tasks" / t.task_id;
  if (!fs::is_directory(dir)) {
    diags.push_back({dir.string(), 0, 0, "missing task directory"});
    return;
  }

  if (auto s = slurp(dir / "summary.txt")) {
    t.summary = *s;
    while (!t.summary.empty() && (t.summary.back() == '\n' || t.summary.back() == '\r')) t.summary.pop_back();
  } else {
    diags.push_back({(dir / "summary.txt").string(), 0, 0, "missing file"});
  }

  const std::string spath = (dir / "steps.json").string();
  if (auto js = read_json(dir / "steps.json", diags)) {
    if (!js->is_array()) {
      diags.push_back({spath, 0, 0, "steps must be a JSON array"});
    } else {
      for (std::size_t i = 0; i < js->size(); ++i) {
        const auto& e = (*js)[i];
        const std::string where = "step " + std::to_string(i + 1) + ": ";
        if (!e.is_object() || !e.contains("start") || !e.contains("end") || !e.contains("sentence") ||
            !e.at("start").is_number() || !e.at("end").is_number() || !e.at("sentence").is_string()) {
          diags.push_back({spath, 0, 0, where + "expected {\"start\": s, \"end\": s, \"sentence\": \"...\"}"});
          continue;
        }
        Step s{e.at("start").get<double>(), e.at("end").get<double>(), e.at("sentence").get<std::string>()};
        if (!(s.start >= 0.0)) diags.push_back({spath, 0, 0, where + "segment start is negative"});
        if (!(s.start < s.end)) diags.push_back({spath, 0, 0, where + "segment start must precede its end"});
        if (!t.steps.empty() && s.start < t.steps.back().end)
          diags.push_back({spath, 0, 0, where + "segment overlaps or precedes the previous segment"});
        t.steps.push_back(std::move(s));
      }
    }
  }

  t.gold_program = dir / "gold.ipa";
  if (auto src = read_source(t.gold_program.string())) {
    auto pr = parse(*src);
    if (!pr.ok()) {
      for (const auto& d : pr.diagnostics)
        diags.push_back({t.gold_program.string(), d.line_number, d.column, d.message});
    } else {
      t.gold = std::move(*pr.process);
      t.gold.id = t.task_id;
    }
  } else {
    diags.push_back({t.gold_program.string(), 0, 0, "missing file"});
  }

  bool have_env = false;
  if (auto je = read_json(dir / "env.json", diags)) {
    try {
      t.environment = environment_from_json(*je);
      have_env = true;
    } catch (const EnvironmentFormatError& ex) {
      diags.push_back({(dir / "env.json").string(), 0, 0, ex.what()});
    }
  }
  if (have_env && diags.size() == before) {
    for (const auto& v : validate_process(t.gold, t.environment))
      diags.push_back({t.gold_program.string(), v.statement_index + 1, 1, "environment violation: " + v.message});
  }

  if (fs::exists(dir / "video.meta.json")) {
    const std::string vpath = (dir / "video.meta.json").string();
    if (auto jv = read_json(dir / "video.meta.json", diags)) {
      if (jv->is_object() && jv->contains("path") && jv->at("path").is_string() && jv->contains("duration_s") &&
          jv->at("duration_s").is_number() && jv->at("duration_s").get<double>() >= 0.0)
        t.video = VideoMeta{jv->at("path").get<std::string>(), jv->at("duration_s").get<double>()};
      else
        diags.push_back({vpath, 0, 0, "expected {\"path\": \"...\", \"duration_s\": s} with duration_s >= 0"});
    }
  }

  if (diags.size() == before) out.push_back(std::move(t));
}

}  // namespace detail

inline LoadResult load_manifest(const fs::path& root) {
  LoadResult r;
  const fs::path mpath = root / "manifest.json";
  if (!fs::is_directory(root)) {
    r.diagnostics.push_back({root.string(), 0, 0, "benchmark root is not a directory"});
    return r;
  }
  auto jm = detail::read_json(mpath, r.diagnostics);
  if (!jm) return r;
  if (!jm->is_object() || !jm->contains("tasks") || !jm->at("tasks").is_array()) {
    r.diagnostics.push_back({mpath.string(), 0, 0, "manifest must be an object with a 'tasks' array"});
    return r;
  }
  Manifest m;
  m.root = root;
  if (jm->contains("name") && jm->at("name").is_string()) m.name = jm->at("name").get<std::string>();
  std::set<std::string> seen;
  for (const auto& jt : jm->at("tasks")) detail::load_task(root, jt, m.tasks, r.diagnostics, seen);
  if (r.diagnostics.empty()) r.manifest = std::move(m);
  return r;
}

}  // namespace ipa::bench

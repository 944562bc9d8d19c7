#pragma once

// Runs a submission directory against a loaded manifest for one task kind and
// produces a report with per-task records and corpus aggregates.
//
// Submission layout: `<dir>/<task_id>.ipa` for program tasks (D2P, T2P),
// `<dir>/<task_id>.txt` for text tasks (D2T, P2T). Image paths in a candidate
// program resolve against `<dir>/<task_id>/`, gold image paths against the
// task directory.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ipa/bench/image_io.hpp"
#include "ipa/bench/manifest.hpp"
#include "ipa/program_metrics.hpp"
#include "ipa/realisation_lang.hpp"
#include "ipa/text_metrics.hpp"

namespace ipa::bench {

enum class TaskKind { D2P, T2P, D2T, P2T };

inline std::string_view to_string(TaskKind k) {
  switch (k) {
    case TaskKind::D2P: return "D2P";
    case TaskKind::T2P: return "T2P";
    case TaskKind::D2T: return "D2T";
    case TaskKind::P2T: return "P2T";
  }
  return "?";
}

inline std::optional<TaskKind> parse_task_kind(std::string_view s) {
  if (s == "d2p" || s == "D2P") return TaskKind::D2P;
  if (s == "t2p" || s == "T2P") return TaskKind::T2P;
  if (s == "d2t" || s == "D2T") return TaskKind::D2T;
  if (s == "p2t" || s == "P2T") return TaskKind::P2T;
  return std::nullopt;
}

inline bool is_program_task(TaskKind k) { return k == TaskKind::D2P || k == TaskKind::T2P; }

enum class ReferenceField { steps, summary };

struct EvalConfig {
  SensitiveErrorConfig sensitive;
  MpoMode mpo_mode = MpoMode::literal;
  BleuConfig bleu;
  ReferenceField reference_field = ReferenceField::steps;

  void validate() const {
    sensitive.validate();
    bleu.validate();
  }
};

enum class TaskStatus { ok, missing, invalid, error };

inline std::string_view to_string(TaskStatus s) {
  switch (s) {
    case TaskStatus::ok: return "ok";
    case TaskStatus::missing: return "missing";
    case TaskStatus::invalid: return "invalid";
    case TaskStatus::error: return "error";
  }
  return "?";
}

struct TaskRecord {
  std::string task_id;
  TaskKind kind = TaskKind::D2P;
  TaskStatus status = TaskStatus::ok;
  std::vector<std::pair<std::string, double>> metrics;  // fixed order
  std::vector<std::string> diagnostics;

  std::optional<double> metric(std::string_view name) const {
    for (const auto& [k, v] : metrics)
      if (k == name) return v;
    return std::nullopt;
  }
};

struct Aggregates {
  std::optional<double> mae_strict;
  std::optional<double> mean_sensitive;
  std::optional<double> mean_mpo;
  std::optional<double> corpus_bleu;
  std::size_t tasks = 0;
  std::size_t scored = 0;
  std::size_t flagged = 0;
};

struct EvaluationReport {
  std::string manifest_name;
  TaskKind kind = TaskKind::D2P;
  EvalConfig config;
  std::vector<TaskRecord> tasks;  // ordered by task_id
  Aggregates aggregates;
};

namespace detail {

inline void append_program_metrics(TaskRecord& r, int strict, double sensitive, double mpo) {
  r.metrics = {{"strict", strict}, {"sensitive", sensitive}, {"mpo", mpo}};
}

inline void append_text_metrics(TaskRecord& r, const BleuResult& b) {
  r.metrics.clear();
  r.metrics.emplace_back("bleu", b.score);
  r.metrics.emplace_back("candidate_length", static_cast<double>(b.stats.candidate_length));
  r.metrics.emplace_back("reference_length", static_cast<double>(b.stats.reference_length));
  for (std::size_t n = 1; n <= b.stats.matches.size(); ++n) {
    r.metrics.emplace_back("match_" + std::to_string(n), static_cast<double>(b.stats.matches[n - 1]));
    r.metrics.emplace_back("total_" + std::to_string(n), static_cast<double>(b.stats.totals[n - 1]));
  }
}

inline TaskRecord evaluate_program_task(const TaskEntry& t, const fs::path& submissions, TaskKind kind,
                                        const EvalConfig& cfg) {
  TaskRecord r{t.task_id, kind, TaskStatus::ok, {}, {}};
  const fs::path cand_path = submissions / (t.task_id + ".ipa");
  auto fail = [&](TaskStatus s) {
    r.status = s;
    append_program_metrics(r, 1, 1.0, 0.0);
    return r;
  };

  auto src = read_source(cand_path.string());
  if (!src) {
    r.diagnostics.push_back(cand_path.string() + ": missing submission");
    return fail(TaskStatus::missing);
  }
  auto parsed = parse(*src);
  if (!parsed.ok()) {
    for (const auto& d : parsed.diagnostics) r.diagnostics.push_back(format_diagnostic(d, cand_path.string()));
    return fail(TaskStatus::invalid);
  }
  Process candidate = std::move(*parsed.process);
  candidate.id = t.task_id;
  Process gold = t.gold;

  if (cfg.sensitive.image_comparator != ImageComparator::iou) {
    for (const auto& m : resolve_image_pixels(gold, t.directory())) r.diagnostics.push_back("gold image: " + m);
    for (const auto& m : resolve_image_pixels(candidate, submissions / t.task_id))
      r.diagnostics.push_back("candidate image: " + m);
  }
  for (const auto& v : validate_process(candidate, t.environment))
    r.diagnostics.push_back(cand_path.string() + ":" + std::to_string(v.statement_index + 1) +
                            ": warning: environment violation: " + v.message);

  try {
    const auto res = compare_programs(candidate, gold, cfg.sensitive, cfg.mpo_mode);
    append_program_metrics(r, res.strict, res.sensitive, res.mpo);
  } catch (const MetricError& ex) {
    r.diagnostics.push_back(std::string("metric error: ") + ex.what());
    return fail(TaskStatus::error);
  }
  return r;
}

inline TaskRecord evaluate_text_task(const TaskEntry& t, const fs::path& submissions, TaskKind kind,
                                     const EvalConfig& cfg) {
  TaskRecord r{t.task_id, kind, TaskStatus::ok, {}, {}};
  const fs::path cand_path = submissions / (t.task_id + ".txt");
  auto text = slurp(cand_path);
  if (!text) {
    r.status = TaskStatus::missing;
    r.diagnostics.push_back(cand_path.string() + ": missing submission; excluded from BLEU");
    return r;
  }
  const std::string ref = cfg.reference_field == ReferenceField::steps ? t.steps_text() : t.summary;
  append_text_metrics(r, sentence_bleu(tokenize(*text), {tokenize(ref)}, cfg.bleu));
  return r;
}

}  // namespace detail

/// Aggregates recomputed from the records alone.
inline Aggregates compute_aggregates(const std::vector<TaskRecord>& records, TaskKind kind, const BleuConfig& bleu_cfg) {
  Aggregates a;
  a.tasks = records.size();
  for (const auto& r : records) {
    if (r.status == TaskStatus::ok) ++a.scored;
    else ++a.flagged;
  }
  if (is_program_task(kind)) {
    if (records.empty()) return a;
    double s = 0, e = 0, m = 0;
    for (const auto& r : records) {
      s += r.metric("strict").value_or(1.0);
      e += r.metric("sensitive").value_or(1.0);
      m += r.metric("mpo").value_or(0.0);
    }
    const double n = static_cast<double>(records.size());
    a.mae_strict = s / n;
    a.mean_sensitive = e / n;
    a.mean_mpo = m / n;
  } else {
    BleuStats total(bleu_cfg.max_n);
    bool any = false;
    for (const auto& r : records) {
      if (r.status != TaskStatus::ok) continue;
      BleuStats s(bleu_cfg.max_n);
      s.candidate_length = static_cast<std::size_t>(r.metric("candidate_length").value_or(0));
      s.reference_length = static_cast<std::size_t>(r.metric("reference_length").value_or(0));
      for (std::size_t n = 1; n <= bleu_cfg.max_n; ++n) {
        s.matches[n - 1] = static_cast<std::size_t>(r.metric("match_" + std::to_string(n)).value_or(0));
        s.totals[n - 1] = static_cast<std::size_t>(r.metric("total_" + std::to_string(n)).value_or(0));
      }
      total += s;
      any = true;
    }
    if (any) a.corpus_bleu = bleu_from_stats(total, bleu_cfg).score;
  }
  return a;
}

inline EvaluationReport evaluate_run(const Manifest& m, const fs::path& submissions, TaskKind kind,
                                     const EvalConfig& cfg = {}) {
  cfg.validate();
  EvaluationReport rep;
  rep.manifest_name = m.name;
  rep.kind = kind;
  rep.config = cfg;
  std::vector<const TaskEntry*> order;
  for (const auto& t : m.tasks) order.push_back(&t);
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->task_id < b->task_id; });
  for (const auto* t : order)
    rep.tasks.push_back(is_program_task(kind) ? detail::evaluate_program_task(*t, submissions, kind, cfg)
                                              : detail::evaluate_text_task(*t, submissions, kind, cfg));
  rep.aggregates = compute_aggregates(rep.tasks, kind, cfg.bleu);
  return rep;
}

// ---------------------------------------------------------------------------
// Report output

enum class ReportFormat { json, csv };

inline std::optional<ReportFormat> parse_report_format(std::string_view s) {
  if (s == "json") return ReportFormat::json;
  if (s == "csv") return ReportFormat::csv;
  return std::nullopt;
}

namespace detail {

// Shortest representation that round-trips.
inline std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline nlohmann::ordered_json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace detail

inline nlohmann::ordered_json config_to_json(const EvalConfig& cfg) {
  nlohmann::ordered_json j;
  j["image_comparator"] = to_string(cfg.sensitive.image_comparator);
  j["iou_threshold"] = cfg.sensitive.iou_threshold;
  j["mse_threshold"] = cfg.sensitive.mse_threshold;
  j["ssim_threshold"] = cfg.sensitive.ssim_threshold;
  j["ssim_k1"] = cfg.sensitive.ssim_k1;
  j["ssim_k2"] = cfg.sensitive.ssim_k2;
  j["ssim_dynamic_range"] = cfg.sensitive.ssim_dynamic_range;
  j["mpo_mode"] = to_string(cfg.mpo_mode);
  j["bleu_max_n"] = cfg.bleu.max_n;
  j["bleu_weights"] = cfg.bleu.effective_weights();
  j["bleu_smoothing"] = cfg.bleu.zero_precision_policy == ZeroPrecisionPolicy::score_zero ? "zero" : "epsilon";
  j["bleu_epsilon"] = cfg.bleu.epsilon;
  j["reference_field"] = cfg.reference_field == ReferenceField::steps ? "steps" : "summary";
  return j;
}

inline nlohmann::ordered_json report_to_json(const EvaluationReport& rep) {
  nlohmann::ordered_json j;
  j["manifest"] = rep.manifest_name;
  j["task_kind"] = to_string(rep.kind);
  j["config"] = config_to_json(rep.config);
  j["tasks"] = nlohmann::ordered_json::array();
  for (const auto& r : rep.tasks) {
    nlohmann::ordered_json t;
    t["task_id"] = r.task_id;
    t["task_kind"] = to_string(r.kind);
    t["status"] = to_string(r.status);
    t["metrics"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.metrics) t["metrics"][k] = v;
    t["diagnostics"] = r.diagnostics;
    j["tasks"].push_back(std::move(t));
  }
  const auto& a = rep.aggregates;
  j["aggregates"] = {{"tasks", a.tasks},
                     {"scored", a.scored},
                     {"flagged", a.flagged},
                     {"mae_strict", detail::optional_number(a.mae_strict)},
                     {"mean_sensitive", detail::optional_number(a.mean_sensitive)},
                     {"mean_mpo", detail::optional_number(a.mean_mpo)},
                     {"corpus_bleu", detail::optional_number(a.corpus_bleu)}};
  return j;
}

/// One row per (task, metric).
inline std::string report_to_csv(const EvaluationReport& rep) {
  std::string out = "task_id,task_kind,status,metric,value\n";
  for (const auto& r : rep.tasks)
    for (const auto& [k, v] : r.metrics)
      out += detail::csv_field(r.task_id) + ',' + std::string(to_string(r.kind)) + ',' +
             std::string(to_string(r.status)) + ',' + k + ',' + detail::format_number(v) + '\n';
  return out;
}

inline std::string render_report(const EvaluationReport& rep, ReportFormat format) {
  return format == ReportFormat::json ? report_to_json(rep).dump(2) + "\n" : report_to_csv(rep);
}

inline void write_report(const EvaluationReport& rep, ReportFormat format, const fs::path& dest) {
  std::ofstream out(dest, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report to '" + dest.string() + "'");
  out << render_report(rep, format);
  if (!out) throw std::runtime_error("write failed for '" + dest.string() + "'");
}

}  // namespace ipa::bench

// ipa-eval: command-line front end for the process metrics and the benchmark harness.
//
// Exit codes: 0 success, 1 validation/parse/evaluation failure, 2 usage error.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ipa/ipa.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

struct Failure {
  std::string message;
};

struct UsageError {
  std::string message;
};

template <class Config>
void check_config(const Config& cfg) {
  try {
    cfg.validate();
  } catch (const std::invalid_argument& ex) {
    throw UsageError{ex.what()};
  }
}

ipa::Process load_program(const fs::path& path, const std::string& id) {
  auto src = ipa::read_source(path.string());
  if (!src) throw Failure{path.string() + ": cannot read file"};
  auto res = ipa::parse(*src);
  if (!res.ok()) {
    std::string msg;
    for (const auto& d : res.diagnostics) msg += ipa::format_diagnostic(d, path.string()) + "\n";
    msg.pop_back();
    throw Failure{msg};
  }
  res.process->id = id;
  return std::move(*res.process);
}

// A single .ipa file or a directory of them (ids are file stems).
std::vector<std::pair<ipa::Process, fs::path>> load_programs(const fs::path& path) {
  std::vector<std::pair<ipa::Process, fs::path>> out;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path))
      if (e.is_regular_file() && e.path().extension() == ".ipa") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) out.emplace_back(load_program(f, f.stem().string()), f.parent_path() / f.stem());
  } else {
    out.emplace_back(load_program(path, "program"), path.parent_path());
  }
  return out;
}

struct ProgramOptions {
  std::string candidate, gold;
  std::vector<std::string> metrics{"strict", "sensitive", "mpo"};
  std::string mpo_mode = "literal";
  std::string comparator = "iou";
  ipa::SensitiveErrorConfig sensitive;
};

int run_program(const ProgramOptions& o) {
  ipa::SensitiveErrorConfig cfg = o.sensitive;
  cfg.image_comparator = *ipa::parse_image_comparator(o.comparator);
  check_config(cfg);
  const auto mode = *ipa::parse_mpo_mode(o.mpo_mode);
  const std::set<std::string> wanted(o.metrics.begin(), o.metrics.end());

  auto cands = load_programs(o.candidate);
  auto golds = load_programs(o.gold);
  const bool corpus = fs::is_directory(o.candidate) || fs::is_directory(o.gold);
  if (corpus && !(fs::is_directory(o.candidate) && fs::is_directory(o.gold)))
    throw Failure{"--candidate and --gold must both be files or both be directories"};

  if (cfg.image_comparator != ipa::ImageComparator::iou) {
    // In corpus mode images resolve against <dir>/<id>/, otherwise next to the file.
    for (auto* set : {&cands, &golds})
      for (auto& [p, base] : *set)
        for (const auto& m : ipa::bench::resolve_image_pixels(p, base)) std::cerr << "warning: " << m << "\n";
  }

  ipa::ProgramCorpus cc, gc;
  for (auto& [p, _] : cands) cc.add(p);
  for (auto& [p, _] : golds) gc.add(p);

  ordered_json out;
  out["programs"] = ordered_json::array();
  double e = 0, m = 0;
  for (const auto& [c, gp] : ipa::pair_by_id(cc, gc)) {
    const ipa::Process& g = *gp;
    ordered_json rec;
    rec["id"] = *g.id;
    if (wanted.count("strict")) rec["strict"] = ipa::strict_error(*c, g);
    if (wanted.count("sensitive")) {
      const auto r = ipa::sensitive_error(*c, g, cfg);
      rec["sensitive"] = r.value;
      rec["sensitive_units"] = {{"errors", r.error_units}, {"total", r.total_units}};
      e += r.value;
    }
    if (wanted.count("mpo")) {
      rec["mpo"] = ipa::mpo(*c, g, mode);
      m += ipa::mpo(*c, g, mode);
    }
    out["programs"].push_back(rec);
  }
  if (wanted.count("strict")) out["mae_strict"] = ipa::mae_strict(cc, gc);
  const double n = static_cast<double>(gc.size());
  if (wanted.count("sensitive")) out["mean_sensitive"] = e / n;
  if (wanted.count("mpo")) {
    out["mean_mpo"] = m / n;
    out["mpo_mode"] = ipa::to_string(mode);
  }
  std::cout << out.dump(2) << "\n";
  return kOk;
}

struct TextOptions {
  std::string candidates, references;
  std::size_t max_n = 4;
  std::string smoothing = "zero";
  double epsilon = 1e-9;
};

int run_text(const TextOptions& o) {
  ipa::BleuConfig cfg;
  cfg.max_n = o.max_n;
  cfg.zero_precision_policy =
      o.smoothing == "zero" ? ipa::ZeroPrecisionPolicy::score_zero : ipa::ZeroPrecisionPolicy::epsilon_smoothing;
  cfg.epsilon = o.epsilon;
  check_config(cfg);
  const auto cands = ipa::load_candidates_jsonl(o.candidates);
  const auto refs = ipa::load_references_jsonl(o.references);
  const auto r = ipa::bleu(cands, refs, cfg);
  ordered_json out;
  out["bleu"] = r.score;
  out["brevity_penalty"] = r.brevity_penalty;
  out["precisions"] = r.precisions;
  out["candidate_length"] = r.stats.candidate_length;
  out["reference_length"] = r.stats.reference_length;
  out["max_n"] = cfg.max_n;
  out["smoothing"] = o.smoothing;
  std::cout << out.dump(2) << "\n";
  return kOk;
}

int print_diagnostics(const std::vector<ipa::bench::Diagnostic>& diags) {
  for (const auto& d : diags) std::cerr << d.str() << "\n";
  return diags.empty() ? kOk : kFailure;
}

struct BenchOptions {
  std::string manifest, submissions, task, out, format = "json";
  std::string mpo_mode = "literal";
  std::string comparator = "iou";
  std::string reference_field = "steps";
  std::size_t max_n = 4;
  std::string smoothing = "zero";
  ipa::SensitiveErrorConfig sensitive;
};

int run_bench(const BenchOptions& o) {
  auto loaded = ipa::bench::load_manifest(o.manifest);
  if (!loaded.ok()) return print_diagnostics(loaded.diagnostics);
  ipa::bench::EvalConfig cfg;
  cfg.sensitive = o.sensitive;
  cfg.sensitive.image_comparator = *ipa::parse_image_comparator(o.comparator);
  cfg.mpo_mode = *ipa::parse_mpo_mode(o.mpo_mode);
  cfg.bleu.max_n = o.max_n;
  cfg.bleu.zero_precision_policy =
      o.smoothing == "zero" ? ipa::ZeroPrecisionPolicy::score_zero : ipa::ZeroPrecisionPolicy::epsilon_smoothing;
  cfg.reference_field = o.reference_field == "summary" ? ipa::bench::ReferenceField::summary
                                                       : ipa::bench::ReferenceField::steps;
  check_config(cfg);
  const auto kind = *ipa::bench::parse_task_kind(o.task);
  const auto rep = ipa::bench::evaluate_run(*loaded.manifest, o.submissions, kind, cfg);
  ipa::bench::write_report(rep, *ipa::bench::parse_report_format(o.format), o.out);
  const auto& a = rep.aggregates;
  std::cerr << "evaluated " << a.tasks << " tasks (" << a.flagged << " flagged)\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evaluation toolkit for process automation programs and descriptions"};
  app.require_subcommand(1);

  ProgramOptions po;
  auto* program = app.add_subcommand("program", "Compare candidate program(s) against gold program(s)");
  program->add_option("--candidate", po.candidate, "Candidate .ipa file or directory")->required();
  program->add_option("--gold", po.gold, "Gold .ipa file or directory")->required();
  program->add_option("--metrics", po.metrics, "Metrics to report")
      ->delimiter(',')
      ->check(CLI::IsMember({"strict", "sensitive", "mpo"}));
  program->add_option("--mpo-mode", po.mpo_mode)->check(CLI::IsMember({"literal", "gold"}));
  program->add_option("--image-comparator", po.comparator)->check(CLI::IsMember({"iou", "mse", "ssim"}));
  program->add_option("--iou-threshold", po.sensitive.iou_threshold);
  program->add_option("--mse-threshold", po.sensitive.mse_threshold);
  program->add_option("--ssim-threshold", po.sensitive.ssim_threshold);

  TextOptions to;
  auto* text = app.add_subcommand("text", "Corpus BLEU of candidate descriptions");
  text->add_option("--candidates", to.candidates, "JSON Lines with {id, candidate}")->required();
  text->add_option("--references", to.references, "JSON Lines with {id, references}")->required();
  text->add_option("--max-n", to.max_n)->check(CLI::PositiveNumber);
  text->add_option("--smoothing", to.smoothing)->check(CLI::IsMember({"zero", "epsilon"}));
  text->add_option("--epsilon", to.epsilon);

  BenchOptions bo;
  auto* bench = app.add_subcommand("bench", "Evaluate a submission directory against a benchmark");
  bench->add_option("--manifest", bo.manifest, "Benchmark root directory")->required();
  bench->add_option("--submissions", bo.submissions, "Submission directory")->required();
  bench->add_option("--task", bo.task)->required()->check(CLI::IsMember({"d2p", "t2p", "d2t", "p2t"}));
  bench->add_option("--out", bo.out, "Report destination")->required();
  bench->add_option("--format", bo.format)->check(CLI::IsMember({"json", "csv"}));
  bench->add_option("--mpo-mode", bo.mpo_mode)->check(CLI::IsMember({"literal", "gold"}));
  bench->add_option("--image-comparator", bo.comparator)->check(CLI::IsMember({"iou", "mse", "ssim"}));
  bench->add_option("--reference-field", bo.reference_field)->check(CLI::IsMember({"steps", "summary"}));
  bench->add_option("--max-n", bo.max_n)->check(CLI::PositiveNumber);
  bench->add_option("--smoothing", bo.smoothing)->check(CLI::IsMember({"zero", "epsilon"}));
  bench->add_option("--iou-threshold", bo.sensitive.iou_threshold);
  bench->add_option("--mse-threshold", bo.sensitive.mse_threshold);
  bench->add_option("--ssim-threshold", bo.sensitive.ssim_threshold);

  std::uint64_t seed = 0;
  std::size_t per_category = 10;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-fixtures", "Generate a synthetic benchmark");
  gen->add_option("--seed", seed)->required();
  gen->add_option("--per-category", per_category)->required()->check(CLI::PositiveNumber);
  gen->add_option("--out", gen_out)->required();

  std::string validate_root;
  auto* validate = app.add_subcommand("validate", "Check a benchmark directory");
  validate->add_option("--manifest", validate_root)->required();

  std::string export_root, export_out;
  auto* exp = app.add_subcommand("export-gold", "Write the gold programs and texts as a submission directory");
  exp->add_option("--manifest", export_root)->required();
  exp->add_option("--out", export_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*program) return run_program(po);
    if (*text) return run_text(to);
    if (*bench) return run_bench(bo);
    if (*gen) {
      ipa::bench::generate_fixtures(gen_out, seed, per_category);
      std::cerr << "wrote " << 10 * per_category << " tasks to " << gen_out << "\n";
      return kOk;
    }
    if (*validate) {
      auto r = ipa::bench::load_manifest(validate_root);
      if (r.ok()) std::cout << "ok: " << r.manifest->tasks.size() << " tasks\n";
      return print_diagnostics(r.diagnostics);
    }
    if (*exp) {
      auto r = ipa::bench::load_manifest(export_root);
      if (!r.ok()) return print_diagnostics(r.diagnostics);
      ipa::bench::export_gold_submissions(*r.manifest, export_out);
      return kOk;
    }
  } catch (const Failure& f) {
    std::cerr << f.message << "\n";
    return kFailure;
  } catch (const UsageError& u) {
    std::cerr << "usage error: " << u.message << "\n";
    return kUsage;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

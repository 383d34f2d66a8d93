#include "cptrie/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cptrie/calibrate.hpp"
#include "cptrie/corpus_ingest.hpp"
#include "cptrie/cp_trie.hpp"
#include "cptrie/dist_io.hpp"
#include "cptrie/error.hpp"
#include "cptrie/metrics.hpp"
#include "cptrie/parallel.hpp"
#include "cptrie/report.hpp"
#include "cptrie/samplers.hpp"

namespace cptrie {
namespace {

namespace fs = std::filesystem;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Sidecar written next to every output file; carries the only
// non-deterministic fields (timestamp, duration).
class RunManifest {
 public:
  RunManifest(std::string command, const std::vector<std::string>& args)
      : command_(std::move(command)), started_(std::chrono::steady_clock::now()) {
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t i = 1; i < args.size(); ++i) {
      h = fnv1a(args[i], h);
      h = fnv1a(std::string_view("\0", 1), h);
    }
    config_hash_ = hex64(h);
  }

  void add_input(const fs::path& path) { inputs_.push_back(path.string()); }
  void warn(std::string message) { warnings_.push_back(std::move(message)); }
  const std::vector<std::string>& warnings() const { return warnings_; }

  void write_for(const fs::path& output) const {
    const auto elapsed = std::chrono::steady_clock::now() - started_;
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    nlohmann::ordered_json j;
    j["command"] = command_;
    j["inputs"] = inputs_;
    j["config_hash"] = config_hash_;
    j["tool_version"] = CPTRIE_VERSION;
    j["finished_at"] = stamp;
    j["duration_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
    j["warnings"] = warnings_;
    write_text(fs::path(output.string() + ".manifest.json"), j.dump(2) + "\n");
  }

 private:
  std::string command_;
  std::chrono::steady_clock::time_point started_;
  std::string config_hash_;
  std::vector<std::string> inputs_;
  std::vector<std::string> warnings_;
};

std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& input : inputs) {
    const fs::path p(input);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.is_regular_file()) found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::is_regular_file(p)) {
      files.push_back(p);
    } else {
      throw Error(ErrorCode::io, "no such input: " + input);
    }
  }
  return files;
}

struct Document {
  std::string source_id;
  std::string text;
};

std::vector<Document> load_documents(const std::vector<std::string>& inputs, bool manifest_mode) {
  std::vector<Document> docs;
  for (const auto& file : expand_inputs(inputs)) {
    std::string text = read_text(file);
    if (!manifest_mode) {
      docs.push_back({file.string(), std::move(text)});
      continue;
    }
    std::istringstream lines(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(lines, line)) {
      ++n;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      docs.push_back({file.string() + ":" + std::to_string(n), line});
    }
  }
  return docs;
}

void warn_all(std::ostream& err, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

void check_nodes_against_trie(const CpTrie& trie, const std::vector<EvaluationNode>& nodes) {
  for (const auto& node : nodes) {
    const auto id = trie.node_at(node.prefix_words);
    if (!id) throw Error(ErrorCode::missing_record, "prefix \"" + node.prefix_id + "\" does not resolve in the trie");
    if (support_of(trie, *id) != node.support)
      throw Error(ErrorCode::schema, "prefix \"" + node.prefix_id + "\": support differs from the trie");
  }
}

struct EvalInputs {
  std::string trie;
  std::string nodes;
  std::string dists;
};

void add_eval_inputs(CLI::App* cmd, EvalInputs& in) {
  cmd->add_option("--trie", in.trie, "Trie JSON")->required()->check(CLI::ExistingFile);
  cmd->add_option("--nodes", in.nodes, "Evaluation nodes JSONL")->required()->check(CLI::ExistingFile);
  cmd->add_option("--dists", in.dists, "Distribution records JSONL")->required()->check(CLI::ExistingFile);
}

struct Loaded {
  std::vector<EvaluationNode> nodes;
  std::vector<DistributionRecord> records;
  RecordIndex index;
};

Loaded load_eval_inputs(const EvalInputs& in, RunManifest& manifest) {
  Loaded loaded;
  const CpTrie trie = load_trie(in.trie);
  loaded.nodes = load_nodes(in.nodes);
  check_nodes_against_trie(trie, loaded.nodes);
  loaded.records = load_records(in.dists);
  loaded.index = index_by_prefix(loaded.records);
  for (const auto& r : loaded.records) {
    const auto diag = full_entropy_check(r);
    if (!diag.ok) manifest.warn(diag.message);
  }
  manifest.add_input(in.trie);
  manifest.add_input(in.nodes);
  manifest.add_input(in.dists);
  return loaded;
}

Method method_option(const std::string& name) {
  if (const auto m = parse_method(name)) return *m;
  throw Error(ErrorCode::invalid_argument, "unknown method '" + name + "'");
}

int exit_code_for(const Error& e) {
  switch (e.category()) {
    case ErrorCategory::usage: return kExitUsage;
    case ErrorCategory::data: return kExitData;
    case ErrorCategory::protocol: return kExitProtocol;
  }
  return kExitData;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"CP-Trie toolkit: build a context-preserving trie and score truncation sampling against it"};
  app.set_version_flag("--version", CPTRIE_VERSION);
  app.require_subcommand(1);

  const std::string method_names = "top_k, top_p, eta, mirostat, adaptive";

  // build-trie
  struct {
    std::vector<std::string> input;
    std::string wordlist, out, config;
    bool manifest = false, pretty = false;
  } build;
  auto* cmd_build = app.add_subcommand("build-trie", "Ingest a corpus and write the trie JSON; prints stats");
  cmd_build->add_option("--input", build.input, "Corpus file or directory (repeatable)")->required();
  cmd_build->add_option("--wordlist", build.wordlist, "Word list, one word per line")->required()->check(CLI::ExistingFile);
  cmd_build->add_option("--out", build.out, "Output trie JSON")->required();
  cmd_build->add_option("--config", build.config, "Ingest config (key = value)")->check(CLI::ExistingFile);
  cmd_build->add_flag("--manifest", build.manifest, "Treat every line of each input file as a separate document");
  cmd_build->add_flag("--pretty", build.pretty, "Indent the trie JSON");

  // stats
  struct {
    std::string trie;
    std::uint64_t articles = 0;
  } stats;
  auto* cmd_stats = app.add_subcommand("stats", "Print trie statistics as JSON");
  cmd_stats->add_option("--trie", stats.trie, "Trie JSON")->required()->check(CLI::ExistingFile);
  cmd_stats->add_option("--articles", stats.articles, "Article count to report");

  // select-nodes
  struct {
    std::string trie, out;
    std::size_t roots = 10, children = 2, max_depth = 6;
  } select;
  auto* cmd_select = app.add_subcommand("select-nodes", "Select the evaluation prefixes");
  cmd_select->add_option("--trie", select.trie, "Trie JSON")->required()->check(CLI::ExistingFile);
  cmd_select->add_option("--roots", select.roots, "Sentence-starting subtrees to keep")
      ->capture_default_str()->check(CLI::PositiveNumber);
  cmd_select->add_option("--children", select.children, "Children kept per node")
      ->capture_default_str()->check(CLI::PositiveNumber);
  cmd_select->add_option("--max-depth", select.max_depth, "Deepest prefix length")
      ->capture_default_str()->check(CLI::PositiveNumber);
  cmd_select->add_option("--out", select.out, "Output nodes JSONL")->required();

  // export-toy
  struct {
    std::string trie, nodes, out;
  } toy;
  auto* cmd_toy = app.add_subcommand("export-toy", "Write trie-derived distributions for the selected nodes");
  cmd_toy->add_option("--trie", toy.trie, "Trie JSON")->required()->check(CLI::ExistingFile);
  cmd_toy->add_option("--nodes", toy.nodes, "Evaluation nodes JSONL")->required()->check(CLI::ExistingFile);
  cmd_toy->add_option("--out", toy.out, "Output distributions JSONL")->required();

  // validate-dists
  std::string validate_path;
  auto* cmd_validate = app.add_subcommand("validate-dists", "Validate a distributions JSONL file");
  cmd_validate->add_option("--dists", validate_path, "Distributions JSONL")->required()->check(CLI::ExistingFile);

  // evaluate
  EvalInputs eval_in;
  struct {
    std::string method, out;
    double param = 0.0;
  } eval;
  auto* cmd_eval = app.add_subcommand("evaluate", "Score one method at one parameter value");
  add_eval_inputs(cmd_eval, eval_in);
  cmd_eval->add_option("--method", eval.method, method_names)->required();
  cmd_eval->add_option("--param", eval.param, "Truncation parameter")->required();
  cmd_eval->add_option("--out", eval.out, "Output report JSON")->required();

  // calibrate
  EvalInputs cal_in;
  struct {
    std::string method, out;
    double target = 1.0, tolerance = 0.1;
    std::size_t grid = 2000, refinements = 4;
    std::vector<double> range;
  } cal;
  auto* cmd_cal = app.add_subcommand("calibrate", "Find the parameter reaching a target average risk");
  add_eval_inputs(cmd_cal, cal_in);
  cmd_cal->add_option("--method", cal.method, method_names)->required();
  cmd_cal->add_option("--target-risk", cal.target, "Target average risk")->required();
  cmd_cal->add_option("--tolerance", cal.tolerance, "Feasibility band around the target")->capture_default_str();
  cmd_cal->add_option("--grid", cal.grid, "Grid points per round")->capture_default_str()->check(CLI::Range(2, 1000000));
  cmd_cal->add_option("--refinements", cal.refinements, "Maximum refinement rounds")->capture_default_str();
  cmd_cal->add_option("--range", cal.range, "Parameter range lo,hi")->delimiter(',')->expected(2);
  cmd_cal->add_option("--out", cal.out, "Output calibration JSON")->required();

  // correlate
  EvalInputs corr_in;
  std::string corr_csv;
  auto* cmd_corr = app.add_subcommand("correlate", "Pearson correlation between entropy and k*; writes scatter CSV");
  add_eval_inputs(cmd_corr, corr_in);
  cmd_corr->add_option("--out", corr_csv, "Scatter CSV")->required();

  // report
  struct {
    std::vector<std::string> in;
    std::string format = "markdown", out;
  } rep;
  auto* cmd_report = app.add_subcommand("report", "Render reports as a table");
  cmd_report->add_option("--in", rep.in, "Report or calibration JSON (repeatable)")->required()->check(CLI::ExistingFile);
  cmd_report->add_option("--format", rep.format, "markdown or csv")
      ->capture_default_str()->check(CLI::IsMember({"markdown", "csv"}));
  cmd_report->add_option("--out", rep.out, "Write the table here instead of standard output");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*cmd_build) {
      RunManifest manifest("build-trie", args);
      const WordList words = load_word_list(build.wordlist);
      IngestConfig config = build.config.empty() ? IngestConfig{} : load_ingest_config(build.config);
      const Ingestor ingestor(words, std::move(config));
      const std::vector<Document> docs = load_documents(build.input, build.manifest);
      for (const auto& d : docs) manifest.add_input(d.source_id);

      std::vector<std::vector<SentenceTokens>> per_doc(docs.size());
      std::vector<IngestCounters> counters(docs.size());
      parallel_for(docs.size(), [&](std::size_t i) { per_doc[i] = ingestor.ingest(docs[i].text, docs[i].source_id, counters[i]); });
      IngestCounters total;
      CpTrie trie;
      for (std::size_t i = 0; i < docs.size(); ++i) {
        total += counters[i];
        for (const auto& s : per_doc[i]) trie.insert(s);
      }
      if (total.accepted == 0) throw Error(ErrorCode::empty_corpus, "no sentences accepted from the input");

      manifest.warn("sentences: total " + std::to_string(total.total) + ", accepted " + std::to_string(total.accepted) +
                    ", rejected unknown_word " + std::to_string(total.unknown_word) + ", heading " +
                    std::to_string(total.heading) + ", digit " + std::to_string(total.digit));
      save_trie(trie, build.out, SerializeOptions{build.pretty});
      manifest.write_for(build.out);
      out << stats_to_json(compute_stats(trie, total.documents)) << '\n';
      return kExitOk;
    }

    if (*cmd_stats) {
      out << stats_to_json(compute_stats(load_trie(stats.trie), stats.articles)) << '\n';
      return kExitOk;
    }

    if (*cmd_select) {
      RunManifest manifest("select-nodes", args);
      manifest.add_input(select.trie);
      const CpTrie trie = load_trie(select.trie);
      const Selection selection =
          select_evaluation_nodes(trie, SelectionOptions{select.roots, select.children, select.max_depth});
      for (const auto& w : selection.warnings) manifest.warn(w);
      warn_all(err, selection.warnings);
      std::ostringstream buf;
      write_nodes_jsonl(selection.nodes, buf);
      write_text(select.out, buf.str());
      manifest.write_for(select.out);
      out << selection.nodes.size() << " evaluation nodes\n";
      return kExitOk;
    }

    if (*cmd_toy) {
      RunManifest manifest("export-toy", args);
      manifest.add_input(toy.trie);
      manifest.add_input(toy.nodes);
      const CpTrie trie = load_trie(toy.trie);
      const auto nodes = load_nodes(toy.nodes);
      const auto records = toy_lm_export(trie, nodes);
      std::ostringstream buf;
      write_records(records, buf);
      write_text(toy.out, buf.str());
      manifest.write_for(toy.out);
      out << records.size() << " records\n";
      return kExitOk;
    }

    if (*cmd_validate) {
      const auto records = load_records(validate_path);
      std::size_t bad = 0;
      for (const auto& r : records) {
        const auto diag = full_entropy_check(r);
        if (!diag.ok) {
          ++bad;
          err << diag.message << '\n';
        }
      }
      out << records.size() << " records, " << bad << " entropy diagnostics\n";
      if (bad > 0) return kExitData;
      return kExitOk;
    }

    if (*cmd_eval) {
      RunManifest manifest("evaluate", args);
      const SamplerConfig config{method_option(eval.method), eval.param};
      check_theta(config);
      const Loaded loaded = load_eval_inputs(eval_in, manifest);
      const PreparedSet prepared = prepare_nodes(loaded.nodes, loaded.index);
      const AggregateReport report = evaluate(prepared, config);
      for (const auto& e : report.excluded_nodes) manifest.warn("excluded \"" + e.prefix_id + "\" (" + e.reason + ")");
      if (report.degenerate_zipf_fallbacks > 0)
        manifest.warn(std::to_string(report.degenerate_zipf_fallbacks) + " degenerate Zipf fit(s) scored at full size");
      warn_all(err, manifest.warnings());
      write_text(eval.out, report_to_json(report) + "\n");
      manifest.write_for(eval.out);
      out << render_table({ReportRow{report.method, report.theta, report.average_risk, report.rse, report.average_recall}},
                          TableFormat::markdown);
      return kExitOk;
    }

    if (*cmd_cal) {
      RunManifest manifest("calibrate", args);
      CalibrationSpec spec;
      spec.method = method_option(cal.method);
      spec.target_risk = cal.target;
      spec.tolerance = cal.tolerance;
      spec.grid_points = cal.grid;
      spec.max_refinements = cal.refinements;
      if (!cal.range.empty()) spec.range = ParameterRange{cal.range[0], cal.range[1]};
      const Loaded loaded = load_eval_inputs(cal_in, manifest);
      const PreparedSet prepared = prepare_nodes(loaded.nodes, loaded.index);
      const CalibrationResult result = calibrate(spec, prepared);
      for (const auto& w : result.warnings) manifest.warn(w);
      warn_all(err, manifest.warnings());
      write_text(cal.out, calibration_to_json(result) + "\n");
      manifest.write_for(cal.out);
      out << method_name(result.method) << " theta=" << format_number(result.theta)
          << " average_risk=" << format_number(result.achieved_risk) << " AR=" << format_number(result.achieved_ar)
          << " RSE=" << format_number(result.achieved_rse) << (result.feasible ? " feasible" : " infeasible") << '\n';
      return kExitOk;
    }

    if (*cmd_corr) {
      RunManifest manifest("correlate", args);
      const Loaded loaded = load_eval_inputs(corr_in, manifest);
      const PreparedSet prepared = prepare_nodes(loaded.nodes, loaded.index);
      const auto points = entropy_k_star_points(prepared);
      std::ostringstream csv;
      write_scatter_csv(points, csv);
      write_text(corr_csv, csv.str());
      manifest.write_for(corr_csv);
      out << "pearson_r=" << format_number(entropy_k_star_correlation(points)) << " n=" << points.size() << '\n';
      return kExitOk;
    }

    if (*cmd_report) {
      std::vector<ReportRow> rows;
      for (const auto& path : rep.in) rows.push_back(load_row(path));
      const std::string table =
          render_table(std::move(rows), rep.format == "csv" ? TableFormat::csv : TableFormat::markdown);
      if (rep.out.empty()) {
        out << table;
      } else {
        write_text(rep.out, table);
      }
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace cptrie

// arhscope command-line tool: verifies a model over the full compromise
// lattice, classifies the results into ARH sets, mines counterexample
// witnesses into event logs and process models, and renders run reports.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "arhscope/arh.hpp"
#include "arhscope/mining.hpp"
#include "arhscope/model_parser.hpp"
#include "arhscope/orchestrator.hpp"
#include "arhscope/report.hpp"

namespace fs = std::filesystem;
using namespace arhscope;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitModel = 2;
constexpr int kExitVerify = 3;

struct RunConfig {
  std::string model_path;
  std::string out_dir = "out";
  int jobs = 1;
  int max_sessions = -1;   // -1 = keep the model's bounds
  int max_trace_len = -1;
  int max_term_depth = -1;
  double delta_t = 1.0;
  bool no_filter = false;
  std::string format;      // csv|xes|dot; empty = all
  std::string property;    // restrict artifact emission to one SP
};

void add_common_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--model", cfg.model_path, "model file (JSON)")->required();
  cmd->add_option("--out", cfg.out_dir, "output directory");
  cmd->add_option("--jobs", cfg.jobs, "parallel verifier workers")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-sessions", cfg.max_sessions, "override max sessions per role");
  cmd->add_option("--max-trace-len", cfg.max_trace_len, "override max trace length");
  cmd->add_option("--max-term-depth", cfg.max_term_depth, "override max term depth");
  cmd->add_option("--delta-t", cfg.delta_t, "timestamp increment for mined logs");
  cmd->add_flag("--no-filter", cfg.no_filter, "keep initialization/tick activities in logs");
  cmd->add_option("--format", cfg.format, "restrict mined outputs to one format")
      ->check(CLI::IsMember({"csv", "xes", "dot"}));
  cmd->add_option("--property", cfg.property, "restrict to one security property");
}

AnaModel load_or_exit(const RunConfig& cfg) {
  if (!fs::exists(cfg.model_path)) {
    std::cerr << "error: file not found: " << cfg.model_path << "\n";
    std::exit(kExitModel);
  }
  try {
    AnaModel m = load_model(cfg.model_path);
    if (cfg.max_sessions > 0) m.bounds.max_sessions = cfg.max_sessions;
    if (cfg.max_trace_len > 0) m.bounds.max_trace_len = cfg.max_trace_len;
    if (cfg.max_term_depth > 0) m.bounds.max_term_depth = cfg.max_term_depth;
    if (!cfg.property.empty() && !m.find_property(cfg.property)) {
      std::cerr << "error: model has no property '" << cfg.property << "'\n";
      std::exit(kExitModel);
    }
    return m;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::exit(kExitModel);
  }
}

std::string cache_dir_for(const RunConfig& cfg) {
  if (const char* env = std::getenv("ARHSCOPE_CACHE")) return env;
  return cfg.out_dir + "/cache";
}

VerdictStore run_orchestration(const AnaModel& m, const RunConfig& cfg) {
  try {
    OrchestrateOptions o;
    o.jobs = cfg.jobs;
    o.cache_dir = cache_dir_for(cfg);
    fs::create_directories(cfg.out_dir);
    return orchestrate(m, m.bounds, o);
  } catch (const std::exception& e) {
    std::cerr << "error: verification failed: " << e.what() << "\n";
    std::exit(kExitVerify);
  }
}

bool selected(const RunConfig& cfg, const std::string& prop) {
  return cfg.property.empty() || cfg.property == prop;
}

// verify: orchestrate, persist the store, export Hasse diagrams, print the
// invocation count against the scenario count.
std::vector<std::string> emit_store(const AnaModel& m, const VerdictStore& store,
                                    const RunConfig& cfg) {
  std::vector<std::string> files;
  fs::create_directories(cfg.out_dir + "/store");
  for (const auto& sp : m.properties) {
    if (!selected(cfg, sp.name)) continue;
    std::string shard = "store/" + sp.name + ".jsonl";
    write_file(cfg.out_dir + "/" + shard, store_shard(store, m, sp.name));
    files.push_back(shard);
    std::string dot = "hasse_" + sp.name + ".dot";
    write_file(cfg.out_dir + "/" + dot, hasse_to_dot(store, m, sp.name));
    files.push_back(dot);
  }
  long long total = scenario_count(static_cast<int>(m.components.size()),
                                   static_cast<int>(m.properties.size()));
  std::cout << "verifier invocations: " << store.total_invocations() << " of " << total
            << " scenario checks (pruning ratio "
            << 1.0 - static_cast<double>(store.total_invocations()) / static_cast<double>(total)
            << ")\n";
  return files;
}

std::vector<std::string> emit_classification(const AnaModel& m, const VerdictStore& store,
                                             const ArhReport& arh, const RunConfig& cfg) {
  std::vector<std::string> files;
  write_file(cfg.out_dir + "/arh_report.json", arh_report_to_json(arh, m).dump(2) + "\n");
  files.push_back("arh_report.json");
  write_file(cfg.out_dir + "/arh_table.csv", arh_report_to_csv(arh, store, m));
  files.push_back("arh_table.csv");
  return files;
}

std::vector<std::string> emit_mining(const AnaModel& m, const VerdictStore& store,
                                     const RunConfig& cfg) {
  std::vector<std::string> files;
  TransformConfig tc;
  tc.delta_t = cfg.delta_t;
  if (cfg.no_filter) tc.activity_filter.clear();
  auto wants = [&](const std::string& f) { return cfg.format.empty() || cfg.format == f; };
  for (const auto& sp : m.properties) {
    if (!selected(cfg, sp.name)) continue;
    std::vector<TraceDag> dags;
    const auto& entries = store.entries.at(sp.name);
    for (uint64_t code = 0; code < entries.size(); ++code)
      if (entries[code].status == Status::Violated)
        for (const auto& w : entries[code].witnesses) dags.push_back(w);
    if (dags.empty())
      std::cerr << "warning: no violated scenarios for '" << sp.name
                << "'; emitting empty outputs\n";
    EventLog log = synthesize_log(dags, tc);
    Dfg dfg = discover_dfg(log);
    auto dep = dependency_graph(dfg, 0.0);
    if (wants("csv")) {
      write_file(cfg.out_dir + "/" + sp.name + ".csv", log_to_csv(log));
      files.push_back(sp.name + ".csv");
    }
    if (wants("xes")) {
      write_file(cfg.out_dir + "/" + sp.name + ".xes", log_to_xes(log));
      files.push_back(sp.name + ".xes");
    }
    if (wants("dot")) {
      write_file(cfg.out_dir + "/" + sp.name + "_dfg.dot", dfg_to_dot(dfg, sp.name + "_dfg"));
      files.push_back(sp.name + "_dfg.dot");
      write_file(cfg.out_dir + "/" + sp.name + "_dependency.dot",
                 dependency_to_dot(dep, sp.name + "_dependency"));
      files.push_back(sp.name + "_dependency.dot");
    }
  }
  return files;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"arhscope: attack-resilience analysis of automotive network architectures"};
  app.require_subcommand(1);

  RunConfig cfg;
  CLI::App* c_verify = app.add_subcommand("verify", "verify all compromise scenarios");
  CLI::App* c_classify = app.add_subcommand("classify", "compute ARH classification");
  CLI::App* c_mine = app.add_subcommand("mine", "mine witnesses into event logs and models");
  CLI::App* c_report = app.add_subcommand("report", "run the full pipeline and render a report");
  CLI::App* c_hasse = app.add_subcommand("export-hasse", "export the verdict lattice as DOT");
  for (CLI::App* c : {c_verify, c_classify, c_mine, c_report, c_hasse})
    add_common_flags(c, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  AnaModel m = load_or_exit(cfg);
  VerdictStore store = run_orchestration(m, cfg);

  try {
    if (c_verify->parsed()) {
      emit_store(m, store, cfg);
    } else if (c_hasse->parsed()) {
      for (const auto& sp : m.properties) {
        if (!selected(cfg, sp.name)) continue;
        write_file(cfg.out_dir + "/hasse_" + sp.name + ".dot", hasse_to_dot(store, m, sp.name));
      }
    } else if (c_classify->parsed()) {
      ArhReport arh = classify(store, m);
      std::vector<std::string> files = emit_classification(m, store, arh, cfg);
      nlohmann::json rj = run_report_json(m, store, arh, files);
      write_file(cfg.out_dir + "/report.html", run_report_html(rj));
    } else if (c_mine->parsed()) {
      emit_mining(m, store, cfg);
    } else if (c_report->parsed()) {
      ArhReport arh = classify(store, m);
      std::vector<std::string> files = emit_store(m, store, cfg);
      for (const auto& f : emit_classification(m, store, arh, cfg)) files.push_back(f);
      for (const auto& f : emit_mining(m, store, cfg)) files.push_back(f);
      nlohmann::json rj = run_report_json(m, store, arh, files);
      write_file(cfg.out_dir + "/report.json", rj.dump(2) + "\n");
      write_file(cfg.out_dir + "/report.html", run_report_html(rj));
      std::cout << "report written to " << cfg.out_dir << "/report.html\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerify;
  }
  return kExitOk;
}

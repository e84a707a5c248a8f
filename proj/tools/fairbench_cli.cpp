#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fairbench/calibrate.hpp"
#include "fairbench/config.hpp"
#include "fairbench/generator.hpp"
#include "fairbench/harness.hpp"
#include "fairbench/io.hpp"
#include "fairbench/measures.hpp"
#include "fairbench/split.hpp"

namespace fs = std::filesystem;
using namespace fairbench;

namespace {

// Options shared by commands that build a GenConfig.
struct GenArgs {
  std::string preset;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n;
  std::optional<double> alpha;
  std::optional<double> beta;

  void attach(CLI::App* app, bool with_beta = true) {
    app->add_option("--preset", preset, "opinion | friendship | collab");
    app->add_option("--config", config, "key = value file");
    app->add_option("--seed", seed, "generator seed");
    app->add_option("--n", n, "number of nodes");
    app->add_option("--alpha", alpha, "fraction of nodes in group 0");
    if (with_beta) app->add_option("--beta", beta, "homophily strength");
  }
};

// Entries from --config, with --preset applied first so the file overrides it.
std::vector<ConfigEntry> config_entries(const GenArgs& a) {
  std::vector<ConfigEntry> entries;
  if (!a.preset.empty()) entries.push_back({"preset", a.preset, 0});
  if (!a.config.empty()) {
    auto file = read_config_file(a.config);
    entries.insert(entries.end(), file.begin(), file.end());
  }
  return entries;
}

void apply_overrides(GenConfig& c, const GenArgs& a) {
  if (a.seed) c.seed = *a.seed;
  if (a.n) c.n = *a.n;
  if (a.alpha) c.alpha = *a.alpha;
  if (a.beta) c.beta = *a.beta;
}

std::pair<GenConfig, RunOptions> gen_and_run_config(const GenArgs& a, bool allow_run_keys) {
  GenConfig c;
  RunOptions run;
  auto entries = config_entries(a);
  for (const auto& e : entries) {
    if (e.key == "preset") apply_gen_key(c, e);
  }
  for (const auto& e : entries) {
    if (e.key == "preset" || apply_gen_key(c, e)) continue;
    if (allow_run_keys && apply_run_key(run, e)) continue;
    throw InputError("config line " + std::to_string(e.line) + ": unknown key '" + e.key + "'");
  }
  apply_overrides(c, a);
  c.validate();
  return {c, run};
}

// Writes to `path`, or stdout when empty or "-".
template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  if (auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  fn(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic fairness benchmark for link prediction"};
  app.require_subcommand(1);

  // generate
  auto* gen_cmd = app.add_subcommand("generate", "Generate one graph and write edge and label files");
  GenArgs gen_args;
  gen_args.attach(gen_cmd);
  std::string gen_out = ".";
  gen_cmd->add_option("--out", gen_out, "output directory (edges.csv, labels.csv)");

  // profile
  auto* prof_cmd = app.add_subcommand("profile", "Compute the bias profile of a graph");
  std::string prof_edges, prof_labels, prof_out;
  int info_steps = 5;
  prof_cmd->add_option("--edges", prof_edges, "edge CSV")->required();
  prof_cmd->add_option("--labels", prof_labels, "label CSV")->required();
  prof_cmd->add_option("--info-steps", info_steps, "random-walk steps for info_unfairness");
  prof_cmd->add_option("--out", prof_out, "output CSV (default stdout)");

  // split
  auto* split_cmd = app.add_subcommand("split", "Split a graph's edges into train and test files");
  std::string split_edges_file, split_labels_file, split_out = ".";
  std::size_t split_id = 0;
  std::uint64_t split_seed = 0;
  double ratio = 0.8;
  split_cmd->add_option("--edges", split_edges_file, "edge CSV")->required();
  split_cmd->add_option("--labels", split_labels_file, "label CSV")->required();
  split_cmd->add_option("--split-id", split_id, "split index");
  split_cmd->add_option("--seed", split_seed, "split seed");
  split_cmd->add_option("--ratio", ratio, "training fraction");
  split_cmd->add_option("--out", split_out, "output directory (train.csv, test.csv)");

  // run
  auto* run_cmd = app.add_subcommand("run", "Generate, profile and evaluate models for one configuration");
  GenArgs run_args;
  run_args.attach(run_cmd);
  std::string run_models, run_out;
  std::optional<std::size_t> run_splits, run_k;
  run_cmd->add_option("--models", run_models, "comma-separated: svd,nmf,n2v,fairwalk,crosswalk");
  run_cmd->add_option("--splits", run_splits, "number of train/test splits");
  run_cmd->add_option("--k", run_k, "recommendation list length");
  run_cmd->add_option("--out", run_out, "output CSV (default stdout)");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Run an (alpha, beta) grid sweep into a corpus CSV");
  std::string sweep_config, sweep_preset, sweep_out;
  std::optional<std::uint64_t> sweep_seed;
  std::optional<std::size_t> sweep_workers, sweep_max_cells;
  bool deterministic = true;
  sweep_cmd->add_option("--config", sweep_config, "sweep spec file")->required();
  sweep_cmd->add_option("--preset", sweep_preset, "preset applied before the spec file");
  sweep_cmd->add_option("--seed", sweep_seed, "base seed");
  sweep_cmd->add_option("--out", sweep_out, "corpus CSV (overrides 'output')");
  sweep_cmd->add_option("--workers", sweep_workers, "worker threads");
  sweep_cmd->add_flag("--deterministic,!--no-deterministic", deterministic, "write cells in grid order (default)");
  sweep_cmd->add_option("--max-cells", sweep_max_cells, "stop after this many new cells");

  // calibrate-beta
  auto* cal_cmd = app.add_subcommand("calibrate-beta", "Find beta reaching a target mean assortativity");
  GenArgs cal_args;
  cal_args.attach(cal_cmd, false);
  double target = 0.0;
  std::size_t reps = 5;
  cal_cmd->add_option("--target", target, "target assortativity")->required();
  cal_cmd->add_option("--reps", reps, "graphs per probe");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) {
      auto [config, run] = gen_and_run_config(gen_args, false);
      auto g = generate(config);
      fs::create_directories(gen_out);
      save_graph(g.graph, g.labels, fs::path(gen_out) / "edges.csv", fs::path(gen_out) / "labels.csv");
      std::cerr << "wrote " << g.graph.num_nodes() << " nodes, " << g.graph.num_edges() << " edges to " << gen_out
                << '\n';
    } else if (*prof_cmd) {
      auto lg = load_graph(prof_edges, prof_labels);
      ProfileOptions opt;
      opt.info_steps = info_steps;
      auto p = bias_profile(lg.graph, lg.labels, opt);
      with_output(prof_out, [&](std::ostream& out) {
        out << BiasProfile::csv_header() << '\n' << p.csv_row() << '\n';
      });
    } else if (*split_cmd) {
      auto lg = load_graph(split_edges_file, split_labels_file);
      auto sp = split_edges(lg.graph, split_id, split_seed, ratio);
      fs::create_directories(split_out);
      std::ofstream train(fs::path(split_out) / "train.csv", std::ios::binary);
      std::ofstream test(fs::path(split_out) / "test.csv", std::ios::binary);
      if (!train || !test) throw InputError("cannot write split files to " + split_out);
      auto orig = [&](node_t u) { return lg.original_ids[u]; };
      for (auto [u, v] : sp.train.edges()) train << orig(u) << ',' << orig(v) << '\n';
      for (auto [u, v] : sp.test) test << orig(u) << ',' << orig(v) << '\n';
    } else if (*run_cmd) {
      auto [config, run] = gen_and_run_config(run_args, true);
      if (!run_models.empty()) {
        run.models.clear();
        for (auto& m : split(run_models, ',')) run.models.push_back(parse_model(m));
      }
      if (run_splits) run.splits = *run_splits;
      if (run_k) run.eval.k = *run_k;
      CellInfo cell;
      if (!run_args.preset.empty()) cell.use_case = run_args.preset;
      auto recs = run_single(config, run, cell);
      with_output(run_out, [&](std::ostream& out) {
        out << corpus_header() << '\n';
        for (const auto& r : recs) out << to_csv(r) << '\n';
      });
    } else if (*sweep_cmd) {
      std::vector<ConfigEntry> entries;
      if (!sweep_preset.empty()) entries.push_back({"preset", sweep_preset, 0});
      auto file = read_config_file(sweep_config);
      entries.insert(entries.end(), file.begin(), file.end());
      auto spec = sweep_spec_from(entries);
      if (sweep_seed) spec.base_seed = *sweep_seed;
      if (!sweep_out.empty()) spec.output = sweep_out;
      if (sweep_workers) spec.workers = *sweep_workers;
      spec.deterministic = deterministic;
      spec.max_cells = sweep_max_cells;
      if (auto parent = spec.output.parent_path(); !parent.empty()) fs::create_directories(parent);
      auto summary = sweep(spec);
      std::cerr << "cells: " << summary.cells_total << " total, " << summary.cells_skipped << " already present, "
                << summary.cells_run << " run; " << summary.records_written << " records written to "
                << spec.output.string() << '\n';
    } else if (*cal_cmd) {
      auto [config, run] = gen_and_run_config(cal_args, false);
      CalibrationOptions opt;
      opt.reps = reps;
      auto res = calibrate_beta(config, target, opt);
      std::cout << "beta,assortativity,probes\n"
                << format_double(res.beta) << ',' << format_double(res.assortativity) << ',' << res.probes << '\n';
    }
  } catch (const CalibrationRangeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

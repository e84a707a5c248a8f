#pragma once

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fairbench/config.hpp"
#include "fairbench/embedding.hpp"
#include "fairbench/format.hpp"
#include "fairbench/generator.hpp"
#include "fairbench/measures.hpp"
#include "fairbench/metrics.hpp"
#include "fairbench/split.hpp"

namespace fairbench {

/// One corpus row: generation parameters, bias profile, model and metrics.
struct EvalRecord {
  std::string use_case = "custom";
  std::size_t n = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t repeat = 0;
  std::uint64_t graph_seed = 0;
  std::size_t split_id = 0;
  std::string model;
  BiasProfile profile;
  MetricReport metrics;
  std::vector<std::string> flags;
};

inline std::string corpus_header() {
  std::string h = "use_case,n,alpha,beta,repeat,graph_seed,split_id,model,";
  for (auto name : kMeasureNames) {
    h += name;
    h += ',';
  }
  return h + "hit10,ap10,auc,sp10,eo10,flags";
}

namespace detail {

inline std::string sanitize_flag(std::string s) {
  for (auto& c : s) {
    if (c == ',' || c == ';' || c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace detail

inline std::string to_csv(const EvalRecord& r) {
  std::string row = r.use_case + ',' + std::to_string(r.n) + ',' + format_double(r.alpha) + ',' +
                    format_double(r.beta) + ',' + std::to_string(r.repeat) + ',' + std::to_string(r.graph_seed) + ',' +
                    std::to_string(r.split_id) + ',' + r.model + ',';
  for (const auto& v : r.profile.values) {
    row += format_optional(v);
    row += ',';
  }
  for (const auto* m : {&r.metrics.hit_at_k, &r.metrics.ap_at_k, &r.metrics.auc, &r.metrics.sp_at_k,
                        &r.metrics.eo_at_k}) {
    row += format_optional(*m);
    row += ',';
  }
  std::vector<std::string> flags;
  for (const auto& f : r.profile.flags) flags.push_back(detail::sanitize_flag(f));
  for (const auto& f : r.flags) flags.push_back(detail::sanitize_flag(f));
  return row + join(flags, ";");
}

struct RunOptions {
  std::vector<ModelKind> models{ModelKind::kSvd};
  ModelSpec hyper;  // kind is overwritten per model
  EvalOptions eval;
  std::size_t splits = 5;
  ProfileOptions profile;
};

/// Identifying columns copied into each record.
struct CellInfo {
  std::string use_case = "custom";
  std::size_t repeat = 0;
};

/// Default trainer: the library's embed().
struct DefaultTrainer {
  Embedding operator()(const Graph& train, const SensitiveLabels& s, const ModelSpec& spec, std::uint64_t seed,
                       std::size_t /*split_id*/) const {
    return embed(train, s, spec, seed);
  }
};

/// Generate, profile, then for every split x model: embed, recommend, evaluate.
/// A failing model yields a record flagged "error:..." instead of aborting.
template <typename Trainer = DefaultTrainer>
std::vector<EvalRecord> run_single(const GenConfig& config, const RunOptions& opt, const CellInfo& cell = {},
                                   Trainer&& trainer = Trainer{}) {
  auto gen = generate(config);
  BiasProfile profile = bias_profile(gen.graph, gen.labels, opt.profile);

  std::vector<EvalRecord> out;
  out.reserve(opt.splits * opt.models.size());
  for (std::size_t split_id = 0; split_id < opt.splits; ++split_id) {
    auto split = split_edges(gen.graph, split_id, derive_seed(config.seed, {0x5EED5ULL}));
    for (ModelKind kind : opt.models) {
      EvalRecord rec;
      rec.use_case = cell.use_case;
      rec.n = config.n;
      rec.alpha = config.alpha;
      rec.beta = config.beta;
      rec.repeat = cell.repeat;
      rec.graph_seed = config.seed;
      rec.split_id = split_id;
      rec.model = to_string(kind);
      rec.profile = profile;
      rec.metrics.k = opt.eval.k;
      try {
        ModelSpec spec = opt.hyper;
        spec.kind = kind;
        auto model_seed = derive_seed(config.seed, {0x30DE1ULL, split_id, static_cast<std::uint64_t>(kind)});
        Embedding emb = trainer(split.train, gen.labels, spec, model_seed, split_id);
        rec.flags = emb.diagnostics;
        if (!emb.left.allFinite()) throw std::runtime_error("embedding has non-finite entries");
        auto eval_seed = derive_seed(model_seed, {0xE7A1ULL});
        rec.metrics = evaluate(emb, split.train, split.test, gen.labels, opt.eval, eval_seed);
        for (auto& f : rec.metrics.flags) rec.flags.push_back(f);
      } catch (const std::exception& e) {
        rec.flags.push_back(std::string("error:") + e.what());
      }
      out.push_back(std::move(rec));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SweepSpec {
  std::string use_case = "custom";
  GenConfig base;  // alpha, beta and seed are overwritten per cell
  std::vector<double> alpha_grid;
  std::vector<double> beta_grid;
  std::size_t repeats = 1;
  RunOptions run;
  std::uint64_t base_seed = 0;
  std::filesystem::path output;
  std::size_t workers = 1;
  bool deterministic = true;  // write cells in grid order
  std::optional<std::size_t> max_cells;  // stop after running this many cells

  void validate() const {
    if (alpha_grid.empty()) throw InputError("sweep spec: alpha_grid is empty");
    if (beta_grid.empty()) throw InputError("sweep spec: beta_grid is empty");
    if (repeats < 1) throw InputError("sweep spec: repeats must be >= 1");
    if (run.models.empty()) throw InputError("sweep spec: no models");
    if (run.splits < 1) throw InputError("sweep spec: splits must be >= 1");
    if (output.empty()) throw InputError("sweep spec: no output path");
    if (workers < 1) throw InputError("sweep spec: workers must be >= 1");
  }
};

struct SweepCell {
  std::size_t alpha_index = 0, beta_index = 0, repeat = 0;
};

inline std::vector<SweepCell> sweep_cells(const SweepSpec& spec) {
  std::vector<SweepCell> cells;
  for (std::size_t a = 0; a < spec.alpha_grid.size(); ++a)
    for (std::size_t b = 0; b < spec.beta_grid.size(); ++b)
      for (std::size_t r = 0; r < spec.repeats; ++r) cells.push_back({a, b, r});
  return cells;
}

/// Graph seed for a grid cell: a stable hash of coordinates, independent of grid size.
inline std::uint64_t cell_seed(std::uint64_t base_seed, const SweepCell& c) {
  return derive_seed(base_seed, {c.alpha_index, c.beta_index, c.repeat});
}

inline GenConfig cell_config(const SweepSpec& spec, const SweepCell& c) {
  GenConfig g = spec.base;
  g.alpha = spec.alpha_grid[c.alpha_index];
  g.beta = spec.beta_grid[c.beta_index];
  g.seed = cell_seed(spec.base_seed, c);
  return g;
}

inline std::string cell_key(double alpha, double beta, std::size_t repeat) {
  return format_double(alpha) + ',' + format_double(beta) + ',' + std::to_string(repeat);
}

struct SweepSummary {
  std::size_t cells_total = 0;
  std::size_t cells_skipped = 0;
  std::size_t cells_run = 0;
  std::size_t records_written = 0;
};

namespace detail {

/// Loads an existing corpus, keeping only rows of complete cells (a crash can
/// leave a torn last line or a partial cell). Returns the kept rows and the
/// keys of complete cells.
inline std::pair<std::vector<std::string>, std::set<std::string>> load_complete_cells(
    const std::filesystem::path& path, std::size_t rows_per_cell) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  if (auto nl = text.rfind('\n'); nl == std::string::npos) {
    text.clear();
  } else {
    text.resize(nl + 1);
  }
  std::vector<std::string> lines;
  std::istringstream ls(text);
  for (std::string line; std::getline(ls, line);) lines.push_back(line);
  if (lines.empty()) return {};
  if (lines.front() != corpus_header()) throw InputError("existing corpus " + path.string() + " has a different header");

  std::map<std::string, std::size_t> counts;
  auto key_of = [](const std::string& row) {
    auto cols = split(row, ',');
    if (cols.size() < 5) throw InputError("corrupt corpus row: " + row);
    return cols[2] + ',' + cols[3] + ',' + cols[4];
  };
  for (std::size_t i = 1; i < lines.size(); ++i) ++counts[key_of(lines[i])];
  std::set<std::string> complete;
  for (auto& [k, c] : counts) {
    if (c == rows_per_cell) complete.insert(k);
  }
  std::vector<std::string> kept;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (complete.count(key_of(lines[i]))) kept.push_back(lines[i]);
  }
  return {kept, complete};
}

}  // namespace detail

/// Runs every (alpha, beta, repeat) cell not already present in the output
/// corpus and appends its records. Cells run on a worker pool; the writer is
/// the only shared state and flushes once per cell.
template <typename Trainer = DefaultTrainer>
SweepSummary sweep(const SweepSpec& spec, Trainer trainer = Trainer{}) {
  spec.validate();
  const std::size_t rows_per_cell = spec.run.splits * spec.run.models.size();
  auto cells = sweep_cells(spec);
  SweepSummary summary;
  summary.cells_total = cells.size();

  std::set<std::string> done;
  {
    std::vector<std::string> kept;
    if (std::filesystem::exists(spec.output)) std::tie(kept, done) = detail::load_complete_cells(spec.output, rows_per_cell);
    std::ofstream out(spec.output, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write corpus " + spec.output.string());
    out << corpus_header() << '\n';
    for (auto& row : kept) out << row << '\n';
  }
  std::ofstream out(spec.output, std::ios::binary | std::ios::app);
  if (!out) throw InputError("cannot write corpus " + spec.output.string());

  std::vector<SweepCell> todo;
  for (auto& c : cells) {
    if (done.count(cell_key(spec.alpha_grid[c.alpha_index], spec.beta_grid[c.beta_index], c.repeat))) {
      ++summary.cells_skipped;
    } else {
      todo.push_back(c);
    }
  }
  if (spec.max_cells && todo.size() > *spec.max_cells) todo.resize(*spec.max_cells);
  summary.cells_run = todo.size();

  std::vector<std::optional<std::string>> results(todo.size());
  std::mutex mu;
  std::condition_variable cv;
  std::size_t next_write = 0;
  std::atomic<std::size_t> next_cell{0};
  std::exception_ptr failure;

  auto write_block = [&](const std::string& block) {
    out << block;
    out.flush();
  };
  auto worker = [&] {
    for (;;) {
      std::size_t i = next_cell.fetch_add(1);
      if (i >= todo.size()) return;
      std::string block;
      try {
        GenConfig cfg = cell_config(spec, todo[i]);
        auto recs = run_single(cfg, spec.run, CellInfo{spec.use_case, todo[i].repeat}, trainer);
        for (auto& r : recs) block += to_csv(r) + '\n';
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next_cell = todo.size();
        cv.notify_all();
        return;
      }
      std::lock_guard lock(mu);
      summary.records_written += rows_per_cell;
      if (!spec.deterministic) {
        write_block(block);
        continue;
      }
      results[i] = std::move(block);
      while (next_write < results.size() && results[next_write]) {
        write_block(*results[next_write]);
        results[next_write].reset();
        ++next_write;
      }
    }
  };

  std::size_t n_workers = std::min(spec.workers, std::max<std::size_t>(todo.size(), 1));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return summary;
}

/// Applies one run-level key (models, k, splits, negative_samples,
/// info_steps or a model hyperparameter); returns false for other keys.
inline bool apply_run_key(RunOptions& run, const ConfigEntry& e) {
  const auto& k = e.key;
  if (apply_model_key(run.hyper, e)) return true;
  if (k == "models") {
    run.models.clear();
    for (auto& m : detail::to_strings(e)) run.models.push_back(parse_model(m));
  } else if (k == "k") {
    run.eval.k = detail::to_u64(e);
  } else if (k == "splits") {
    run.splits = detail::to_u64(e);
  } else if (k == "negative_samples") {
    run.eval.negative_samples = detail::to_u64(e);
  } else if (k == "info_steps") {
    run.profile.info_steps = static_cast<int>(detail::to_u64(e));
  } else {
    return false;
  }
  return true;
}

/// Keys accepted in sweep spec files besides the generation and run keys.
inline SweepSpec sweep_spec_from(const std::vector<ConfigEntry>& entries) {
  SweepSpec spec;
  for (const auto& e : entries) {
    if (e.key == "preset") {
      apply_gen_key(spec.base, e);
      spec.use_case = e.value;
    }
  }
  for (const auto& e : entries) {
    const auto& k = e.key;
    if (k == "preset") continue;
    if (k == "alpha" || k == "beta" || k == "seed") {
      throw InputError("config line " + std::to_string(e.line) + ": '" + k + "' is set per cell in a sweep spec");
    }
    if (apply_gen_key(spec.base, e) || apply_run_key(spec.run, e)) continue;
    if (k == "alpha_grid") spec.alpha_grid = detail::to_doubles(e);
    else if (k == "beta_grid") spec.beta_grid = detail::to_doubles(e);
    else if (k == "repeats") spec.repeats = detail::to_u64(e);
    else if (k == "base_seed") spec.base_seed = detail::to_u64(e);
    else if (k == "output") spec.output = e.value;
    else if (k == "use_case") spec.use_case = e.value;
    else if (k == "workers") spec.workers = detail::to_u64(e);
    else throw InputError("config line " + std::to_string(e.line) + ": unknown key '" + k + "'");
  }
  return spec;
}

}  // namespace fairbench

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "fairbench/harness.hpp"
#include "fairbench/io.hpp"
#include "test_util.hpp"

using namespace fairbench;
namespace fs = std::filesystem;

namespace {

std::vector<ConfigEntry> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_key_values(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

GenConfig tiny_config(std::uint64_t seed) {
  GenConfig c = preset(UseCase::kCollab);
  c.n = 60;
  c.seed = seed;
  return c;
}

RunOptions tiny_run(std::vector<ModelKind> models = {ModelKind::kSvd}) {
  RunOptions r;
  r.models = std::move(models);
  r.hyper.dim = 4;
  r.hyper.nmf.max_iter = 20;
  r.eval.negative_samples = 200;
  return r;
}

SweepSpec tiny_sweep(const fs::path& out) {
  SweepSpec s;
  s.use_case = "collab";
  s.base = tiny_config(0);
  s.base.n = 40;
  s.alpha_grid = {0.5, 0.7};
  s.beta_grid = {0.0, 1.0, 2.0};
  s.repeats = 2;
  s.run = tiny_run();
  s.base_seed = 99;
  s.output = out;
  return s;
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(FAIRBENCH_CLI) + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ParsesCommentsAndWhitespace) {
  auto e = parse("# header\n  n = 300  \n\nalpha=0.6 # trailing\n");
  ASSERT_EQ(e.size(), 2u);
  EXPECT_EQ(e[0].key, "n");
  EXPECT_EQ(e[0].value, "300");
  EXPECT_EQ(e[0].line, 2u);
  EXPECT_EQ(e[1].value, "0.6");
}

TEST(Config, RejectsDuplicatesAndMalformedLines) {
  EXPECT_THROW(parse("n = 3\nn = 4\n"), InputError);
  EXPECT_THROW(parse("n 3\n"), InputError);
  EXPECT_THROW(parse(" = 3\n"), InputError);
}

TEST(Config, PresetThenOverrides) {
  auto c = gen_config_from(parse("beta = 2\npreset = opinion\nn = 300\n"));
  auto base = preset(UseCase::kOpinion);
  EXPECT_EQ(c.n, 300u);
  EXPECT_EQ(c.beta, 2.0);
  EXPECT_EQ(c.m, base.m);
  EXPECT_EQ(c.alpha, base.alpha);
}

TEST(Config, EveryFieldAddressable) {
  auto c = gen_config_from(parse(
      "n = 50\nm = 4\nalpha = 0.3\nbeta = 1.5\nanchor = true\nhomophily_scope = anchor_only\n"
      "hop_weights = 1, 0.5\nedge_count_law = affine\naffine_a = 0.2\naffine_b = 1\nseed = 12\n"));
  EXPECT_EQ(c.n, 50u);
  EXPECT_EQ(c.m, 4u);
  EXPECT_EQ(c.alpha, 0.3);
  EXPECT_EQ(c.beta, 1.5);
  EXPECT_TRUE(c.anchor);
  EXPECT_EQ(c.homophily_scope, HomophilyScope::kAnchorOnly);
  EXPECT_EQ(c.hop_weights, (std::vector<double>{1.0, 0.5}));
  auto* law = std::get_if<AffineLaw>(&c.edge_count_law);
  ASSERT_NE(law, nullptr);
  EXPECT_EQ(law->a, 0.2);
  EXPECT_EQ(law->b, 1.0);
  EXPECT_EQ(c.seed, 12u);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, UnknownKeyNamesLine) {
  try {
    gen_config_from(parse("n = 5\nbogus = 1\n"));
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos) << e.what();
  }
}

TEST(Config, BadValuesRejected) {
  EXPECT_THROW(gen_config_from(parse("n = many\n")), InputError);
  EXPECT_THROW(gen_config_from(parse("homophily_scope = sometimes\n")), InputError);
  EXPECT_THROW(gen_config_from(parse("edge_count_law = fixed\ngamma = 2\n")), InputError);
  EXPECT_THROW(gen_config_from(parse("preset = twitter\n")), InputError);
}

TEST(Config, SweepSpecKeys) {
  auto s = sweep_spec_from(parse(
      "preset = friendship\nn = 120\nalpha_grid = 0.5, 0.7\nbeta_grid = 0, 1, 2\nrepeats = 3\n"
      "models = svd, n2v\nk = 5\nsplits = 2\nbase_seed = 8\noutput = out.csv\nworkers = 2\ndim = 16\n"));
  EXPECT_EQ(s.use_case, "friendship");
  EXPECT_EQ(s.base.n, 120u);
  EXPECT_TRUE(s.base.anchor);
  EXPECT_EQ(s.alpha_grid.size(), 2u);
  EXPECT_EQ(s.beta_grid.size(), 3u);
  EXPECT_EQ(s.repeats, 3u);
  EXPECT_EQ(s.run.models, (std::vector<ModelKind>{ModelKind::kSvd, ModelKind::kNode2Vec}));
  EXPECT_EQ(s.run.eval.k, 5u);
  EXPECT_EQ(s.run.splits, 2u);
  EXPECT_EQ(s.run.hyper.dim, 16u);
  EXPECT_EQ(s.base_seed, 8u);
  EXPECT_EQ(s.workers, 2u);
  EXPECT_NO_THROW(s.validate());
  EXPECT_THROW(sweep_spec_from(parse("beta = 1\n")), InputError);
  EXPECT_THROW(sweep_spec_from(parse("models = gcn\n")), InputError);
  EXPECT_THROW(sweep_spec_from(parse("colour = red\n")), InputError);
}

TEST(RunSingle, FiveSplitsOneModel) {
  auto recs = run_single(tiny_config(3), tiny_run(), CellInfo{"collab", 0});
  ASSERT_EQ(recs.size(), 5u);
  std::set<std::size_t> splits;
  for (const auto& r : recs) {
    splits.insert(r.split_id);
    EXPECT_EQ(r.profile, recs[0].profile);
    EXPECT_EQ(r.model, "svd");
    EXPECT_TRUE(r.metrics.hit_at_k.has_value());
    for (const auto& f : r.flags) EXPECT_EQ(f.rfind("error:", 0), std::string::npos) << f;
  }
  EXPECT_EQ(splits.size(), 5u);
}

TEST(RunSingle, DeterministicRows) {
  auto run = tiny_run({ModelKind::kSvd, ModelKind::kNode2Vec});
  run.hyper.walk.walks_per_node = 2;
  run.hyper.walk.walk_length = 10;
  run.hyper.skipgram.epochs = 1;
  auto a = run_single(tiny_config(4), run);
  auto b = run_single(tiny_config(4), run);
  ASSERT_EQ(a.size(), 10u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(to_csv(a[i]), to_csv(b[i]));
}

TEST(RunSingle, FailingModelIsIsolated) {
  auto trainer = [](const Graph& train, const SensitiveLabels& s, const ModelSpec& spec, std::uint64_t seed,
                    std::size_t split_id) {
    if (split_id == 2) throw std::runtime_error("injected failure, with comma");
    return embed(train, s, spec, seed);
  };
  auto recs = run_single(tiny_config(5), tiny_run(), CellInfo{}, trainer);
  ASSERT_EQ(recs.size(), 5u);
  int flagged = 0;
  for (const auto& r : recs) {
    bool err = false;
    for (const auto& f : r.flags) err |= f.rfind("error:", 0) == 0;
    flagged += err;
    EXPECT_EQ(err, r.split_id == 2);
  }
  EXPECT_EQ(flagged, 1);
  auto row = to_csv(recs[2]);
  EXPECT_EQ(split(row, ',').size(), split(corpus_header(), ',').size());
  EXPECT_FALSE(recs[2].metrics.hit_at_k.has_value());
}

TEST(Records, CsvColumnsMatchHeader) {
  auto recs = run_single(tiny_config(6), tiny_run());
  const auto cols = split(corpus_header(), ',').size();
  EXPECT_EQ(cols, 8u + 14u + 5u + 1u);
  for (const auto& r : recs) EXPECT_EQ(split(to_csv(r), ',').size(), cols);
}

TEST(Sweep, RecordCount) {
  auto dir = test::temp_dir("sweep_count");
  SweepSpec s;
  s.base = tiny_config(0);
  s.base.n = 30;
  s.alpha_grid = {0.5, 0.6, 0.7, 0.8, 0.9};
  s.beta_grid = {0.0, 0.5, 1.0, 1.5, 2.0};
  s.repeats = 2;
  s.run = tiny_run({ModelKind::kSvd, ModelKind::kNmf});
  s.output = dir / "corpus.csv";
  auto summary = sweep(s);
  EXPECT_EQ(summary.records_written, 500u);
  auto lines = lines_of(slurp(s.output));
  ASSERT_EQ(lines.size(), 501u);
  EXPECT_EQ(lines[0], corpus_header());

  std::set<std::string> keys;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto c = split(lines[i], ',');
    keys.insert(c[2] + ',' + c[3] + ',' + c[4] + ',' + c[6] + ',' + c[7]);
  }
  EXPECT_EQ(keys.size(), 500u);
  fs::remove_all(dir);
}

TEST(Sweep, ValidationErrors) {
  auto s = tiny_sweep("x.csv");
  s.beta_grid.clear();
  EXPECT_THROW(sweep(s), InputError);
  s = tiny_sweep("x.csv");
  s.repeats = 0;
  EXPECT_THROW(s.validate(), InputError);
  s = tiny_sweep("");
  EXPECT_THROW(s.validate(), InputError);
}

TEST(Sweep, CellSeedsAreStableUnderGridEdits) {
  auto s = tiny_sweep("x.csv");
  auto seed_before = cell_config(s, {1, 2, 1}).seed;
  s.beta_grid.push_back(5.0);
  s.alpha_grid.push_back(0.9);
  EXPECT_EQ(cell_config(s, {1, 2, 1}).seed, seed_before);
  EXPECT_NE(cell_config(s, {1, 2, 0}).seed, seed_before);
}

TEST(Sweep, ResumeMatchesUninterrupted) {
  auto dir = test::temp_dir("sweep_resume");
  auto full = tiny_sweep(dir / "full.csv");
  sweep(full);
  const auto expected = slurp(full.output);

  // Interrupted after 4 cells, then resumed.
  auto part = tiny_sweep(dir / "part.csv");
  part.max_cells = 4;
  auto first = sweep(part);
  EXPECT_EQ(first.cells_run, 4u);
  part.max_cells.reset();
  auto second = sweep(part);
  EXPECT_EQ(second.cells_skipped, 4u);
  EXPECT_EQ(second.cells_run, 8u);
  EXPECT_EQ(slurp(part.output), expected);

  // Crash in the middle of a cell: a partial cell and a torn line.
  auto torn = tiny_sweep(dir / "torn.csv");
  torn.max_cells = 3;
  sweep(torn);
  auto lines = lines_of(expected);
  {
    std::ofstream out(torn.output, std::ios::binary | std::ios::app);
    out << lines[16] << '\n' << lines[17] << '\n' << lines[18].substr(0, 20);
  }
  torn.max_cells.reset();
  sweep(torn);
  EXPECT_EQ(slurp(torn.output), expected);

  // Nothing left to do: rerun keeps the file unchanged.
  auto again = sweep(part);
  EXPECT_EQ(again.cells_run, 0u);
  EXPECT_EQ(slurp(part.output), expected);
  fs::remove_all(dir);
}

TEST(Sweep, WorkersDoNotChangeDeterministicOutput) {
  auto dir = test::temp_dir("sweep_workers");
  auto one = tiny_sweep(dir / "one.csv");
  sweep(one);
  auto many = tiny_sweep(dir / "many.csv");
  many.workers = 3;
  sweep(many);
  EXPECT_EQ(slurp(one.output), slurp(many.output));

  auto loose = tiny_sweep(dir / "loose.csv");
  loose.workers = 3;
  loose.deterministic = false;
  sweep(loose);
  auto a = lines_of(slurp(one.output)), b = lines_of(slurp(loose.output));
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
  fs::remove_all(dir);
}

TEST(Sweep, ForeignHeaderRejected) {
  auto dir = test::temp_dir("sweep_header");
  {
    std::ofstream out(dir / "c.csv");
    out << "a,b,c\n1,2,3\n";
  }
  EXPECT_THROW(sweep(tiny_sweep(dir / "c.csv")), InputError);
  fs::remove_all(dir);
}

TEST(Cli, GenerateProfileSplitRun) {
  auto dir = test::temp_dir("cli");
  auto d = dir.string();
  ASSERT_EQ(run_cli("generate --preset collab --n 80 --seed 5 --out " + d + "/g"), 0);
  auto lg = load_graph(dir / "g/edges.csv", dir / "g/labels.csv");
  EXPECT_EQ(lg.graph.num_nodes(), 80u);
  auto direct = generate([] {
    auto c = preset(UseCase::kCollab);
    c.n = 80;
    c.seed = 5;
    return c;
  }());
  EXPECT_EQ(lg.graph, direct.graph);

  ASSERT_EQ(run_cli("profile --edges " + d + "/g/edges.csv --labels " + d + "/g/labels.csv --out " + d + "/p.csv"), 0);
  auto prof = lines_of(slurp(dir / "p.csv"));
  ASSERT_EQ(prof.size(), 2u);
  EXPECT_EQ(prof[0], BiasProfile::csv_header());
  EXPECT_EQ(prof[1], bias_profile(direct.graph, direct.labels).csv_row());

  ASSERT_EQ(run_cli("split --edges " + d + "/g/edges.csv --labels " + d + "/g/labels.csv --out " + d + "/s"), 0);
  EXPECT_EQ(lines_of(slurp(dir / "s/train.csv")).size() + lines_of(slurp(dir / "s/test.csv")).size(),
            lg.graph.num_edges());

  ASSERT_EQ(run_cli("run --preset collab --n 60 --seed 2 --models svd --splits 2 --out " + d + "/r.csv"), 0);
  auto rows = lines_of(slurp(dir / "r.csv"));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], corpus_header());
  EXPECT_EQ(rows[1].substr(0, 7), "collab,");
  fs::remove_all(dir);
}

TEST(Cli, SweepFromSpecFile) {
  auto dir = test::temp_dir("cli_sweep");
  {
    std::ofstream spec(dir / "spec.txt");
    spec << "preset = collab\nn = 40\nalpha_grid = 0.5, 0.7\nbeta_grid = 0, 2\nrepeats = 1\n"
            "models = svd\ndim = 4\nnegative_samples = 200\nbase_seed = 3\n";
  }
  auto d = dir.string();
  ASSERT_EQ(run_cli("sweep --config " + d + "/spec.txt --out " + d + "/a.csv --workers 2 --deterministic"), 0);
  ASSERT_EQ(run_cli("sweep --config " + d + "/spec.txt --out " + d + "/b.csv"), 0);
  auto a = slurp(dir / "a.csv");
  EXPECT_EQ(lines_of(a).size(), 1u + 4u * 5u);
  EXPECT_EQ(a, slurp(dir / "b.csv"));
  fs::remove_all(dir);
}

TEST(Cli, ErrorsExitNonZero) {
  EXPECT_EQ(run_cli("generate --alpha 1.5 --out /tmp"), 2);
  EXPECT_EQ(run_cli("profile --edges /nonexistent/e.csv --labels /nonexistent/l.csv"), 2);
  EXPECT_EQ(run_cli("calibrate-beta --preset friendship --n 200 --target 0.999 --reps 1"), 3);
  EXPECT_NE(run_cli("frobnicate"), 0);
  EXPECT_NE(run_cli(""), 0);
}

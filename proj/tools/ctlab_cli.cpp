// Command-line front end: ctlab <subcommand> [options].
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ctlab/config.hpp"
#include "ctlab/graph.hpp"
#include "ctlab/objectives.hpp"
#include "ctlab/pipeline.hpp"
#include "ctlab/rng.hpp"
#include "ctlab/svd.hpp"

namespace fs = std::filesystem;
using namespace ctlab;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned threads = 1;
  bool allow_violations = false;
  std::vector<std::string> sets;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "Run configuration file");
  sub->add_option("--seed", c.seed, "Global seed (overrides the config)");
  sub->add_option("--out", c.out, "Output directory (overrides output.directory)");
  sub->add_option("--threads", c.threads, "Worker threads for independent rows")->check(CLI::PositiveNumber);
  sub->add_flag("--allow-violations", c.allow_violations, "Exit 0 even when a bound is violated");
  sub->add_option("--set", c.sets, "Override a config key: section.key=value (repeatable)");
}

RunConfig load(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
  for (const auto& s : c.sets) apply_override(cfg, s);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.out_dir = c.out;
  validate_config(cfg);
  return cfg;
}

std::string path_in(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return (fs::path(cfg.out_dir) / name).string();
}

AugmentedSpace configured_space(const Context& ctx) {
  const auto t = ctx.cfg.truncation();
  const World w = t ? preprocess_world(ctx.world, *t) : ctx.world;
  return build_augmented_space(w, ctx.transforms);
}

int cmd_svd(const std::string& in, std::size_t rows, std::size_t cols, const std::string& mode, std::size_t q,
            std::size_t index, const std::string& method, std::size_t oversample, std::size_t power_iters,
            std::size_t ey_trials, std::uint64_t seed, const std::string& out) {
  const Matrix x = in.empty() ? gaussian_matrix(rows, cols, seed) : load_matrix(in);
  TruncationSpec spec;
  if (mode == "keep_top_q") spec = TruncationSpec::keep_top(q);
  else if (mode == "discard_pair") spec = TruncationSpec::discard_pair(index);
  else if (mode == "discard_single") spec = TruncationSpec::discard_single(index);
  else throw std::invalid_argument("svd.mode: expected keep_top_q, discard_pair or discard_single");
  validate_truncation(spec, x.rows(), x.cols());
  SvdFactors f;
  if (method == "exact") {
    f = svd_full(x);
  } else if (method == "randomized") {
    if (spec.mode != TruncationMode::keep_top_q) throw std::invalid_argument("svd.method: randomized needs keep_top_q");
    f = rsvd(x, q, oversample, power_iters, seed);
  } else {
    throw std::invalid_argument("svd.method: expected exact or randomized");
  }
  std::cout << "singular_values =";
  for (double s : f.S) std::cout << " " << format_double(s);
  std::cout << "\n" << spec.describe() << " residual_sq = " << format_double(truncation_residual_sq(f, spec)) << "\n";
  const Matrix t = svd_truncate(f, spec);
  std::cout << "reconstruction_error_sq = " << format_double(frobenius_distance_sq(x, t)) << "\n";
  if (ey_trials > 0 && spec.mode == TruncationMode::keep_top_q) {
    const EckartYoungReport r = eckart_young_check(x, q, ey_trials, seed);
    std::cout << "eckart_young trials = " << r.trials << " violations = " << r.violations
              << " holds = " << (r.holds ? "true" : "false") << "\n";
  }
  if (!out.empty()) save_matrix(out, t);
  return 0;
}

int cmd_world(const RunConfig& cfg) {
  const Context ctx = prepare(cfg);
  const std::string dir = path_in(cfg, "world");
  save_world(ctx.world, dir);
  const AugmentedSpace space = configured_space(ctx);
  std::cout << "originals = " << ctx.world.originals.size() << "\nnodes = " << space.n()
            << "\nalpha = " << format_double(labeling_error(space).alpha) << "\nworld written to " << dir << "\n";
  return 0;
}

int cmd_graph(const RunConfig& cfg) {
  const Context ctx = prepare(cfg);
  const AugmentedSpace space = configured_space(ctx);
  const AugmentationGraph g = build_graph(space);
  const Spectrum s = laplacian_spectrum(g);
  save_matrix(path_in(cfg, "adjacency.mat"), g.A);
  save_matrix(path_in(cfg, "laplacian.mat"), g.L);
  std::string csv = "i,lambda\n";
  for (std::size_t i = 0; i < s.values.size(); ++i) csv += std::to_string(i + 1) + "," + format_double(s.values[i]) + "\n";
  write_text(path_in(cfg, "spectrum.csv"), csv);
  std::cout << "n = " << g.n() << "\ncomponents = " << count_components(g)
            << "\nalpha = " << format_double(labeling_error(space).alpha) << "\n";
  if (cfg.train_k < g.n()) {
    std::cout << "lambda_k = " << format_double(s.lambda(cfg.train_k))
              << "\nlambda_k1 = " << format_double(s.lambda(cfg.train_k + 1)) << "\n";
  }
  return 0;
}

TrainResult train_configured(const RunConfig& cfg, const AugmentedSpace& space) {
  TrainConfig tc;
  tc.loss = cfg.train_loss;
  tc.k = cfg.train_k;
  tc.M = cfg.train_M;
  tc.steps = cfg.train_steps;
  tc.step_size = cfg.train_step_size;
  tc.seed = derive_seed(cfg.seed, "train");
  tc.batch_size = cfg.train_batch;
  return train_free_embeddings(space, tc);
}

int cmd_train(const RunConfig& cfg) {
  const Context ctx = prepare(cfg);
  const AugmentedSpace space = configured_space(ctx);
  const TrainResult tr = train_configured(cfg, space);
  save_embedding(tr.f, path_in(cfg, "embedding"));
  std::cout << "initial_loss = " << format_double(tr.initial_loss) << "\nfinal_loss = " << format_double(tr.final_loss)
            << "\naccepted_steps = " << tr.accepted_steps << "\n";
  if (cfg.train_loss == LossKind::spectral) {
    const AugmentationGraph g = build_graph(space);
    if (cfg.train_k <= g.n()) {
      std::cout << "closed_form_loss = " << format_double(spectral_loss_minimum(laplacian_spectrum(g), cfg.train_k))
                << "\n";
    }
  }
  return 0;
}

int cmd_probe(const RunConfig& cfg, const std::string& embedding) {
  const Context ctx = prepare(cfg);
  const AugmentedSpace space = configured_space(ctx);
  const Embedding f = embedding.empty() ? train_configured(cfg, space).f : load_embedding(embedding);
  validate_embedding(f, space.n());
  const LinearHead head = fit_linear_head(f, space, cfg.probe);
  save_matrix(path_in(cfg, "head.mat"), head.W);
  std::cout << "ce_linear = " << format_double(ce_risk(f, head, space)) << "\n";
  try {
    std::cout << "ce_mean = " << format_double(ce_risk(f, mean_head(f, space), space)) << "\n";
  } catch (const std::invalid_argument& e) {
    std::cout << "ce_mean = (undefined: " << e.what() << ")\n";
  }
  std::cout << "error_node = " << format_double(classification_error(f, head, space, ErrorMeasure::node))
            << "\nerror_latent = " << format_double(classification_error(f, head, space, ErrorMeasure::latent))
            << "\nmajority_vote_error = " << format_double(majority_vote_error(f, head, space))
            << "\nw_norm = " << format_double(head.frobenius_norm()) << "\n";
  return 0;
}

int cmd_pipeline(const RunConfig& cfg, const Common& c, bool main_row, bool sweeps) {
  RunOptions opts;
  opts.threads = c.threads;
  opts.allow_violations = c.allow_violations;
  opts.main_row = main_row;
  opts.sweeps = sweeps;
  opts.inflation = sweeps;
  const RunResult r = run_pipeline(cfg, opts);
  std::cout << r.summary << "artifacts in " << r.directory << "\n";
  if (r.exit_code != 0) std::cerr << "error: " << r.violations << " violated bound(s)\n";
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ctlab: labeling-error laboratory for contrastive learning"};
  app.require_subcommand(1);

  Common common;
  auto* svd = app.add_subcommand("svd", "Truncated / randomized SVD on a matrix");
  std::string in, mode = "keep_top_q", method = "exact", out_file;
  std::size_t rows = 16, cols = 16, q = 1, index = 1, oversample = 8, power_iters = 2, ey = 0;
  std::uint64_t svd_seed = 0;
  svd->add_option("--in", in, "CTLAB-MAT input (default: Gaussian rows x cols)");
  svd->add_option("--rows", rows);
  svd->add_option("--cols", cols);
  svd->add_option("--mode", mode, "keep_top_q | discard_pair | discard_single");
  svd->add_option("--q", q);
  svd->add_option("--index", index, "1-based index for the discard modes");
  svd->add_option("--method", method, "exact | randomized");
  svd->add_option("--oversample", oversample);
  svd->add_option("--power-iters", power_iters);
  svd->add_option("--eckart-young", ey, "Number of random rank-q competitors to test");
  svd->add_option("--seed", svd_seed);
  svd->add_option("--out", out_file, "Write the truncated matrix here");

  auto* world = app.add_subcommand("world", "Generate and save the configured world");
  auto* graph = app.add_subcommand("graph", "Build the augmentation graph and its spectrum");
  auto* train = app.add_subcommand("train", "Train a free embedding table");
  auto* probe = app.add_subcommand("probe", "Fit and evaluate a linear probe");
  std::string embedding;
  probe->add_option("--embedding", embedding, "Embedding stem written by 'train' (default: train now)");
  auto* bounds = app.add_subcommand("bounds", "Bound checks for the configured row");
  auto* sweep = app.add_subcommand("sweep", "q-sweep, k-sweep and inflation protocols");
  auto* run = app.add_subcommand("run", "Full pipeline");
  for (auto* s : {world, graph, train, probe, bounds, sweep, run}) add_common(s, common);

  CLI11_PARSE(app, argc, argv);
  try {
    if (svd->parsed()) return cmd_svd(in, rows, cols, mode, q, index, method, oversample, power_iters, ey, svd_seed, out_file);
    const RunConfig cfg = load(common);
    if (world->parsed()) return cmd_world(cfg);
    if (graph->parsed()) return cmd_graph(cfg);
    if (train->parsed()) return cmd_train(cfg);
    if (probe->parsed()) return cmd_probe(cfg, embedding);
    if (bounds->parsed()) return cmd_pipeline(cfg, common, true, false);
    if (sweep->parsed()) return cmd_pipeline(cfg, common, false, true);
    if (run->parsed()) return cmd_pipeline(cfg, common, true, true);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

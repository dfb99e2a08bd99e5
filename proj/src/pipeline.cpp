#include "ctlab/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "ctlab/graph.hpp"
#include "ctlab/objectives.hpp"
#include "ctlab/rng.hpp"

namespace ctlab {

namespace fs = std::filesystem;

std::string Variant::label() const {
  switch (mode) {
    case SvdMode::none: return "none";
    case SvdMode::keep_top_q: return "top" + std::to_string(value);
    case SvdMode::discard_pair: return "pair" + std::to_string(value);
    case SvdMode::discard_single: return "single" + std::to_string(value);
  }
  return "none";
}

std::optional<TruncationSpec> Variant::truncation() const {
  switch (mode) {
    case SvdMode::none: return std::nullopt;
    case SvdMode::keep_top_q: return TruncationSpec::keep_top(value);
    case SvdMode::discard_pair: return TruncationSpec::discard_pair(value);
    case SvdMode::discard_single: return TruncationSpec::discard_single(value);
  }
  return std::nullopt;
}

namespace {

const std::vector<std::string>& columns() {
  static const std::vector<std::string> cols = {
      "variant",     "q",          "k",          "alpha_q",       "lambda_k1_q", "lambda_k_q",
      "bound_t4",    "probe_error", "infonce",   "spectral_loss", "ce_mean",     "ce_linear",
      "eps_min",     "eps_max",    "verdicts",   "seed"};
  return cols;
}

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::optional<double> parse_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("csv: bad number '" + s + "'");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

Variant configured_variant(const RunConfig& cfg) {
  switch (cfg.svd_mode) {
    case SvdMode::none: return {SvdMode::none, 0};
    case SvdMode::keep_top_q: return {SvdMode::keep_top_q, cfg.svd_q};
    case SvdMode::discard_pair: return {SvdMode::discard_pair, cfg.svd_pair_index};
    case SvdMode::discard_single: return {SvdMode::discard_single, cfg.svd_pair_index};
  }
  return {};
}

McConfig mc_config(const RunConfig& cfg, std::uint64_t seed) {
  McConfig mc;
  mc.samples = cfg.mc_samples;
  mc.replicates = cfg.mc_replicates;
  mc.seed = seed;
  mc.exact_n_max = cfg.exact_n_max;
  mc.exact_m_max = cfg.exact_m_max;
  return mc;
}

std::string verdict_string(const std::vector<BoundReport>& reports) {
  std::string out;
  for (const auto& r : reports) out += (out.empty() ? "" : ";") + r.theorem + "=" + to_string(r.verdict);
  return out;
}

}  // namespace

std::string csv_header() {
  std::string h;
  for (std::size_t i = 0; i < columns().size(); ++i) h += (i ? "," : "") + columns()[i];
  return h + "\n";
}

std::string csv_line(const SweepRow& r) {
  std::vector<std::string> cells = {r.variant,
                                    r.q ? std::to_string(*r.q) : "",
                                    std::to_string(r.k),
                                    cell(r.alpha_q),
                                    cell(r.lambda_k1_q),
                                    cell(r.lambda_k_q),
                                    cell(r.bound_t4),
                                    cell(r.probe_error),
                                    cell(r.infonce),
                                    cell(r.spectral_loss),
                                    cell(r.ce_mean),
                                    cell(r.ce_linear),
                                    cell(r.eps_min),
                                    cell(r.eps_max),
                                    r.verdicts,
                                    std::to_string(r.seed)};
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) line += (i ? "," : "") + cells[i];
  return line + "\n";
}

std::string rows_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = csv_header();
  for (const auto& r : rows) out += csv_line(r);
  return out;
}

std::vector<SweepRow> parse_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line + "\n" != csv_header()) throw std::invalid_argument("csv: unexpected header");
  std::vector<SweepRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto c = split_csv(line);
    if (c.size() != columns().size()) throw std::invalid_argument("csv: wrong cell count in '" + line + "'");
    SweepRow r;
    r.variant = c[0];
    if (!c[1].empty()) r.q = std::stoull(c[1]);
    r.k = std::stoull(c[2]);
    r.alpha_q = parse_opt(c[3]);
    r.lambda_k1_q = parse_opt(c[4]);
    r.lambda_k_q = parse_opt(c[5]);
    r.bound_t4 = parse_opt(c[6]);
    r.probe_error = parse_opt(c[7]);
    r.infonce = parse_opt(c[8]);
    r.spectral_loss = parse_opt(c[9]);
    r.ce_mean = parse_opt(c[10]);
    r.ce_linear = parse_opt(c[11]);
    r.eps_min = parse_opt(c[12]);
    r.eps_max = parse_opt(c[13]);
    r.verdicts = c[14];
    r.seed = std::stoull(c[15]);
    rows.push_back(std::move(r));
  }
  return rows;
}

World build_world(const RunConfig& cfg) {
  if (cfg.world_preset == "toy") return toy_world();
  WorldSpec spec = cfg.world;
  spec.seed = cfg.world_seed();
  return generate_world(spec);
}

std::vector<Transform> build_transforms(const RunConfig& cfg, const World& world) {
  std::vector<Transform> ts;
  if (cfg.transforms_preset == "planted") {
    ts = planted_transforms(world, cfg.planted_probs);
  } else if (cfg.transforms_preset == "identity") {
    ts = identity_transforms();
  } else if (cfg.transforms_preset == "toy") {
    ts = toy_transforms();
  } else {
    const std::uint64_t ps = derive_seed(cfg.seed, "patterns");
    for (const auto& d : cfg.transform_list) ts.push_back(parse_transform(d, world.rows(), world.cols(), ps));
  }
  validate_transforms(ts, world.rows(), world.cols());
  return ts;
}

Context prepare(const RunConfig& cfg) {
  validate_config(cfg);
  Context ctx;
  ctx.cfg = cfg;
  ctx.world = build_world(cfg);
  ctx.transforms = build_transforms(cfg, ctx.world);
  return ctx;
}

std::string row_key(const Variant& v, std::size_t k) { return "variant=" + v.label() + ";k=" + std::to_string(k); }

RowResult compute_row(const Context& ctx, const Variant& v, std::size_t k) {
  const RunConfig& cfg = ctx.cfg;
  RowResult res;
  res.key = row_key(v, k);
  SweepRow& row = res.row;
  row.variant = v.label();
  if (v.mode == SvdMode::keep_top_q) row.q = v.value;
  row.k = k;
  row.seed = derive_seed(cfg.seed, res.key);

  const World w = v.truncation() ? preprocess_world(ctx.world, *v.truncation()) : ctx.world;
  const AugmentedSpace space = build_augmented_space(w, ctx.transforms);
  row.alpha_q = labeling_error(space).alpha;
  const AugmentationGraph g = build_graph(space);
  const std::size_t n = g.n();
  res.n = n;
  if (k > n) {
    row.verdicts = "k_exceeds_n";
    res.notes.push_back("k = " + std::to_string(k) + " exceeds n = " + std::to_string(n));
    return res;
  }
  const Spectrum spec = laplacian_spectrum(g);
  row.lambda_k_q = spec.lambda(k);
  if (k < n) {
    row.lambda_k1_q = spec.lambda(k + 1);
  } else {
    res.notes.push_back("k = n: lambda_{k+1} and bound_t4 omitted");
  }
  const Embedding fstar = spectral_embedding(g, spec, k);
  row.spectral_loss = spectral_loss(fstar, space);

  std::vector<BoundReport> reports;
  if (cfg.train_loss == LossKind::spectral) {
    const LinearHead head = fit_linear_head(fstar, space, cfg.probe);
    row.probe_error = classification_error(fstar, head, space, cfg.probe_measure);
  }

  const bool need_nce =
      cfg.train_loss == LossKind::infonce || cfg.check_t1 || cfg.check_t3 || cfg.check_corollaries;
  if (need_nce) {
    TrainConfig tc;
    tc.loss = LossKind::infonce;
    tc.k = k;
    tc.M = cfg.train_M;
    tc.steps = cfg.train_steps;
    tc.step_size = cfg.train_step_size;
    tc.seed = derive_seed(row.seed, "train");
    tc.batch_size = cfg.train_batch;
    const TrainResult tr = train_free_embeddings(space, tc);
    const Embedding& f = tr.f;
    const McConfig mc = mc_config(cfg, derive_seed(row.seed, "mc"));
    row.infonce = infonce_population(f, space, cfg.train_M, mc).value;
    const LinearHead head = fit_linear_head(f, space, cfg.probe);
    row.ce_linear = ce_risk(f, head, space);
    if (cfg.train_loss == LossKind::infonce) row.probe_error = classification_error(f, head, space, cfg.probe_measure);
    const EpsAlignment eps = alignment_eps(f, space);
    if (eps.has_false_positives) {
      row.eps_min = eps.eps_min;
      row.eps_max = eps.eps_max;
    }
    bool mean_ok = true;
    try {
      row.ce_mean = ce_risk(f, mean_head(f, space), space);
    } catch (const std::invalid_argument& e) {
      mean_ok = false;
      res.notes.push_back(std::string("mean head undefined: ") + e.what());
    }
    const CheckConfig cc{cfg.train_M, mc};
    auto undefined_report = [&](const std::string& id) {
      BoundReport r;
      r.theorem = id;
      r.undefined = true;
      r.notes.push_back("mean head undefined: a class has zero marginal mass");
      finalize(r);
      return r;
    };
    if (cfg.check_t1) reports.push_back(mean_ok ? theorem1_check(f, space, cc) : undefined_report("t1"));
    if (cfg.check_t3) reports.push_back(mean_ok ? theorem3_check(f, space, cc) : undefined_report("t3"));
    if (cfg.check_corollaries) {
      if (mean_ok) {
        for (auto& r : corollary_reports(f, head, space, cc)) reports.push_back(std::move(r));
      } else {
        reports.push_back(undefined_report("corollary_t1"));
        reports.push_back(undefined_report("corollary_t3"));
      }
    }
  }
  if (cfg.check_t4) {
    Theorem4Config t4;
    t4.probe = cfg.probe;
    t4.measure = cfg.probe_measure;
    t4.seed = derive_seed(row.seed, "t4");
    Theorem4Result r4 = theorem4_check(space, k, t4);
    row.bound_t4 = r4.bound;
    reports.push_back(std::move(r4.report));
  }
  row.verdicts = verdict_string(reports);
  res.reports = std::move(reports);
  return res;
}

std::vector<RowResult> compute_rows(const Context& ctx, const std::vector<RowRequest>& requests,
                                    unsigned threads) {
  // Identical keys are computed once.
  std::vector<std::string> keys;
  std::map<std::string, std::size_t> unique;
  std::vector<RowRequest> work;
  for (const auto& r : requests) {
    const std::string key = row_key(r.variant, r.k);
    keys.push_back(key);
    if (unique.emplace(key, work.size()).second) work.push_back(r);
  }
  std::vector<RowResult> done(work.size());
  std::vector<std::exception_ptr> errors(work.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      try {
        done[i] = compute_row(ctx, work[i].variant, work[i].k);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned nt = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(work.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < nt; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<RowResult> out;
  for (const auto& key : keys) out.push_back(done[unique.at(key)]);
  return out;
}

std::vector<InflationRow> inflation_rows(const Context& ctx, std::size_t factor, const std::vector<std::size_t>& ks) {
  const World inflated = inflate(ctx.world, factor, derive_seed(ctx.cfg.seed, "inflation"));
  const Variant v = configured_variant(ctx.cfg);
  auto prep = [&](const World& w) { return v.truncation() ? preprocess_world(w, *v.truncation()) : w; };
  const AugmentedSpace sb = build_augmented_space(prep(ctx.world), ctx.transforms);
  const AugmentedSpace si = build_augmented_space(prep(inflated), ctx.transforms);
  const AugmentationGraph gb = build_graph(sb), gi = build_graph(si);
  const Spectrum eb = laplacian_spectrum(gb), ei = laplacian_spectrum(gi);
  const double ab = labeling_error(sb).alpha, ai = labeling_error(si).alpha;
  std::vector<InflationRow> out;
  for (std::size_t k : ks) {
    InflationRow r;
    r.k = k;
    r.n_base = gb.n();
    r.n_inflated = gi.n();
    r.alpha_base = ab;
    r.alpha_inflated = ai;
    if (k < gb.n()) r.lambda_k1_base = eb.lambda(k + 1);
    if (k < gi.n()) r.lambda_k1_inflated = ei.lambda(k + 1);
    out.push_back(r);
  }
  return out;
}

std::string inflation_csv(const std::vector<InflationRow>& rows) {
  std::string out = "k,n_base,n_inflated,alpha_base,alpha_inflated,lambda_k1_base,lambda_k1_inflated\n";
  for (const auto& r : rows) {
    out += std::to_string(r.k) + "," + std::to_string(r.n_base) + "," + std::to_string(r.n_inflated) + "," +
           format_double(r.alpha_base) + "," + format_double(r.alpha_inflated) + "," + cell(r.lambda_k1_base) + "," +
           cell(r.lambda_k1_inflated) + "\n";
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << text;
  if (!os) throw std::runtime_error("write failed for " + path);
}

namespace {

std::vector<SweepRow> rows_of(const std::vector<RowResult>& rs) {
  std::vector<SweepRow> out;
  for (const auto& r : rs) out.push_back(r.row);
  return out;
}

// Smallest index attaining the minimum of a present column.
template <typename Get>
std::optional<std::size_t> argmin_of(const std::vector<RowResult>& rs, Get get) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const std::optional<double> v = get(rs[i].row);
    if (v && (!best || *v < *get(rs[*best].row))) best = i;
  }
  return best;
}

std::string json_rows(const std::vector<RowResult>& rs, const std::string& group) {
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (const auto& r : rs) {
    nlohmann::ordered_json j;
    j["group"] = group;
    j["key"] = r.key;
    j["seed"] = r.row.seed;
    j["n"] = r.n;
    j["notes"] = r.notes;
    j["reports"] = nlohmann::ordered_json::parse(reports_to_json(r.reports));
    a.push_back(j);
  }
  return a.dump(2);
}

}  // namespace

bool strict_interior_minimum(const std::vector<std::optional<double>>& values, double tol) {
  std::vector<double> v;
  for (const auto& x : values)
    if (x) v.push_back(*x);
  if (v.size() < 3) return false;
  const double lo = *std::min_element(v.begin() + 1, v.end() - 1);
  return v.front() > lo + tol && v.back() > lo + tol;
}

RunResult run_pipeline(const RunConfig& cfg, const RunOptions& opts) {
  const Context ctx = prepare(cfg);
  RunResult res;
  res.directory = cfg.out_dir;
  const Variant main_v = configured_variant(cfg);

  std::vector<RowRequest> reqs;
  std::size_t n_main = 0, n_q = 0;
  if (opts.main_row) {
    reqs.push_back({main_v, cfg.train_k});
    n_main = 1;
  }
  if (opts.sweeps && !cfg.svd_sweep.empty()) {
    reqs.push_back({{SvdMode::none, 0}, cfg.train_k});
    for (std::size_t q : cfg.svd_sweep) reqs.push_back({{SvdMode::keep_top_q, q}, cfg.train_k});
    n_q = cfg.svd_sweep.size() + 1;
  }
  if (opts.sweeps)
    for (std::size_t k : cfg.k_sweep) reqs.push_back({main_v, k});
  const std::vector<RowResult> all = compute_rows(ctx, reqs, opts.threads);
  res.main.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_main));
  res.sweep_q.assign(all.begin() + static_cast<std::ptrdiff_t>(n_main),
                     all.begin() + static_cast<std::ptrdiff_t>(n_main + n_q));
  res.sweep_k.assign(all.begin() + static_cast<std::ptrdiff_t>(n_main + n_q), all.end());

  std::vector<std::size_t> inflation_ks = cfg.k_sweep;
  if (inflation_ks.empty()) inflation_ks.push_back(cfg.train_k);
  if (opts.inflation && cfg.inflation_factor > 1) {
    res.inflation = inflation_rows(ctx, cfg.inflation_factor, inflation_ks);
  }

  for (const auto& r : all)
    for (const auto& rep : r.reports)
      if (is_violation(rep.verdict)) ++res.violations;

  std::ostringstream sum;
  sum << kVersion << " summary\n";
  for (const auto& r : res.main) sum << "main: " << r.key << " verdicts " << r.row.verdicts << "\n";
  if (!res.sweep_q.empty()) {
    const std::vector<RowResult> qrows(res.sweep_q.begin() + 1, res.sweep_q.end());
    std::vector<std::optional<double>> alphas, errs;
    for (const auto& r : qrows) {
      alphas.push_back(r.row.alpha_q);
      errs.push_back(r.row.probe_error);
    }
    if (const auto a = argmin_of(qrows, [](const SweepRow& r) { return r.alpha_q; })) {
      const double amin = *qrows[*a].row.alpha_q;
      sum << "sweep_q: alpha_q minimum " << format_double(amin) << " attained at q =";
      for (const auto& r : qrows)
        if (r.row.alpha_q && *r.row.alpha_q <= amin + 1e-12) sum << " " << *r.row.q;
      sum << "\n";
    }
    if (const auto p = argmin_of(qrows, [](const SweepRow& r) { return r.probe_error; })) {
      sum << "sweep_q: first argmin probe_error at q = " << *qrows[*p].row.q
          << "; strict interior minimum: " << (strict_interior_minimum(errs) ? "yes" : "no") << "\n";
    }
  }
  if (!res.sweep_k.empty()) {
    std::vector<std::optional<double>> errs;
    for (const auto& r : res.sweep_k) errs.push_back(r.row.probe_error);
    if (const auto p = argmin_of(res.sweep_k, [](const SweepRow& r) { return r.probe_error; })) {
      sum << "sweep_k: first argmin probe_error at k = " << res.sweep_k[*p].row.k
          << "; strict interior minimum: " << (strict_interior_minimum(errs) ? "yes" : "no")
          << "; moderate k is relative to n = " << res.sweep_k[*p].n << " nodes\n";
    }
  }
  if (!res.inflation.empty()) {
    bool ok = true;
    for (const auto& r : res.inflation)
      if (r.lambda_k1_base && r.lambda_k1_inflated && *r.lambda_k1_inflated < *r.lambda_k1_base - 1e-8) ok = false;
    sum << "inflation x" << cfg.inflation_factor << ": lambda_{k+1} not decreased at every swept k: "
        << (ok ? "yes" : "no") << "\n";
  }
  sum << "violations: " << res.violations << "\n";
  res.summary = sum.str();

  fs::create_directories(cfg.out_dir);
  const fs::path dir(cfg.out_dir);
  std::ostringstream man;
  man << "version = " << kVersion << "\n";
  man << "csv_columns = " << csv_header();
  man << "global_seed = " << cfg.seed << "\n";
  man << "world_seed = " << cfg.world_seed() << "\n";
  for (const auto& h : ctx.world.history) man << "world_history = " << h << "\n";
  man << "transforms = " << ctx.transforms.size() << "\n";
  for (const auto& r : all) man << "row_seed = " << r.key << " " << r.row.seed << "\n";
  man << "\n# config\n" << echo_config(cfg, false);
  write_text((dir / "manifest.txt").string(), man.str());
  write_text((dir / "summary.txt").string(), res.summary);
  if (cfg.emit_csv) {
    if (!res.main.empty()) write_text((dir / "rows.csv").string(), rows_to_csv(rows_of(res.main)));
    if (!res.sweep_q.empty()) write_text((dir / "sweep_q.csv").string(), rows_to_csv(rows_of(res.sweep_q)));
    if (!res.sweep_k.empty()) write_text((dir / "sweep_k.csv").string(), rows_to_csv(rows_of(res.sweep_k)));
    if (!res.inflation.empty()) write_text((dir / "inflation.csv").string(), inflation_csv(res.inflation));
  }
  if (cfg.emit_json) {
    nlohmann::ordered_json j;
    j["version"] = kVersion;
    j["main"] = nlohmann::ordered_json::parse(json_rows(res.main, "main"));
    j["sweep_q"] = nlohmann::ordered_json::parse(json_rows(res.sweep_q, "sweep_q"));
    j["sweep_k"] = nlohmann::ordered_json::parse(json_rows(res.sweep_k, "sweep_k"));
    write_text((dir / "reports.json").string(), j.dump(2) + "\n");
  }
  res.exit_code = (res.violations > 0 && !opts.allow_violations) ? 2 : 0;
  return res;
}

}  // namespace ctlab

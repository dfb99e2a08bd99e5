#include "ctlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ctlab {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + xs[i];
  return out;
}

template <typename T>
T num(const std::string& key, const std::string& v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size()) {
    throw std::invalid_argument(key + ": cannot parse '" + v + "'");
  }
  return out;
}

std::size_t count(const std::string& key, const std::string& v) { return num<std::size_t>(key, v); }
double real(const std::string& key, const std::string& v) { return num<double>(key, v); }

std::vector<std::size_t> counts(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(v)) out.push_back(count(key, item));
  return out;
}

std::string counts_text(const std::vector<std::size_t>& xs) {
  std::vector<std::string> s;
  for (auto x : xs) s.push_back(std::to_string(x));
  return join(s);
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"seed", [](RunConfig& c, const std::string& k, const std::string& v) { c.seed = num<std::uint64_t>(k, v); }},
      {"world.preset",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v != "planted" && v != "toy") throw std::invalid_argument(k + ": expected planted or toy");
         c.world_preset = v;
       }},
      {"world.K", [](RunConfig& c, const std::string& k, const std::string& v) { c.world.K = count(k, v); }},
      {"world.per_class",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.world.per_class = count(k, v); }},
      {"world.m", [](RunConfig& c, const std::string& k, const std::string& v) { c.world.m = count(k, v); }},
      {"world.mp", [](RunConfig& c, const std::string& k, const std::string& v) { c.world.mp = count(k, v); }},
      {"world.q_star", [](RunConfig& c, const std::string& k, const std::string& v) { c.world.q_star = count(k, v); }},
      {"world.nuisance_rank",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.world.nuisance_rank = count(k, v); }},
      {"world.nuisance_confusion",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.world.nuisance_confusion = real(k, v); }},
      {"world.noise_scale",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.world.noise_scale = real(k, v); }},
      {"world.seed",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.world.seed = num<std::uint64_t>(k, v);
         c.world_seed_set = true;
       }},
      {"world.bands", [](RunConfig& c, const std::string& k, const std::string& v) { c.world.bands = count(k, v); }},
      {"world.core_boost",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.world.core_boost = real(k, v); }},
      {"transforms.preset",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v != "planted" && v != "identity" && v != "toy" && v != "list") {
           throw std::invalid_argument(k + ": expected planted, identity, toy or list");
         }
         c.transforms_preset = v;
       }},
      {"transforms.planted_probs",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const auto xs = split_list(v);
         if (xs.size() != 4) throw std::invalid_argument(k + ": expected 4 probabilities");
         c.planted_probs = {real(k, xs[0]), real(k, xs[1]), real(k, xs[2]), real(k, xs[3])};
       }},
      {"transforms.list",
       [](RunConfig& c, const std::string&, const std::string& v) { c.transform_list = split_list(v); }},
      {"svd.mode",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "none") c.svd_mode = SvdMode::none;
         else if (v == "keep_top_q") c.svd_mode = SvdMode::keep_top_q;
         else if (v == "discard_pair") c.svd_mode = SvdMode::discard_pair;
         else if (v == "discard_single") c.svd_mode = SvdMode::discard_single;
         else throw std::invalid_argument(k + ": expected none, keep_top_q, discard_pair or discard_single");
       }},
      {"svd.q", [](RunConfig& c, const std::string& k, const std::string& v) { c.svd_q = count(k, v); }},
      {"svd.pair_index",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.svd_pair_index = count(k, v); }},
      {"svd.sweep", [](RunConfig& c, const std::string& k, const std::string& v) { c.svd_sweep = counts(k, v); }},
      {"train.loss",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "spectral") c.train_loss = LossKind::spectral;
         else if (v == "infonce") c.train_loss = LossKind::infonce;
         else throw std::invalid_argument(k + ": expected spectral or infonce");
       }},
      {"train.k", [](RunConfig& c, const std::string& k, const std::string& v) { c.train_k = count(k, v); }},
      {"train.k_sweep", [](RunConfig& c, const std::string& k, const std::string& v) { c.k_sweep = counts(k, v); }},
      {"train.steps", [](RunConfig& c, const std::string& k, const std::string& v) { c.train_steps = count(k, v); }},
      {"train.step_size",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.train_step_size = real(k, v); }},
      {"train.M", [](RunConfig& c, const std::string& k, const std::string& v) { c.train_M = count(k, v); }},
      {"train.batch", [](RunConfig& c, const std::string& k, const std::string& v) { c.train_batch = count(k, v); }},
      {"probe.steps", [](RunConfig& c, const std::string& k, const std::string& v) { c.probe.steps = count(k, v); }},
      {"probe.step_size",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.probe.step_size = real(k, v); }},
      {"probe.l2", [](RunConfig& c, const std::string& k, const std::string& v) { c.probe.l2 = real(k, v); }},
      {"probe.measure",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "latent") c.probe_measure = ErrorMeasure::latent;
         else if (v == "node") c.probe_measure = ErrorMeasure::node;
         else throw std::invalid_argument(k + ": expected latent or node");
       }},
      {"bounds.which",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.check_t1 = c.check_t3 = c.check_t4 = c.check_corollaries = false;
         for (const auto& item : split_list(v)) {
           if (item == "t1") c.check_t1 = true;
           else if (item == "t3") c.check_t3 = true;
           else if (item == "t4") c.check_t4 = true;
           else if (item == "corollaries") c.check_corollaries = true;
           else throw std::invalid_argument(k + ": unknown check '" + item + "'");
         }
       }},
      {"bounds.mc.samples",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.mc_samples = count(k, v); }},
      {"bounds.mc.replicates",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.mc_replicates = count(k, v); }},
      {"bounds.exact_n_max",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.exact_n_max = count(k, v); }},
      {"bounds.exact_m_max",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.exact_m_max = count(k, v); }},
      {"inflation.factor",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.inflation_factor = count(k, v); }},
      {"output.directory", [](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = v; }},
      {"output.formats",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.emit_csv = c.emit_json = false;
         for (const auto& item : split_list(v)) {
           if (item == "csv") c.emit_csv = true;
           else if (item == "json") c.emit_json = true;
           else throw std::invalid_argument(k + ": unknown format '" + item + "'");
         }
       }},
  };
  return table;
}

void assign(RunConfig& cfg, const std::string& key, const std::string& value) {
  const auto& table = setters();
  auto it = table.find(key);
  if (it == table.end()) throw std::invalid_argument("unknown key '" + key + "'");
  it->second(cfg, key, value);
}

}  // namespace

std::string describe(SvdMode m) {
  switch (m) {
    case SvdMode::none: return "none";
    case SvdMode::keep_top_q: return "keep_top_q";
    case SvdMode::discard_pair: return "discard_pair";
    case SvdMode::discard_single: return "discard_single";
  }
  return "none";
}

std::optional<TruncationSpec> RunConfig::truncation() const {
  switch (svd_mode) {
    case SvdMode::none: return std::nullopt;
    case SvdMode::keep_top_q: return TruncationSpec::keep_top(svd_q);
    case SvdMode::discard_pair: return TruncationSpec::discard_pair(svd_pair_index);
    case SvdMode::discard_single: return TruncationSpec::discard_single(svd_pair_index);
  }
  return std::nullopt;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw std::invalid_argument(where + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      static const std::vector<std::string> known = {"world", "transforms", "svd",       "train",
                                                     "probe", "bounds",     "inflation", "output"};
      if (std::find(known.begin(), known.end(), section) == known.end()) {
        throw std::invalid_argument(where + "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument(where + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string full = section.empty() ? key : section + "." + key;
    try {
      assign(cfg, full, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(where + "[" + section + "] " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path);
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw std::invalid_argument("--set: expected key=value, got '" + assignment + "'");
  try {
    assign(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("--set: ") + e.what());
  }
}

void validate_config(const RunConfig& cfg) {
  std::size_t m = 1, mp = 3;
  if (cfg.world_preset == "planted") {
    validate_world_spec(cfg.world);
    m = cfg.world.m;
    mp = cfg.world.mp;
  } else if (cfg.transforms_preset == "planted") {
    throw std::invalid_argument("transforms.preset: planted requires world.preset = planted");
  }
  if (cfg.transforms_preset == "toy" && cfg.world_preset != "toy") {
    throw std::invalid_argument("transforms.preset: toy requires world.preset = toy");
  }
  if (cfg.transforms_preset == "list" && cfg.transform_list.empty()) {
    throw std::invalid_argument("transforms.list: empty list with preset = list");
  }
  if (auto t = cfg.truncation()) validate_truncation(*t, m, mp);
  for (std::size_t q : cfg.svd_sweep) validate_truncation(TruncationSpec::keep_top(q), m, mp);
  if (cfg.train_k < 1) throw std::invalid_argument("train.k: must be >= 1");
  for (std::size_t k : cfg.k_sweep)
    if (k < 1) throw std::invalid_argument("train.k_sweep: entries must be >= 1");
  if (cfg.train_M < 1) throw std::invalid_argument("train.M: must be >= 1");
  if (!(cfg.train_step_size > 0.0)) throw std::invalid_argument("train.step_size: must be positive");
  if (!(cfg.probe.step_size > 0.0)) throw std::invalid_argument("probe.step_size: must be positive");
  if (cfg.probe.l2 < 0.0) throw std::invalid_argument("probe.l2: must be >= 0");
  if (cfg.mc_replicates < 2) throw std::invalid_argument("bounds.mc.replicates: must be >= 2");
  if (cfg.mc_samples < 1) throw std::invalid_argument("bounds.mc.samples: must be >= 1");
  if (cfg.inflation_factor < 1) throw std::invalid_argument("inflation.factor: must be >= 1");
  if (cfg.inflation_factor > 1 && cfg.world_preset != "planted") {
    throw std::invalid_argument("inflation.factor: inflation requires world.preset = planted");
  }
  if (cfg.out_dir.empty()) throw std::invalid_argument("output.directory: empty");
}

std::string echo_config(const RunConfig& c, bool include_directory) {
  std::ostringstream os;
  os << "seed = " << c.seed << "\n\n[world]\n";
  os << "preset = " << c.world_preset << "\n";
  os << "K = " << c.world.K << "\n";
  os << "per_class = " << c.world.per_class << "\n";
  os << "m = " << c.world.m << "\n";
  os << "mp = " << c.world.mp << "\n";
  os << "q_star = " << c.world.q_star << "\n";
  os << "nuisance_rank = " << c.world.nuisance_rank << "\n";
  os << "nuisance_confusion = " << format_double(c.world.nuisance_confusion) << "\n";
  os << "noise_scale = " << format_double(c.world.noise_scale) << "\n";
  if (c.world_seed_set) os << "seed = " << c.world.seed << "\n";
  os << "bands = " << c.world.bands << "\n";
  os << "core_boost = " << format_double(c.world.core_boost) << "\n";
  os << "\n[transforms]\npreset = " << c.transforms_preset << "\n";
  os << "planted_probs = " << format_double(c.planted_probs.identity) << ", "
     << format_double(c.planted_probs.band_mask) << ", " << format_double(c.planted_probs.core_mask) << ", "
     << format_double(c.planted_probs.core_band_mask) << "\n";
  if (!c.transform_list.empty()) os << "list = " << join(c.transform_list) << "\n";
  os << "\n[svd]\nmode = " << describe(c.svd_mode) << "\n";
  os << "q = " << c.svd_q << "\n";
  os << "pair_index = " << c.svd_pair_index << "\n";
  os << "sweep = " << counts_text(c.svd_sweep) << "\n";
  os << "\n[train]\nloss = " << (c.train_loss == LossKind::spectral ? "spectral" : "infonce") << "\n";
  os << "k = " << c.train_k << "\n";
  os << "k_sweep = " << counts_text(c.k_sweep) << "\n";
  os << "steps = " << c.train_steps << "\n";
  os << "step_size = " << format_double(c.train_step_size) << "\n";
  os << "M = " << c.train_M << "\n";
  os << "batch = " << c.train_batch << "\n";
  os << "\n[probe]\nsteps = " << c.probe.steps << "\n";
  os << "step_size = " << format_double(c.probe.step_size) << "\n";
  os << "l2 = " << format_double(c.probe.l2) << "\n";
  os << "measure = " << (c.probe_measure == ErrorMeasure::latent ? "latent" : "node") << "\n";
  std::vector<std::string> which;
  if (c.check_t1) which.push_back("t1");
  if (c.check_t3) which.push_back("t3");
  if (c.check_t4) which.push_back("t4");
  if (c.check_corollaries) which.push_back("corollaries");
  os << "\n[bounds]\nwhich = " << join(which) << "\n";
  os << "mc.samples = " << c.mc_samples << "\n";
  os << "mc.replicates = " << c.mc_replicates << "\n";
  os << "exact_n_max = " << c.exact_n_max << "\n";
  os << "exact_m_max = " << c.exact_m_max << "\n";
  os << "\n[inflation]\nfactor = " << c.inflation_factor << "\n";
  std::vector<std::string> formats;
  if (c.emit_csv) formats.push_back("csv");
  if (c.emit_json) formats.push_back("json");
  os << "\n[output]\n";
  if (include_directory) os << "directory = " << c.out_dir << "\n";
  os << "formats = " << join(formats) << "\n";
  return os.str();
}

}  // namespace ctlab

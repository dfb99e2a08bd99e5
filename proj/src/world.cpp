#include "ctlab/world.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ctlab/rng.hpp"

namespace ctlab {

namespace {

constexpr double kDedupTol = 1e-12;

[[noreturn]] void bad_spec(const std::string& field, const std::string& why) {
  throw std::invalid_argument("world." + field + ": " + why);
}

std::vector<std::vector<std::size_t>> band_subsets(std::size_t bands) {
  // Nonempty subsets ordered by size, then lexicographically.
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t size = 1; size <= bands; ++size) {
    std::vector<bool> pick(bands, false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(size), true);
    do {
      std::vector<std::size_t> s;
      for (std::size_t b = 0; b < bands; ++b)
        if (pick[b]) s.push_back(b);
      out.push_back(std::move(s));
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  return out;
}

std::vector<std::size_t> band_rows(const BlockGeometry& g, std::size_t block, std::size_t band) {
  // Split the core of a block into `bands` nearly equal bands.
  const std::size_t base = g.core_rows / g.bands;
  const std::size_t extra = g.core_rows % g.bands;
  std::size_t start = 0;
  for (std::size_t b = 0; b < band; ++b) start += base + (b < extra ? 1 : 0);
  const std::size_t len = base + (band < extra ? 1 : 0);
  std::vector<std::size_t> rows(len);
  for (std::size_t i = 0; i < len; ++i) rows[i] = block * g.block_rows + start + i;
  return rows;
}

class PlantedGenerator {
 public:
  explicit PlantedGenerator(const WorldSpec& s) : spec_(s) {
    validate_world_spec(s);
    geometry_.block_rows = s.m / s.K;
    geometry_.core_rows = geometry_.block_rows / 2;
    geometry_.bands = s.bands;
    patterns_ = band_subsets(s.bands);
    build_templates();
  }

  const std::vector<Matrix>& templates() const { return templates_; }
  const BlockGeometry& geometry() const { return geometry_; }

  std::vector<std::size_t> pattern_for(std::size_t cls, std::size_t j, std::uint64_t stream) const {
    const std::size_t np = patterns_.size();
    const std::size_t cycle = j / np;
    const std::size_t pos = j % np;
    CounterRng rng(derive_seed(stream, "patterns/" + std::to_string(cls) + "/" + std::to_string(cycle)));
    std::vector<std::size_t> perm(np);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = np; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    return patterns_[perm[pos]];
  }

  Matrix draw(std::size_t cls, const std::vector<std::size_t>& pattern, std::uint64_t noise_seed) const {
    Matrix x = templates_[cls];
    if (spec_.nuisance_confusion > 0.0) {
      const std::size_t w = (cls + 1) % spec_.K;
      const Matrix& src = nuisance_source_[w];
      const double scale = spec_.nuisance_confusion * kappa_[w];
      for (std::size_t b : pattern)
        for (std::size_t r : band_rows(geometry_, w, b))
          for (std::size_t c = 0; c < x.cols(); ++c) x(r, c) += scale * src(r, c);
    }
    if (spec_.noise_scale > 0.0) {
      const Matrix g = gaussian_matrix(x.rows(), x.cols(), noise_seed);
      for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] += spec_.noise_scale * g.data()[i];
    }
    return x;
  }

 private:
  void build_templates() {
    const WorldSpec& s = spec_;
    const std::size_t h = geometry_.block_rows;
    const std::size_t hc = geometry_.core_rows;
    CounterRng rng(derive_seed(s.seed, "generator"));
    auto gauss = [&](std::size_t r, std::size_t c) { return gaussian_matrix(r, c, rng.below(UINT64_MAX)); };

    const bool background = s.q_star >= 2;
    const std::size_t per_class_dirs = background ? s.q_star - 1 : 1;
    const std::size_t nright = (background ? 1 : 0) + s.K * per_class_dirs;
    const Matrix right = orthonormalize(gauss(s.mp, nright)).basis;

    std::vector<double> sig(per_class_dirs);
    for (std::size_t i = 0; i < per_class_dirs; ++i) sig[i] = 3.0 * std::pow(0.8, static_cast<double>(i));
    const double sigma_background = 4.0;
    const double sigma_min = sig.back();
    const std::size_t nr = std::min(s.nuisance_rank, per_class_dirs);

    std::vector<std::vector<double>> wvec(s.K, std::vector<double>(s.m, 0.0));
    std::vector<Matrix> uvec(s.K);
    for (std::size_t c = 0; c < s.K; ++c) {
      const std::size_t r0 = c * h;
      if (background) {
        const Matrix g = gauss(h - hc, 1);
        double nn = 0.0;
        for (std::size_t i = 0; i < h - hc; ++i) nn += g(i, 0) * g(i, 0);
        for (std::size_t i = 0; i < h - hc; ++i) wvec[c][r0 + hc + i] = g(i, 0) / std::sqrt(nn);
      }
      const Matrix g = gauss(h, per_class_dirs);
      Matrix u(s.m, per_class_dirs);
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < per_class_dirs; ++j)
          u(r0 + i, j) = g(i, j) * (i < hc ? s.core_boost : 1.0);
      if (background) {
        for (std::size_t j = 0; j < per_class_dirs; ++j) {
          double d = 0.0;
          for (std::size_t i = 0; i < s.m; ++i) d += wvec[c][i] * u(i, j);
          for (std::size_t i = 0; i < s.m; ++i) u(i, j) -= d * wvec[c][i];
        }
      }
      uvec[c] = orthonormalize(u).basis;
    }

    templates_.assign(s.K, Matrix(s.m, s.mp));
    nuisance_source_.assign(s.K, Matrix(s.m, s.mp));
    kappa_.assign(s.K, 0.0);
    for (std::size_t c = 0; c < s.K; ++c) {
      Matrix& t = templates_[c];
      if (background) {
        for (std::size_t i = 0; i < s.m; ++i) {
          double bu = 0.0;
          for (std::size_t cc = 0; cc < s.K; ++cc) bu += wvec[cc][i];
          bu /= std::sqrt(static_cast<double>(s.K));
          if (bu == 0.0) continue;
          for (std::size_t j = 0; j < s.mp; ++j) t(i, j) += sigma_background * bu * right(j, 0);
        }
      }
      const std::size_t vbase = (background ? 1 : 0) + c * per_class_dirs;
      for (std::size_t d = 0; d < per_class_dirs; ++d) {
        for (std::size_t i = 0; i < s.m; ++i) {
          const double ui = uvec[c](i, d);
          if (ui == 0.0) continue;
          for (std::size_t j = 0; j < s.mp; ++j) {
            const double val = sig[d] * ui * right(j, vbase + d);
            t(i, j) += val;
            if (d < nr && i >= c * h && i < c * h + hc) nuisance_source_[c](i, j) += val;
          }
        }
      }
      // Scale so that even the full-core nuisance stays below sigma_min.
      const double top = svd_full(nuisance_source_[c]).S.front();
      kappa_[c] = top > 0.0 ? 0.9 * sigma_min / top : 0.0;
    }
  }

  WorldSpec spec_;
  BlockGeometry geometry_;
  std::vector<std::vector<std::size_t>> patterns_;
  std::vector<Matrix> templates_;
  std::vector<Matrix> nuisance_source_;  // class part restricted to its core rows
  std::vector<double> kappa_;
};

double parse_real(const std::string& tok, const std::string& what) {
  auto one = [&](const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (s.empty() || ec != std::errc() || ptr != last) {
      throw std::invalid_argument(what + ": cannot parse '" + tok + "'");
    }
    return v;
  };
  const auto slash = tok.find('/');
  if (slash == std::string::npos) return one(tok);
  const double den = one(tok.substr(slash + 1));
  if (den == 0.0) throw std::invalid_argument(what + ": zero denominator in '" + tok + "'");
  return one(tok.substr(0, slash)) / den;
}

std::size_t parse_count(const std::string& tok, const std::string& what) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw std::invalid_argument(what + ": cannot parse count '" + tok + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

void validate_world_spec(const WorldSpec& s) {
  if (s.K < 2) bad_spec("K", "need at least 2 classes");
  if (s.per_class < 1) bad_spec("per_class", "need at least 1 original per class");
  if (s.q_star < 1) bad_spec("q_star", "must be >= 1");
  if (s.m < 1 || s.mp < 1) bad_spec("m", "dimensions must be positive");
  if (s.q_star + s.nuisance_rank > std::min(s.m, s.mp)) {
    bad_spec("q_star", "q_star + nuisance_rank = " + std::to_string(s.q_star + s.nuisance_rank) +
                           " exceeds min(m, m') = " + std::to_string(std::min(s.m, s.mp)));
  }
  if (!(s.nuisance_confusion >= 0.0 && s.nuisance_confusion <= 1.0)) {
    bad_spec("nuisance_confusion", "must lie in [0, 1]");
  }
  if (!(s.noise_scale >= 0.0) || !std::isfinite(s.noise_scale)) bad_spec("noise_scale", "must be >= 0");
  if (!(s.core_boost > 0.0) || !std::isfinite(s.core_boost)) bad_spec("core_boost", "must be > 0");
  if (s.bands < 1) bad_spec("bands", "must be >= 1");
  const std::size_t h = s.m / s.K;
  const std::size_t hc = h / 2;
  if (hc < s.bands) {
    bad_spec("m", "block core of " + std::to_string(hc) + " rows cannot hold " +
                      std::to_string(s.bands) + " bands; need m >= " + std::to_string(2 * s.K * s.bands));
  }
  const std::size_t dirs = s.q_star >= 2 ? s.q_star - 1 : 1;
  if (s.q_star >= 2 && h < s.q_star) {
    bad_spec("m", "each class block needs at least q_star = " + std::to_string(s.q_star) + " rows");
  }
  const std::size_t nright = (s.q_star >= 2 ? 1 : 0) + s.K * dirs;
  if (s.mp < nright) {
    bad_spec("mp", "planted construction needs m' >= " + std::to_string(nright) + " orthogonal right vectors");
  }
  if (s.bands > 16) bad_spec("bands", "at most 16 bands supported");
}

int ground_truth_label(const Matrix& payload, const std::vector<Matrix>& templates) {
  if (templates.empty()) throw std::invalid_argument("ground_truth_label: no templates");
  int best = 0;
  double best_d = frobenius_distance_sq(payload, templates[0]);
  for (std::size_t j = 1; j < templates.size(); ++j) {
    const double d = frobenius_distance_sq(payload, templates[j]);
    if (d < best_d - 1e-12 * std::max(1.0, best_d)) {
      best = static_cast<int>(j);
      best_d = d;
    }
  }
  return best;
}

int ground_truth_label(const Matrix& payload, const World& world) {
  return ground_truth_label(payload, world.templates);
}

World generate_world(const WorldSpec& spec) {
  const PlantedGenerator gen(spec);
  World w;
  w.spec = spec;
  w.geometry = gen.geometry();
  w.templates = gen.templates();
  const std::uint64_t stream = derive_seed(spec.seed, "nuisance");
  for (std::size_t c = 0; c < spec.K; ++c) {
    for (std::size_t j = 0; j < spec.per_class; ++j) {
      Original o;
      o.id = "o" + std::to_string(c) + "_" + std::to_string(j);
      o.payload = gen.draw(c, gen.pattern_for(c, j, stream),
                           derive_seed(spec.seed, "noise/" + o.id));
      o.label = static_cast<int>(c);
      o.payload_label = ground_truth_label(o.payload, w.templates);
      w.originals.push_back(std::move(o));
    }
  }
  const double p = 1.0 / static_cast<double>(w.originals.size());
  w.weights.assign(w.originals.size(), p);
  w.history.push_back("generated");
  return w;
}

World toy_world() {
  World w;
  w.templates = {Matrix{{0.0, 1.0, 1.0}}, Matrix{{0.5, 1.0, 0.0}}};
  w.originals.push_back({"x1", Matrix{{0.0, 1.0, 1.0}}, 0, 0});
  w.originals.push_back({"x2", Matrix{{1.0, 1.0, 0.0}}, 1, 1});
  for (auto& o : w.originals) o.payload_label = ground_truth_label(o.payload, w.templates);
  w.weights = {0.5, 0.5};
  w.history.push_back("toy");
  return w;
}

Matrix apply_transform(const Transform& t, const Matrix& x) {
  switch (t.kind) {
    case TransformKind::identity:
      return x;
    case TransformKind::block_mask: {
      Matrix z = x;
      for (const Rect& r : t.rects)
        for (std::size_t i = r.r0; i < r.r1; ++i)
          for (std::size_t j = r.c0; j < r.c1; ++j) z(i, j) = 0.0;
      return z;
    }
    case TransformKind::additive_pattern:
      return x + t.pattern;
  }
  return x;
}

std::vector<Transform> identity_transforms() {
  Transform t;
  t.id = "id";
  t.kind = TransformKind::identity;
  t.probability = 1.0;
  return {t};
}

std::vector<Transform> toy_transforms() {
  Transform t1;
  t1.id = "t1";
  t1.kind = TransformKind::block_mask;
  t1.rects = {{0, 1, 0, 1}};
  t1.probability = 0.5;
  Transform t2 = t1;
  t2.id = "t2";
  t2.rects = {{0, 1, 2, 3}};
  return {t1, t2};
}

std::vector<Transform> planted_transforms(const World& world, const PlantedProbabilities& probs) {
  if (!world.geometry) throw std::invalid_argument("planted transforms need a generated world");
  const BlockGeometry& g = *world.geometry;
  const std::size_t K = world.num_classes();
  const std::size_t cols = world.cols();
  for (double p : {probs.identity, probs.band_mask, probs.core_mask, probs.core_band_mask}) {
    if (!(p >= 0.0)) throw std::invalid_argument("transforms.planted_probs: negative entry");
  }
  const double total = probs.identity + probs.band_mask + probs.core_mask + probs.core_band_mask;
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("transforms.planted_probs: groups sum to " + format_double(total));
  }

  auto rect_rows = [&](const std::vector<std::size_t>& rows) {
    return Rect{rows.front(), rows.back() + 1, 0, cols};
  };
  auto core_rect = [&](std::size_t j) {
    return Rect{j * g.block_rows, j * g.block_rows + g.core_rows, 0, cols};
  };

  std::vector<Transform> out;
  if (probs.identity > 0.0) {
    Transform t;
    t.id = "id";
    t.probability = probs.identity;
    out.push_back(t);
  }
  if (probs.band_mask > 0.0) {
    const double p = probs.band_mask / static_cast<double>(K * g.bands);
    for (std::size_t j = 0; j < K; ++j)
      for (std::size_t b = 0; b < g.bands; ++b) {
        Transform t;
        t.id = "band" + std::to_string(j) + "." + std::to_string(b);
        t.kind = TransformKind::block_mask;
        t.rects = {rect_rows(band_rows(g, j, b))};
        t.probability = p;
        out.push_back(t);
      }
  }
  if (probs.core_mask > 0.0) {
    const double p = probs.core_mask / static_cast<double>(K);
    for (std::size_t j = 0; j < K; ++j) {
      Transform t;
      t.id = "core" + std::to_string(j);
      t.kind = TransformKind::block_mask;
      t.rects = {core_rect(j)};
      t.probability = p;
      out.push_back(t);
    }
  }
  if (probs.core_band_mask > 0.0) {
    const double p = probs.core_band_mask / static_cast<double>(K * g.bands);
    for (std::size_t j = 0; j < K; ++j)
      for (std::size_t b = 0; b < g.bands; ++b) {
        const std::size_t nxt = (j + 1) % K;
        Transform t;
        t.id = "core" + std::to_string(j) + "+band" + std::to_string(nxt) + "." + std::to_string(b);
        t.kind = TransformKind::block_mask;
        t.rects = {core_rect(j), rect_rows(band_rows(g, nxt, b))};
        t.probability = p;
        out.push_back(t);
      }
  }
  return out;
}

Transform parse_transform(const std::string& descriptor, std::size_t rows, std::size_t cols,
                          std::uint64_t pattern_seed) {
  const auto parts = split(descriptor, '@');
  const std::string what = "transforms: '" + descriptor + "'";
  if (parts.size() < 2) throw std::invalid_argument(what + " needs kind@probability");
  Transform t;
  t.id = descriptor;
  t.probability = parse_real(parts[1], what);
  if (parts[0] == "identity") {
    if (parts.size() != 2) throw std::invalid_argument(what + ": identity takes no parameters");
    t.kind = TransformKind::identity;
  } else if (parts[0] == "mask") {
    if (parts.size() != 3) throw std::invalid_argument(what + ": mask needs rectangles");
    t.kind = TransformKind::block_mask;
    for (const auto& rs : split(parts[2], '+')) {
      const auto rc = split(rs, '/');
      if (rc.size() != 2) throw std::invalid_argument(what + ": rectangle must be r0:r1/c0:c1");
      const auto rr = split(rc[0], ':');
      const auto cc = split(rc[1], ':');
      if (rr.size() != 2 || cc.size() != 2) throw std::invalid_argument(what + ": rectangle must be r0:r1/c0:c1");
      t.rects.push_back({parse_count(rr[0], what), parse_count(rr[1], what), parse_count(cc[0], what),
                         parse_count(cc[1], what)});
    }
  } else if (parts[0] == "pattern") {
    if (parts.size() != 3) throw std::invalid_argument(what + ": pattern needs index/scale");
    const auto ps = split(parts[2], '/');
    if (ps.size() != 2) throw std::invalid_argument(what + ": pattern needs index/scale");
    t.kind = TransformKind::additive_pattern;
    t.pattern_index = parse_count(ps[0], what);
    t.pattern_scale = parse_real(ps[1], what);
    t.pattern = gaussian_matrix(rows, cols, derive_seed(pattern_seed, "pattern/" + ps[0]));
    t.pattern *= t.pattern_scale;
  } else {
    throw std::invalid_argument(what + ": unknown kind '" + parts[0] + "'");
  }
  validate_transforms({t}, rows, cols);
  return t;
}

std::string describe_transform(const Transform& t) {
  const std::string p = format_double(t.probability);
  switch (t.kind) {
    case TransformKind::identity:
      return "identity@" + p;
    case TransformKind::block_mask: {
      std::string s = "mask@" + p + "@";
      for (std::size_t i = 0; i < t.rects.size(); ++i) {
        const Rect& r = t.rects[i];
        if (i) s += "+";
        s += std::to_string(r.r0) + ":" + std::to_string(r.r1) + "/" + std::to_string(r.c0) + ":" +
             std::to_string(r.c1);
      }
      return s;
    }
    case TransformKind::additive_pattern:
      return "pattern@" + p + "@" + std::to_string(t.pattern_index) + "/" + format_double(t.pattern_scale);
  }
  return "?";
}

void validate_transforms(const std::vector<Transform>& transforms, std::size_t rows, std::size_t cols) {
  if (transforms.empty()) throw std::invalid_argument("transforms: empty transform list");
  for (const Transform& t : transforms) {
    if (!(t.probability > 0.0 && t.probability <= 1.0)) {
      throw std::invalid_argument("transforms: '" + t.id + "' probability must lie in (0, 1]");
    }
    for (const Rect& r : t.rects) {
      if (r.r0 >= r.r1 || r.c0 >= r.c1 || r.r1 > rows || r.c1 > cols) {
        throw std::invalid_argument("transforms: '" + t.id + "' has an empty or out-of-range rectangle");
      }
    }
    if (t.kind == TransformKind::additive_pattern && (t.pattern.rows() != rows || t.pattern.cols() != cols)) {
      throw std::invalid_argument("transforms: '" + t.id + "' pattern shape mismatch");
    }
  }
}

std::vector<int> AugmentedSpace::labels() const {
  std::vector<int> y(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) y[i] = nodes[i].label;
  return y;
}

bool AugmentedSpace::is_overlapped(std::size_t node) const {
  std::size_t parents = 0;
  for (std::size_t o = 0; o < cond.rows(); ++o)
    if (cond(o, node) > 0.0) ++parents;
  return parents >= 2;
}

AugmentedSpace make_space(std::vector<AugNode> nodes, Matrix cond, std::vector<double> weights,
                          std::vector<int> original_labels, std::size_t num_classes) {
  const std::size_t n = nodes.size();
  const std::size_t no = weights.size();
  if (n == 0) throw std::invalid_argument("augmented space has no nodes");
  if (cond.rows() != no || cond.cols() != n) throw std::invalid_argument("cond table shape mismatch");
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("original weights must be nonnegative");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-12) throw std::invalid_argument("original weights sum to " + format_double(wsum));
  for (std::size_t o = 0; o < no; ++o) {
    double rs = 0.0;
    for (std::size_t x = 0; x < n; ++x) rs += cond(o, x);
    if (std::abs(rs - 1.0) > 1e-12) {
      throw std::invalid_argument("cond row " + std::to_string(o) + " sums to " + format_double(rs));
    }
  }

  AugmentedSpace s;
  s.nodes = std::move(nodes);
  s.cond = std::move(cond);
  s.original_weights = std::move(weights);
  s.original_labels = std::move(original_labels);
  s.num_classes = num_classes;

  s.joint = Matrix(n, n);
  s.marginal.assign(n, 0.0);
  for (std::size_t o = 0; o < no; ++o) {
    const double po = s.original_weights[o];
    if (po == 0.0) continue;
    std::vector<std::size_t> support;
    for (std::size_t x = 0; x < n; ++x)
      if (s.cond(o, x) > 0.0) support.push_back(x);
    for (std::size_t a : support) {
      s.marginal[a] += po * s.cond(o, a);
      for (std::size_t b : support) s.joint(a, b) += po * s.cond(o, a) * s.cond(o, b);
    }
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      if (s.nodes[a].label == s.nodes[b].label) {
        s.positive_mass += s.joint(a, b);
      } else {
        s.negative_mass += s.joint(a, b);
      }
    }
  return s;
}

AugmentedSpace build_augmented_space(const World& world, const std::vector<Transform>& transforms) {
  validate_transforms(transforms, world.rows(), world.cols());
  double psum = 0.0;
  for (const Transform& t : transforms) psum += t.probability;
  if (std::abs(psum - 1.0) > 1e-12) {
    throw std::invalid_argument("transforms: probabilities sum to " + format_double(psum) + ", not 1");
  }

  struct Key {
    double sum;
    double sumsq;
  };
  std::vector<AugNode> nodes;
  std::vector<Key> keys;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(world.originals.size());
  for (std::size_t o = 0; o < world.originals.size(); ++o) {
    for (std::size_t ti = 0; ti < transforms.size(); ++ti) {
      Matrix z = apply_transform(transforms[ti], world.originals[o].payload);
      Key key{0.0, 0.0};
      for (double v : z.data()) {
        key.sum += v;
        key.sumsq += v * v;
      }
      const double slack = kDedupTol * static_cast<double>(z.size());
      std::size_t found = nodes.size();
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (std::abs(keys[k].sum - key.sum) > slack) continue;
        if (max_abs_diff(nodes[k].payload, z) <= kDedupTol) {
          found = k;
          break;
        }
      }
      if (found == nodes.size()) {
        AugNode nd;
        nd.id = "n" + std::to_string(nodes.size());
        nd.label = ground_truth_label(z, world.templates);
        nd.payload = std::move(z);
        nd.first_original = o;
        nd.first_transform = ti;
        nodes.push_back(std::move(nd));
        keys.push_back(key);
      }
      auto& row = rows[o];
      auto it = std::find_if(row.begin(), row.end(), [&](const auto& e) { return e.first == found; });
      if (it == row.end()) {
        row.emplace_back(found, transforms[ti].probability);
      } else {
        it->second += transforms[ti].probability;
      }
    }
  }
  Matrix cond(world.originals.size(), nodes.size());
  for (std::size_t o = 0; o < rows.size(); ++o)
    for (const auto& [k, p] : rows[o]) cond(o, k) = p;
  std::vector<int> latent(world.originals.size());
  for (std::size_t o = 0; o < latent.size(); ++o) latent[o] = world.originals[o].label;
  return make_space(std::move(nodes), std::move(cond), world.weights, std::move(latent),
                    world.num_classes());
}

LabelingReport labeling_error(const AugmentedSpace& space) {
  LabelingReport r;
  r.per_class_alpha.assign(space.num_classes, 0.0);
  for (std::size_t o = 0; o < space.num_originals(); ++o) {
    const int y = space.original_labels[o];
    double wrong = 0.0;
    for (std::size_t x = 0; x < space.n(); ++x)
      if (space.cond(o, x) > 0.0 && space.nodes[x].label != y) wrong += space.cond(o, x);
    const double c = space.original_weights[o] * wrong;
    r.per_class_alpha[static_cast<std::size_t>(y)] += c;
    r.alpha += c;
  }
  return r;
}

McEstimate labeling_error_mc(const World& world, const std::vector<Transform>& transforms,
                             std::size_t samples, std::uint64_t seed) {
  if (samples < 2) throw std::invalid_argument("labeling_error_mc: need at least 2 samples");
  CounterRng rng(seed);
  auto pick = [&](const auto& weights, auto weight_of) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weight_of(weights[i]);
      if (u <= acc) return i;
    }
    return weights.size() - 1;
  };
  double hits = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t o = pick(world.weights, [](double w) { return w; });
    const std::size_t t = pick(transforms, [](const Transform& tr) { return tr.probability; });
    const Matrix z = apply_transform(transforms[t], world.originals[o].payload);
    if (ground_truth_label(z, world.templates) != world.originals[o].label) hits += 1.0;
  }
  const double n = static_cast<double>(samples);
  const double mean = hits / n;
  McEstimate e;
  e.mean = mean;
  e.std_error = std::sqrt(mean * (1.0 - mean) / (n - 1.0));
  return e;
}

World preprocess_world(const World& world, const TruncationSpec& spec) {
  validate_truncation(spec, world.rows(), world.cols());
  World out = world;
  for (Original& o : out.originals) {
    o.payload = svd_truncate(svd_full(o.payload), spec);
    o.payload_label = ground_truth_label(o.payload, out.templates);
  }
  out.history.push_back(spec.describe());
  return out;
}

World inflate(const World& world, std::size_t factor, std::uint64_t seed) {
  if (factor < 1) throw std::invalid_argument("inflation.factor: must be >= 1");
  if (factor == 1) return world;
  if (!world.spec) throw std::invalid_argument("inflate: only generated worlds can be inflated");
  if (world.history.size() != 1) {
    throw std::invalid_argument("inflate: apply inflation before any preprocessing");
  }
  const WorldSpec& spec = *world.spec;
  const PlantedGenerator gen(spec);
  World out = world;
  const std::uint64_t stream = derive_seed(seed, "inflate/nuisance");
  const std::size_t extra = (factor - 1) * spec.per_class;
  for (std::size_t c = 0; c < spec.K; ++c) {
    for (std::size_t j = 0; j < extra; ++j) {
      Original o;
      o.id = "i" + std::to_string(c) + "_" + std::to_string(j);
      o.payload = gen.draw(c, gen.pattern_for(c, j, stream), derive_seed(seed, "inflate/noise/" + o.id));
      o.label = static_cast<int>(c);
      o.payload_label = ground_truth_label(o.payload, out.templates);
      out.originals.push_back(std::move(o));
    }
  }
  out.weights.assign(out.originals.size(), 1.0 / static_cast<double>(out.originals.size()));
  out.history.push_back("synthetic inflation x" + std::to_string(factor));
  return out;
}

}  // namespace ctlab

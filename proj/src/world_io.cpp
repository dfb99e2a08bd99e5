#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "ctlab/world.hpp"

namespace ctlab {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

template <typename T>
T parse_num(const std::string& s, const std::string& key) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error("world manifest: bad value for " + key + ": '" + s + "'");
  }
  return v;
}

}  // namespace

void save_world(const World& world, const std::string& directory) {
  fs::create_directories(fs::path(directory) / "originals");
  fs::create_directories(fs::path(directory) / "templates");
  std::ofstream os(fs::path(directory) / "manifest.txt", std::ios::binary);
  if (!os) throw std::runtime_error("cannot write world manifest in " + directory);
  os << "format = ctlab-world v1\n";
  os << "classes = " << world.num_classes() << "\n";
  os << "rows = " << world.rows() << "\n";
  os << "cols = " << world.cols() << "\n";
  for (const auto& h : world.history) os << "history = " << h << "\n";
  if (world.spec) {
    const WorldSpec& s = *world.spec;
    os << "spec.K = " << s.K << "\n";
    os << "spec.per_class = " << s.per_class << "\n";
    os << "spec.m = " << s.m << "\n";
    os << "spec.mp = " << s.mp << "\n";
    os << "spec.q_star = " << s.q_star << "\n";
    os << "spec.nuisance_rank = " << s.nuisance_rank << "\n";
    os << "spec.nuisance_confusion = " << format_double(s.nuisance_confusion) << "\n";
    os << "spec.noise_scale = " << format_double(s.noise_scale) << "\n";
    os << "spec.seed = " << s.seed << "\n";
    os << "spec.bands = " << s.bands << "\n";
    os << "spec.core_boost = " << format_double(s.core_boost) << "\n";
  }
  if (world.geometry) {
    os << "geometry = " << world.geometry->block_rows << " " << world.geometry->core_rows << " "
       << world.geometry->bands << "\n";
  }
  for (std::size_t i = 0; i < world.originals.size(); ++i) {
    const Original& o = world.originals[i];
    os << "original = " << o.id << " " << o.label << " " << o.payload_label << " "
       << format_double(world.weights[i]) << "\n";
    save_matrix((fs::path(directory) / "originals" / (o.id + ".mat")).string(), o.payload);
  }
  for (std::size_t c = 0; c < world.templates.size(); ++c) {
    save_matrix((fs::path(directory) / "templates" / ("t" + std::to_string(c) + ".mat")).string(),
                world.templates[c]);
  }
}

World load_world(const std::string& directory) {
  std::ifstream is(fs::path(directory) / "manifest.txt");
  if (!is) throw std::runtime_error("cannot read world manifest in " + directory);
  World w;
  std::map<std::string, std::string> spec_fields;
  std::size_t classes = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("world manifest line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "format") {
      if (val != "ctlab-world v1") throw std::runtime_error("world manifest: unsupported format " + val);
    } else if (key == "classes") {
      classes = parse_num<std::size_t>(val, key);
    } else if (key == "rows" || key == "cols") {
      // Implied by the payload files.
    } else if (key == "history") {
      w.history.push_back(val);
    } else if (key.rfind("spec.", 0) == 0) {
      spec_fields[key.substr(5)] = val;
    } else if (key == "geometry") {
      std::istringstream ss(val);
      BlockGeometry g;
      if (!(ss >> g.block_rows >> g.core_rows >> g.bands)) throw std::runtime_error("world manifest: bad geometry");
      w.geometry = g;
    } else if (key == "original") {
      std::istringstream ss(val);
      Original o;
      std::string weight;
      if (!(ss >> o.id >> o.label >> o.payload_label >> weight)) {
        throw std::runtime_error("world manifest line " + std::to_string(lineno) + ": bad original entry");
      }
      o.payload = load_matrix((fs::path(directory) / "originals" / (o.id + ".mat")).string());
      w.weights.push_back(parse_num<double>(weight, "weight"));
      w.originals.push_back(std::move(o));
    } else {
      throw std::runtime_error("world manifest line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  for (std::size_t c = 0; c < classes; ++c) {
    w.templates.push_back(
        load_matrix((fs::path(directory) / "templates" / ("t" + std::to_string(c) + ".mat")).string()));
  }
  if (!spec_fields.empty()) {
    WorldSpec s;
    auto get = [&](const std::string& k) {
      auto it = spec_fields.find(k);
      if (it == spec_fields.end()) throw std::runtime_error("world manifest: missing spec." + k);
      return it->second;
    };
    s.K = parse_num<std::size_t>(get("K"), "K");
    s.per_class = parse_num<std::size_t>(get("per_class"), "per_class");
    s.m = parse_num<std::size_t>(get("m"), "m");
    s.mp = parse_num<std::size_t>(get("mp"), "mp");
    s.q_star = parse_num<std::size_t>(get("q_star"), "q_star");
    s.nuisance_rank = parse_num<std::size_t>(get("nuisance_rank"), "nuisance_rank");
    s.nuisance_confusion = parse_num<double>(get("nuisance_confusion"), "nuisance_confusion");
    s.noise_scale = parse_num<double>(get("noise_scale"), "noise_scale");
    s.seed = parse_num<std::uint64_t>(get("seed"), "seed");
    s.bands = parse_num<std::size_t>(get("bands"), "bands");
    s.core_boost = parse_num<double>(get("core_boost"), "core_boost");
    w.spec = s;
  }
  if (w.templates.empty() || w.originals.empty()) throw std::runtime_error("world manifest: empty world");
  return w;
}

}  // namespace ctlab

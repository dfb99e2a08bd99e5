#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "ctlab/linalg.hpp"

namespace ctlab {

namespace {

constexpr const char* kTextHeader = "CTLAB-MAT v1";
constexpr char kMagic[4] = {'C', 'T', 'L', 'B'};

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
}

template <typename T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("CTLB: truncated input");
  return to_little(v);
}

double parse_double(const std::string& tok) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw std::runtime_error("CTLAB-MAT: bad number '" + tok + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  if (v == 0.0) return "0";  // drop the sign of negative zero
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

void write_matrix_text(std::ostream& os, const Matrix& m) {
  os << kTextHeader << '\n' << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << format_double(m(i, j));
    }
    os << '\n';
  }
}

Matrix read_matrix_text(std::istream& is) {
  std::string header;
  std::getline(is, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  if (header != kTextHeader) throw std::runtime_error("CTLAB-MAT: bad header '" + header + "'");
  std::size_t rows = 0, cols = 0;
  if (!(is >> rows >> cols)) throw std::runtime_error("CTLAB-MAT: missing dimensions");
  std::vector<double> data;
  data.reserve(rows * cols);
  std::string tok;
  for (std::size_t i = 0; i < rows * cols; ++i) {
    if (!(is >> tok)) {
      throw std::runtime_error("CTLAB-MAT: expected " + std::to_string(rows * cols) +
                               " values, got " + std::to_string(i));
    }
    data.push_back(parse_double(tok));
  }
  return Matrix(rows, cols, std::move(data));
}

void write_matrix_binary(std::ostream& os, const Matrix& m) {
  os.write(kMagic, 4);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(m.rows()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(m.cols()));
  for (double v : m.data()) put<double>(os, v);
}

Matrix read_matrix_binary(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("CTLB: bad magic");
  const auto rows = get<std::uint32_t>(is);
  const auto cols = get<std::uint32_t>(is);
  std::vector<double> data(static_cast<std::size_t>(rows) * cols);
  for (double& v : data) v = get<double>(is);
  return Matrix(rows, cols, std::move(data));
}

void save_matrix(const std::string& path, const Matrix& m, bool binary) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  if (binary) {
    write_matrix_binary(os, m);
  } else {
    write_matrix_text(os, m);
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

Matrix load_matrix(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char first = static_cast<char>(is.peek());
  if (first == 'C') {
    char magic[4] = {};
    is.read(magic, 4);
    is.seekg(0);
    if (std::memcmp(magic, kMagic, 4) == 0) return read_matrix_binary(is);
  }
  return read_matrix_text(is);
}

}  // namespace ctlab

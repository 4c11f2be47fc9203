#include "bsumkit/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "bsumkit/errors.hpp"

namespace bsum {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

struct Header {
  bool complex = false;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
};

Header read_header(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty MatrixMarket stream");
  std::istringstream banner(lower(line));
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%matrixmarket" || object != "matrix") {
    throw ConfigError("not a MatrixMarket matrix banner: '" + line + "'");
  }
  if (format != "array") throw ConfigError("only dense array MatrixMarket files are supported");
  if (symmetry != "general") throw ConfigError("only general symmetry is supported");
  Header h;
  if (field == "complex") {
    h.complex = true;
  } else if (field != "real" && field != "double" && field != "integer") {
    throw ConfigError("unsupported MatrixMarket field '" + field + "'");
  }
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '%') continue;
    std::istringstream sz(line);
    if (!(sz >> h.rows >> h.cols) || h.rows < 0 || h.cols < 0) {
      throw ConfigError("bad MatrixMarket size line: '" + line + "'");
    }
    return h;
  }
  throw ConfigError("MatrixMarket stream ends before the size line");
}

template <typename T>
void read_values(std::istream& in, Eigen::Index count, bool complex, T* out) {
  for (Eigen::Index k = 0; k < count; ++k) {
    double re = 0.0, im = 0.0;
    if (!(in >> re)) throw ConfigError("MatrixMarket data ends after " + std::to_string(k) + " values");
    if (complex && !(in >> im)) throw ConfigError("MatrixMarket complex entry missing imaginary part");
    if constexpr (std::is_same_v<T, double>) {
      out[k] = re;
    } else {
      out[k] = T(re, im);
    }
  }
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open '" + path.string() + "'");
  return f;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  return f;
}

}  // namespace

Eigen::MatrixXd read_matrix_market(std::istream& in) {
  const Header h = read_header(in);
  if (h.complex) throw ConfigError("expected a real matrix, found complex");
  Eigen::MatrixXd m(h.rows, h.cols);
  read_values(in, h.rows * h.cols, false, m.data());
  return m;
}

Eigen::MatrixXd read_matrix_market(const std::filesystem::path& path) {
  auto f = open_in(path);
  return read_matrix_market(f);
}

Eigen::MatrixXcd read_matrix_market_complex(std::istream& in) {
  const Header h = read_header(in);
  Eigen::MatrixXcd m(h.rows, h.cols);
  read_values(in, h.rows * h.cols, h.complex, m.data());
  return m;
}

Eigen::MatrixXcd read_matrix_market_complex(const std::filesystem::path& path) {
  auto f = open_in(path);
  return read_matrix_market_complex(f);
}

void write_matrix_market(std::ostream& out, const Eigen::MatrixXd& m) {
  out << "%%MatrixMarket matrix array real general\n" << m.rows() << ' ' << m.cols() << '\n';
  out << std::setprecision(17);
  for (Eigen::Index k = 0; k < m.size(); ++k) out << m.data()[k] << '\n';
}

void write_matrix_market(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  auto f = open_out(path);
  write_matrix_market(f, m);
}

void write_matrix_market(std::ostream& out, const Eigen::MatrixXcd& m) {
  out << "%%MatrixMarket matrix array complex general\n" << m.rows() << ' ' << m.cols() << '\n';
  out << std::setprecision(17);
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    out << m.data()[k].real() << ' ' << m.data()[k].imag() << '\n';
  }
}

void write_matrix_market(const std::filesystem::path& path, const Eigen::MatrixXcd& m) {
  auto f = open_out(path);
  write_matrix_market(f, m);
}

TensorData read_tensor(std::istream& in) {
  std::string line;
  while (std::getline(in, line) && line.empty()) {
  }
  std::istringstream hdr(line);
  std::string tag;
  TensorData t;
  if (!(hdr >> tag >> t.dims[0] >> t.dims[1] >> t.dims[2]) || tag != "dims:") {
    throw ConfigError("tensor file must start with 'dims: d1 d2 d3', got '" + line + "'");
  }
  t.unfolding = read_matrix_market(in);
  if (t.unfolding.rows() != t.dims[0] || t.unfolding.cols() != t.dims[1] * t.dims[2]) {
    throw DimensionError("tensor unfolding is " + std::to_string(t.unfolding.rows()) + "x" +
                         std::to_string(t.unfolding.cols()) + ", inconsistent with dims line");
  }
  return t;
}

TensorData read_tensor(const std::filesystem::path& path) {
  auto f = open_in(path);
  return read_tensor(f);
}

void write_tensor(std::ostream& out, const TensorData& t) {
  out << "dims: " << t.dims[0] << ' ' << t.dims[1] << ' ' << t.dims[2] << '\n';
  write_matrix_market(out, t.unfolding);
}

void write_tensor(const std::filesystem::path& path, const TensorData& t) {
  auto f = open_out(path);
  write_tensor(f, t);
}

}  // namespace bsum

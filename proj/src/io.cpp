#include "salem/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace salem::io {

namespace {

json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

Rational entry(const json& e) {
  if (e.is_string()) return parse_rational(e.get<std::string>());
  if (e.is_number_integer()) return Rational(e.get<long long>());
  if (e.is_number()) return rationalize(e.get<double>());
  throw Error("matrix entries must be numbers or rational strings");
}

std::vector<RationalMatrix> matrices(const json& list, int k, int rows, int cols, const char* key) {
  if (!list.is_array() || static_cast<int>(list.size()) != k)
    throw Error(std::string("\"") + key + "\" must hold k matrices");
  std::vector<RationalMatrix> out;
  for (const auto& mat : list) {
    if (!mat.is_array() || static_cast<int>(mat.size()) != rows)
      throw Error(std::string("each ") + key + " matrix must have " + std::to_string(rows) + " rows");
    RationalMatrix r(rows, cols);
    for (int i = 0; i < rows; ++i) {
      if (!mat[i].is_array() || static_cast<int>(mat[i].size()) != cols)
        throw Error(std::string("each ") + key + " row must have " + std::to_string(cols) + " entries");
      for (int c = 0; c < cols; ++c) r(i, c) = entry(mat[i][c]);
    }
    out.push_back(std::move(r));
  }
  return out;
}

int positive_int(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<long long>() < 1)
    throw Error(std::string("system needs a positive integer \"") + key + "\"");
  return j[key].get<int>();
}

json matrix_json(const RationalMatrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows; ++i) {
    json row = json::array();
    for (int c = 0; c < m.cols; ++c) {
      const Rational& q = m(i, c);
      if (denominator(q) == 1 && abs(numerator(q)) < Rational(1LL << 53))
        row.push_back(static_cast<long long>(numerator(q)));
      else
        row.push_back(format_rational(q));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

bool little_endian() { return std::endian::native == std::endian::little; }

}  // namespace

std::string format_double(double x) {
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

MatrixSystem system_from_json(const json& j) {
  if (!j.is_object()) throw Error("system file must be a JSON object");
  const int n = positive_int(j, "n"), k = positive_int(j, "k"), m = positive_int(j, "m");
  const bool has_b = j.contains("B"), has_a = j.contains("A");
  if (has_b == has_a) throw Error("system needs exactly one of \"B\" or \"A\"");
  if (has_b) {
    if (m <= n) throw Error("identity-form systems need m > n");
    return MatrixSystem::from_b(n, k, m, matrices(j["B"], k, n, m - n, "B"));
  }
  return MatrixSystem::from_a(n, k, m, matrices(j["A"], k, n, m, "A"));
}

json system_to_json(const MatrixSystem& s) {
  json j{{"n", s.n()}, {"k", s.k()}, {"m", s.m()}};
  const char* key = s.identity_form() ? "B" : "A";
  json list = json::array();
  if (s.has_exact()) {
    auto mats = s.identity_form() ? s.exact_b() : s.exact_a();
    for (const auto& mat : mats) list.push_back(matrix_json(mat));
  } else {
    const auto& mats = s.identity_form() ? s.b() : s.a();
    for (const auto& mat : mats) list.push_back(matrix_json(mat));
  }
  j[key] = std::move(list);
  return j;
}

MatrixSystem read_system(const std::string& path) { return system_from_json(read_json(path)); }

json to_json(const NondegeneracyReport& r) {
  return json{{"passed", r.passed},       {"worst_J", r.worst_J},           {"worst_j", r.worst_j},
              {"worst_rows", r.worst_rows}, {"min_abs_det", number(r.min_abs_det)}, {"tolerance", r.tolerance},
              {"exact", r.exact},          {"tested", r.tested}};
}

json to_json(const LambdaResult& r) {
  return json{{"value", number(r.value)}, {"imag", number(r.imag)},         {"method", to_string(r.method)},
              {"R", number(r.R)},         {"Q", r.Q},                       {"est_error", number(r.est_error)},
              {"half_value", number(r.half_value)}, {"flags", r.flags}};
}

json to_json(const DecayFit& f) {
  json annuli = json::array();
  for (const auto& a : f.annuli)
    annuli.push_back({{"lo", a.lo}, {"hi", a.hi}, {"max_abs", number(a.max_abs)}, {"samples", a.samples}});
  return json{{"beta_hat", f.beta_hat}, {"C_hat", number(f.C_hat)}, {"window", {f.window_lo, f.window_hi}},
              {"clamped", f.clamped},   {"annuli", annuli}};
}

json to_json(const BallConstant& b) {
  json scales = json::array();
  for (const auto& s : b.scales)
    scales.push_back({{"radius", s.radius}, {"max_ratio", number(s.max_ratio)}, {"running_sup", number(s.running_sup)}});
  return json{{"C", number(b.C)}, {"radius_at_max", b.radius_at_max}, {"scales", scales}};
}

json to_json(const CEpsilonResult& r) {
  return json{{"estimate", r.estimate},
              {"std_error", r.std_error},
              {"analytic_lower_bound", r.analytic_lower_bound},
              {"samples", r.samples}};
}

json to_json(const ConfigurationHit& h) {
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  json realized = json::array();
  for (const auto& p : h.realized) realized.push_back(vec(p));
  return json{{"x", vec(h.x)},         {"y", vec(h.y)},           {"realized", realized},
              {"dists", h.dists},      {"max_dist", h.max_dist},  {"margins", h.margins},
              {"excluded_margin", number(h.excluded_margin)}};
}

void write_measure(const std::string& path, const GridMeasure& measure, bool pure_json) {
  if (pure_json) {
    if (measure.N() > 64) throw Error("pure-JSON measure files are limited to N <= 64");
    write_json(path, json{{"n", measure.n()}, {"N", measure.N()}, {"format", "json"}, {"weights", measure.weights()}});
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << json{{"n", measure.n()}, {"N", measure.N()}, {"format", "f64-le"}}.dump() << '\n';
  for (double w : measure.weights()) {
    auto bits = std::bit_cast<std::uint64_t>(w);
    if (!little_endian()) bits = __builtin_bswap64(bits);
    out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
  if (!out) throw Error("failed writing " + path);
}

std::vector<double> read_grid_values(const std::string& path, int& n, std::size_t& N) {
  const std::string bytes = read_text(path);
  auto nl = bytes.find('\n');
  json header = json::parse(bytes.substr(0, nl), nullptr, false);
  const bool binary = !header.is_discarded() && header.is_object() && header.value("format", "") == "f64-le";
  if (!binary) {
    header = json::parse(bytes, nullptr, false);
    if (header.is_discarded() || !header.is_object()) throw Error(path + ": not a measure file");
  }
  if (!header.contains("n") || !header.contains("N")) throw Error(path + ": header needs n and N");
  n = header["n"].get<int>();
  N = header["N"].get<std::size_t>();
  if (n < 1 || N < 1) throw Error(path + ": invalid n or N");
  const std::size_t cells = ipow(N, n);
  std::vector<double> values(cells);
  if (binary) {
    if (nl == std::string::npos || bytes.size() - nl - 1 != cells * 8)
      throw Error(path + ": binary block has the wrong length");
    for (std::size_t i = 0; i < cells; ++i) {
      std::uint64_t bits;
      std::memcpy(&bits, bytes.data() + nl + 1 + 8 * i, 8);
      if (!little_endian()) bits = __builtin_bswap64(bits);
      values[i] = std::bit_cast<double>(bits);
    }
  } else {
    if (N > 64) throw Error(path + ": pure-JSON measure files are limited to N <= 64");
    const auto& w = header.at("weights");
    if (!w.is_array() || w.size() != cells) throw Error(path + ": weights have the wrong length");
    for (std::size_t i = 0; i < cells; ++i) values[i] = w[i].get<double>();
  }
  return values;
}

GridMeasure read_measure(const std::string& path) {
  int n;
  std::size_t N;
  auto values = read_grid_values(path, n, N);
  return GridMeasure(n, N, std::move(values));
}

void write_fourier_csv(const std::string& path, const FourierSample& s) {
  std::ostringstream out;
  for (int a = 0; a < s.n; ++a) out << "xi_" << a + 1 << ',';
  out << "re,im\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (double x : s.freq(i)) out << format_double(x) << ',';
    out << format_double(s.values[i].real()) << ',' << format_double(s.values[i].imag()) << '\n';
  }
  write_text(path, out.str());
}

FourierSample read_fourier_csv(const std::string& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line)) throw Error(path + ": empty CSV");
  const int cols = static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
  if (cols < 3) throw Error(path + ": expected xi columns plus re,im");
  const int n = cols - 2;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<int>(row.size()) != cols) throw Error(path + ": ragged CSV row");
    rows.push_back(std::move(row));
  }
  std::vector<double> axis;
  for (const auto& r : rows) axis.push_back(r[0]);
  std::sort(axis.begin(), axis.end());
  axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
  FourierSample s;
  s.n = n;
  s.K = static_cast<int>(axis.size() / 2);
  s.spacing = axis.size() > 1 ? axis[1] - axis[0] : 1.0;
  if (ipow(s.side(), n) != rows.size()) throw Error(path + ": rows do not form a full lattice");
  s.values.assign(rows.size(), cplx(0.0, 0.0));
  std::vector<int> k(n);
  for (const auto& r : rows) {
    for (int a = 0; a < n; ++a) k[a] = static_cast<int>(std::lround(r[a] / s.spacing));
    s.values[s.index(k)] = cplx(r[n], r[n + 1]);
  }
  return s;
}

PointSet read_point_set(const std::string& path, double tol) {
  const std::string text = read_text(path);
  json j = json::parse(text, nullptr, false);
  PointSet ps;
  if (!j.is_discarded() && j.is_object() && j.contains("points")) {
    ps.n = j.at("n").get<int>();
    ps.points = j.at("points").get<std::vector<std::vector<double>>>();
    ps.tol = tol > 0.0 ? tol : j.value("tol", 0.0);
  } else {
    int n;
    std::size_t N;
    auto values = read_grid_values(path, n, N);
    std::vector<bool> mask(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) mask[i] = values[i] != 0.0;
    ps = PointSet::from_mask(n, N, mask, tol);
  }
  ps.validate();
  return ps;
}

void write_point_set(const std::string& path, const PointSet& set) {
  write_json(path, json{{"n", set.n}, {"tol", set.tol}, {"points", set.points}});
}

void write_hits_csv(const std::string& path, const std::vector<ConfigurationHit>& hits) {
  std::ostringstream out;
  if (!hits.empty()) {
    const auto& h0 = hits.front();
    for (Eigen::Index a = 0; a < h0.x.size(); ++a) out << "x_" << a + 1 << ',';
    for (Eigen::Index a = 0; a < h0.y.size(); ++a) out << "y_" << a + 1 << ',';
    out << "max_dist";
    for (std::size_t a = 0; a < h0.margins.size(); ++a) out << ",margin_" << a + 1;
    out << '\n';
  } else {
    out << "x,y,max_dist,margins\n";
  }
  for (const auto& h : hits) {
    for (Eigen::Index a = 0; a < h.x.size(); ++a) out << format_double(h.x(a)) << ',';
    for (Eigen::Index a = 0; a < h.y.size(); ++a) out << format_double(h.y(a)) << ',';
    out << format_double(h.max_dist);
    for (double mgn : h.margins) out << ',' << format_double(mgn);
    out << '\n';
  }
  write_text(path, out.str());
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("failed writing " + path);
}

json read_json(const std::string& path) {
  json j = json::parse(read_text(path), nullptr, false);
  if (j.is_discarded()) throw Error(path + ": malformed JSON");
  return j;
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 failed");
  std::ostringstream out;
  for (unsigned i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return out.str();
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_text(path)); }

}  // namespace salem::io

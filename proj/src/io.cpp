#include "ralmkit/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace ralmkit {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_number(const std::string& field, std::size_t line, std::size_t column) {
  if (field.empty()) {
    throw ParseError(fmt::format("line {}, column {}: empty field", line, column));
  }
  const char* begin = field.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  // Underflow to a subnormal is fine; overflow is not.
  if (end != begin + field.size() || (errno == ERANGE && std::isinf(v))) {
    throw ParseError(fmt::format("line {}, column {}: not a number: '{}'", line, column, field));
  }
  return v;
}

long parse_index(const std::string& field, std::size_t line, std::size_t column) {
  const double v = parse_number(field, line, column);
  if (v != std::floor(v)) {
    throw ParseError(fmt::format("line {}, column {}: expected an integer", line, column));
  }
  return static_cast<long>(v);
}

std::string fmt_double(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot rename into '" + path.string() + "': " + ec.message());
  }
}

Matrix parse_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      row.push_back(parse_number(fields[c], lineno, c + 1));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(fmt::format("line {}: expected {} fields, found {}", lineno,
                                   rows.front().size(), row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("csv: no data rows");
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

Matrix load_csv(const fs::path& path) {
  try {
    return parse_csv(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string format_csv(const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      out += fmt_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

void save_csv(const fs::path& path, const Matrix& m) {
  write_file_atomic(path, format_csv(m));
}

SparseObservations parse_matrix_market(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError("matrix market: empty input");
  ++lineno;
  {
    std::istringstream hs(line);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    std::transform(format.begin(), format.end(), format.begin(), ::tolower);
    std::transform(field.begin(), field.end(), field.begin(), ::tolower);
    std::transform(symmetry.begin(), symmetry.end(), symmetry.begin(), ::tolower);
    if (banner != "%%MatrixMarket" || format != "coordinate") {
      throw ParseError("line 1: expected '%%MatrixMarket matrix coordinate ...' header");
    }
    if (field != "real" && field != "integer" && field != "double") {
      throw ParseError("line 1: unsupported field '" + field + "'");
    }
    if (!symmetry.empty() && symmetry != "general") {
      throw ParseError("line 1: only 'general' symmetry is supported");
    }
  }
  long rows = -1, cols = -1, nnz = -1;
  SparseObservations obs;
  std::size_t seen = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '%') continue;
    std::istringstream ls(t);
    std::vector<std::string> tok;
    for (std::string s; ls >> s;) tok.push_back(s);
    if (rows < 0) {
      if (tok.size() != 3) {
        throw ParseError(fmt::format("line {}: size line needs 'rows cols entries'", lineno));
      }
      rows = parse_index(tok[0], lineno, 1);
      cols = parse_index(tok[1], lineno, 2);
      nnz = parse_index(tok[2], lineno, 3);
      if (rows <= 0 || cols <= 0 || nnz < 0) {
        throw ParseError(fmt::format("line {}: invalid dimensions", lineno));
      }
      obs.values = Matrix::Zero(rows, cols);
      obs.mask = Matrix::Zero(rows, cols);
      continue;
    }
    if (tok.size() != 3) {
      throw ParseError(fmt::format("line {}: expected 'row col value', found {} fields",
                                   lineno, tok.size()));
    }
    const long i = parse_index(tok[0], lineno, 1);
    const long j = parse_index(tok[1], lineno, 2);
    const double v = parse_number(tok[2], lineno, 3);
    if (i < 1 || i > rows || j < 1 || j > cols) {
      throw ParseError(fmt::format("line {}: index ({}, {}) outside {}x{}", lineno, i, j, rows, cols));
    }
    obs.values(i - 1, j - 1) = v;
    obs.mask(i - 1, j - 1) = 1.0;
    ++seen;
  }
  if (rows < 0) throw ParseError("matrix market: missing size line");
  if (static_cast<long>(seen) != nnz) {
    throw ParseError(fmt::format("matrix market: header announces {} entries, found {}", nnz, seen));
  }
  obs.entries = static_cast<std::size_t>(obs.mask.sum());
  return obs;
}

SparseObservations load_matrix_market(const fs::path& path) {
  try {
    return parse_matrix_market(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

Matrix load_dense(const fs::path& path, DenseFormat format) {
  return format == DenseFormat::kCsv ? load_csv(path) : load_matrix_market(path).values;
}

std::string format_log(const std::vector<IterateRecord>& records) {
  std::string out = kLogHeader;
  out += '\n';
  for (const IterateRecord& r : records) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", r.k, fmt_double(r.rho),
                       fmt_double(r.rho_tilde), r.inner_iters, fmt_double(r.grad_norm),
                       fmt_double(r.kkt_residual), fmt_double(r.dual_step_norm),
                       fmt_double(r.auglag));
  }
  return out;
}

void save_log(const fs::path& path, const std::vector<IterateRecord>& records) {
  write_file_atomic(path, format_log(records));
}

std::vector<IterateRecord> parse_log(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != kLogHeader) {
    throw ParseError(std::string("line 1: expected header '") + kLogHeader + "'");
  }
  std::vector<IterateRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 8) {
      throw ParseError(fmt::format("line {}: expected 8 fields, found {}", lineno, f.size()));
    }
    IterateRecord r;
    r.k = static_cast<int>(parse_index(f[0], lineno, 1));
    r.rho = parse_number(f[1], lineno, 2);
    r.rho_tilde = parse_number(f[2], lineno, 3);
    r.inner_iters = static_cast<int>(parse_index(f[3], lineno, 4));
    r.grad_norm = parse_number(f[4], lineno, 5);
    r.kkt_residual = parse_number(f[5], lineno, 6);
    r.dual_step_norm = parse_number(f[6], lineno, 7);
    r.auglag = parse_number(f[7], lineno, 8);
    out.push_back(r);
  }
  return out;
}

std::vector<IterateRecord> load_log(const fs::path& path) {
  try {
    return parse_log(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string residual_svg(const std::vector<IterateRecord>& records) {
  constexpr double kW = 640.0, kH = 400.0, kPad = 50.0;
  std::vector<std::pair<double, double>> pts;
  for (const IterateRecord& r : records) {
    if (r.kkt_residual > 0.0 && std::isfinite(r.kkt_residual)) {
      pts.emplace_back(r.k, std::log10(r.kkt_residual));
    }
  }
  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      kW, kH);
  svg += fmt::format(
      "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n"
      "<line x1=\"{0}\" y1=\"{3}\" x2=\"{0}\" y2=\"{1}\" stroke=\"black\"/>\n",
      kPad, kH - kPad, kW - kPad, kPad);
  if (!pts.empty()) {
    double kmin = pts.front().first, kmax = pts.back().first;
    double lmin = pts.front().second, lmax = lmin;
    for (const auto& [k, l] : pts) {
      lmin = std::min(lmin, l);
      lmax = std::max(lmax, l);
    }
    lmin = std::floor(lmin);
    lmax = std::ceil(lmax);
    if (lmax <= lmin) lmax = lmin + 1.0;
    if (kmax <= kmin) kmax = kmin + 1.0;
    auto sx = [&](double k) { return kPad + (k - kmin) / (kmax - kmin) * (kW - 2 * kPad); };
    auto sy = [&](double l) { return kH - kPad - (l - lmin) / (lmax - lmin) * (kH - 2 * kPad); };
    svg += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i > 0) svg += ' ';
      svg += fmt::format("{:.2f},{:.2f}", sx(pts[i].first), sy(pts[i].second));
    }
    svg += "\"/>\n";
    svg += fmt::format(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\">1e{}</text>\n"
        "<text x=\"{}\" y=\"{}\" font-size=\"12\">1e{}</text>\n",
        5.0, sy(lmax) + 4.0, static_cast<int>(lmax), 5.0, sy(lmin) + 4.0,
        static_cast<int>(lmin));
    svg += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"12\">k = {}</text>\n",
                       kW - kPad - 40.0, kH - kPad + 20.0, static_cast<int>(kmax));
  }
  svg += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"14\">KKT residual</text>\n",
                     kW / 2 - 40.0, kPad - 15.0);
  svg += "</svg>\n";
  return svg;
}

}  // namespace ralmkit

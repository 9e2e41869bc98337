#include "conic/instance.hpp"

#include "conic/conditioning.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace conic {

ParseError::ParseError(int line_no, const std::string& what)
    : std::runtime_error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}

namespace {

struct Line {
  int number;
  std::vector<std::string> tokens;
};

// Non-empty, non-comment lines split on whitespace.
std::vector<Line> content_lines(const std::string& text) {
  std::vector<Line> out;
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const auto first = raw.find_first_not_of(" \t");
    if (first == std::string::npos || raw[first] == '#') continue;
    Line line{number, {}};
    std::istringstream ls(raw);
    std::string tok;
    while (ls >> tok) line.tokens.push_back(tok);
    out.push_back(std::move(line));
  }
  return out;
}

double parse_double(const std::string& tok, int line) {
  double v = 0;
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  if (!tok.empty() && *begin == '+') ++begin;
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) throw ParseError(line, "not a finite number: '" + tok + "'");
  return v;
}

Index parse_count(const std::string& tok, int line, Index min_value) {
  long long v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || v < min_value)
    throw ParseError(line, "expected an integer of at least " + std::to_string(min_value) + ": '" + tok + "'");
  return static_cast<Index>(v);
}

Matrix parse_rows(const std::vector<Line>& lines, std::size_t first, Index rows, Index cols, int header_line) {
  if (lines.size() < first + static_cast<std::size_t>(rows))
    throw ParseError(lines.empty() ? header_line : lines.back().number,
                     "expected " + std::to_string(rows) + " matrix rows, found " + std::to_string(lines.size() - first));
  if (lines.size() > first + static_cast<std::size_t>(rows))
    throw ParseError(lines[first + rows].number, "unexpected content after the matrix");
  Matrix a(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const Line& l = lines[first + i];
    if (static_cast<Index>(l.tokens.size()) != cols)
      throw ParseError(l.number, "expected " + std::to_string(cols) + " entries, found " + std::to_string(l.tokens.size()));
    for (Index j = 0; j < cols; ++j) a(i, j) = parse_double(l.tokens[j], l.number);
  }
  return a;
}

}  // namespace

std::string format_number(double v) {
  if (v == 0) return "0";
  if (v == std::round(v) && std::abs(v) < 1e15) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, static_cast<long long>(v));
    return std::string(buf, res.ptr);
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

ConicInstance parse_instance(const std::string& text) {
  const auto lines = content_lines(text);
  if (lines.empty()) throw ParseError(1, "missing header 'm n'");
  const Line& head = lines[0];
  if (head.tokens.size() != 2) throw ParseError(head.number, "header must be 'm n'");
  const Index m = parse_count(head.tokens[0], head.number, 1);
  const Index n = parse_count(head.tokens[1], head.number, 1);
  ConicInstance inst;
  inst.A = parse_rows(lines, 1, m, n, head.number);
  inst.is_integer = is_integral(inst.A);
  inst.provenance = Provenance::parsed;
  return inst;
}

std::string write_instance(const Matrix& a, const std::vector<std::string>& comments) {
  std::string out = std::to_string(a.rows()) + " " + std::to_string(a.cols()) + "\n";
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j) out += ' ';
      out += format_number(a(i, j));
    }
    out += '\n';
  }
  for (const auto& c : comments) out += "# " + c + "\n";
  return out;
}

std::string write_certificate(const CertificateFile& cert) {
  std::string out = cert.kind == CertificateKind::kernel ? "kernel\n" : "image\n";
  for (Index i = 0; i < cert.vector.size(); ++i) {
    if (i) out += ' ';
    out += format_number(cert.vector(i));
  }
  out += '\n';
  for (std::size_t i = 0; i < cert.support.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(cert.support[i] + 1);
  }
  out += '\n';
  return out;
}

CertificateFile parse_certificate(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  std::vector<std::string> rows;
  while (std::getline(in, raw)) {
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    rows.push_back(raw);
  }
  while (!rows.empty() && rows.back().find_first_not_of(" \t") == std::string::npos && rows.size() > 3) rows.pop_back();
  if (rows.empty()) throw ParseError(1, "missing certificate kind");
  CertificateFile cert;
  std::istringstream kind_line(rows[0]);
  std::string kind;
  kind_line >> kind;
  if (kind == "kernel")
    cert.kind = CertificateKind::kernel;
  else if (kind == "image")
    cert.kind = CertificateKind::image;
  else
    throw ParseError(1, "certificate kind must be 'kernel' or 'image'");
  if (rows.size() < 2) throw ParseError(2, "missing certificate vector");
  {
    std::istringstream ls(rows[1]);
    std::vector<double> vals;
    std::string tok;
    while (ls >> tok) vals.push_back(parse_double(tok, 2));
    if (vals.empty()) throw ParseError(2, "empty certificate vector");
    cert.vector = Eigen::Map<Vector>(vals.data(), static_cast<Index>(vals.size()));
  }
  if (rows.size() >= 3) {
    std::istringstream ls(rows[2]);
    std::string tok;
    while (ls >> tok) {
      cert.support.push_back(parse_count(tok, 3, 1) - 1);
    }
  }
  if (rows.size() > 3) throw ParseError(4, "unexpected content after the support line");
  return cert;
}

HomogenizedLP reduce_lp_feasibility(const LPFeasibilityProblem& p) {
  const Index m = p.A.rows();
  const Index d = p.A.cols();
  if (p.b.size() != m) throw PreconditionError("reduce_lp_feasibility: b has the wrong length");
  HomogenizedLP h;
  h.m = m;
  h.d = d;
  h.M.resize(m, 2 * d + m + 1);
  h.M << p.A, -p.A, Matrix::Identity(m, m), -p.b;
  h.t_index = 2 * d + m;
  return h;
}

std::optional<Vector> recover_lp_solution(const HomogenizedLP& h, const Vector& kernel_x) {
  if (kernel_x.size() != h.M.cols()) throw PreconditionError("recover_lp_solution: dimension mismatch");
  const double t = kernel_x(h.t_index);
  if (!(t > 0)) return std::nullopt;
  return Vector((kernel_x.head(h.d) - kernel_x.segment(h.d, h.d)) / t);
}

LPFeasibilityProblem parse_lp(const std::string& text) {
  const auto lines = content_lines(text);
  if (lines.empty()) throw ParseError(1, "missing header 'm d'");
  const Line& head = lines[0];
  if (head.tokens.size() != 2) throw ParseError(head.number, "header must be 'm d'");
  const Index m = parse_count(head.tokens[0], head.number, 1);
  const Index d = parse_count(head.tokens[1], head.number, 1);
  const Matrix ab = parse_rows(lines, 1, m, d + 1, head.number);
  return {ab.leftCols(d), ab.col(d)};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace conic

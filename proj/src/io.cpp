#include "conecalc/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "conecalc/errors.hpp"

namespace conecalc::io {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view tok, std::size_t pos) {
  tok = trim(tok);
  if (tok == "-inf" || tok == "-Inf" || tok == "-INF") return -INFINITY;
  if (tok == "inf" || tok == "+inf") return INFINITY;
  double v = 0.0;
  const auto* first = tok.data();
  const auto* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || tok.empty())
    throw ParseError("expected a number, got '" + std::string(tok) + "'", pos);
  return v;
}

std::vector<double> split_numbers(std::string_view line, char sep, std::size_t base) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= line.size()) {
    std::size_t end = line.find(sep, start);
    if (end == std::string_view::npos) end = line.size();
    std::string_view tok = line.substr(start, end - start);
    if (sep != ' ' || !trim(tok).empty()) out.push_back(parse_number(tok, base + start));
    start = end + 1;
  }
  return out;
}

struct Line {
  std::string_view text;
  std::size_t offset;
};

std::vector<Line> lines_of(std::string_view text) {
  std::vector<Line> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    out.push_back({text.substr(start, end - start), start});
    start = end + 1;
  }
  return out;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

SymMatrix parse_matrix_csv(std::string_view text) {
  std::vector<std::vector<double>> rows;
  for (const auto& [line, off] : lines_of(text)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    rows.push_back(split_numbers(line, ',', off));
  }
  const std::size_t n = rows.size();
  if (n == 0) throw ParseError("matrix CSV is empty", 0);
  std::vector<double> flat;
  for (const auto& r : rows) {
    if (r.size() != n) throw ParseError("matrix CSV must be square", 0);
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return SymMatrix(n, flat);
}

SymMatrix read_matrix_csv(const std::string& path) { return parse_matrix_csv(read_file(path)); }

void write_matrix_csv(std::ostream& os, const SymMatrix& a) {
  for (std::size_t i = 0; i < a.dim(); ++i) {
    for (std::size_t j = 0; j < a.dim(); ++j) os << (j ? "," : "") << format_double(a(i, j));
    os << '\n';
  }
}

std::vector<Vector> parse_points_csv(std::string_view text) {
  std::vector<Vector> pts;
  for (const auto& [line, off] : lines_of(text)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    pts.push_back(split_numbers(line, ',', off));
    if (pts.back().size() != pts.front().size())
      throw ParseError("points CSV rows have unequal length", off);
  }
  return pts;
}

std::vector<Vector> read_points_csv(const std::string& path) {
  return parse_points_csv(read_file(path));
}

std::vector<Frame> parse_frames_csv(std::string_view text) {
  std::vector<Frame> frames;
  std::vector<Vector> block;
  auto flush = [&] {
    if (!block.empty()) frames.push_back(Frame::orthonormalized(std::move(block)));
    block.clear();
  };
  for (const auto& [line, off] : lines_of(text)) {
    const auto t = trim(line);
    if (!t.empty() && t.front() == '#') continue;
    if (t.empty()) {
      flush();
      continue;
    }
    block.push_back(split_numbers(line, ',', off));
  }
  flush();
  if (frames.empty()) throw ParseError("frames CSV holds no frames", 0);
  return frames;
}

std::vector<Frame> read_frames_csv(const std::string& path) {
  return parse_frames_csv(read_file(path));
}

GridFunction parse_grid(std::string_view text) {
  const auto lines = lines_of(text);
  std::size_t li = 0;
  while (li < lines.size() && trim(lines[li].text).empty()) ++li;
  if (li == lines.size()) throw ParseError("grid file is empty", 0);

  const auto header = lines[li].text;
  const std::size_t hoff = lines[li].offset;
  if (header.substr(0, 4) != "grid") throw ParseError("grid file must start with 'grid'", hoff);
  int n = -1;
  std::vector<int> shape;
  Vector origin;
  double h = -1.0;
  std::istringstream hs{std::string(header.substr(4))};
  std::string field;
  while (hs >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw ParseError("bad header field '" + field + "'", hoff);
    const std::string key = field.substr(0, eq);
    const std::string val = field.substr(eq + 1);
    if (key == "n") {
      n = static_cast<int>(parse_number(val, hoff));
    } else if (key == "shape") {
      for (double d : split_numbers(val, ',', hoff)) shape.push_back(static_cast<int>(d));
    } else if (key == "origin") {
      origin = split_numbers(val, ',', hoff);
    } else if (key == "h") {
      h = parse_number(val, hoff);
    } else {
      throw ParseError("unknown header key '" + key + "'", hoff);
    }
  }
  if (n < 1 || shape.size() != static_cast<std::size_t>(n) || origin.size() != shape.size() || h <= 0)
    throw ParseError("inconsistent grid header", hoff);
  GridFunction g(shape, origin, h);
  ++li;

  auto next_nonempty = [&] {
    while (li < lines.size() && trim(lines[li].text).empty()) ++li;
  };
  next_nonempty();
  if (li < lines.size() && trim(lines[li].text).substr(0, 4) == "mask") {
    const auto flags = split_numbers(trim(lines[li].text).substr(4), ' ', lines[li].offset + 4);
    if (flags.size() != g.size()) throw ParseError("mask row has wrong length", lines[li].offset);
    for (std::size_t i = 0; i < flags.size(); ++i) g.set_masked(i, flags[i] != 0.0);
    ++li;
  }
  std::size_t k = 0;
  for (; li < lines.size(); ++li) {
    if (trim(lines[li].text).empty()) continue;
    for (double v : split_numbers(trim(lines[li].text), ' ', lines[li].offset)) {
      if (k >= g.size()) throw ParseError("too many grid values", lines[li].offset);
      g[k++] = v;
    }
  }
  if (k != g.size()) throw ParseError("expected " + std::to_string(g.size()) + " grid values", text.size());
  return g;
}

GridFunction read_grid(const std::string& path) { return parse_grid(read_file(path)); }

void write_grid(std::ostream& os, const GridFunction& g) {
  os << "grid n=" << g.n() << " shape=";
  for (std::size_t a = 0; a < g.n(); ++a) os << (a ? "," : "") << g.dims()[a];
  os << " origin=";
  for (std::size_t a = 0; a < g.n(); ++a) os << (a ? "," : "") << format_double(g.origin()[a]);
  os << " h=" << format_double(g.h()) << '\n';
  if (g.has_mask()) {
    os << "mask";
    for (std::size_t i = 0; i < g.size(); ++i) os << ' ' << (g.masked(i) ? 1 : 0);
    os << '\n';
  }
  const auto row = static_cast<std::size_t>(g.dims().back());
  for (std::size_t i = 0; i < g.size(); ++i) {
    os << format_double(g[i]) << ((i + 1) % row == 0 ? '\n' : ' ');
  }
}

void write_grid(const std::string& path, const GridFunction& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_grid(out, g);
}

}  // namespace conecalc::io

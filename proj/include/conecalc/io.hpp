#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "conecalc/grid.hpp"
#include "conecalc/symmat.hpp"

namespace conecalc::io {

/// n lines of n comma-separated floats.
SymMatrix parse_matrix_csv(std::string_view text);
SymMatrix read_matrix_csv(const std::string& path);
void write_matrix_csv(std::ostream& os, const SymMatrix& a);

/// One comma-separated point per line; blank lines and '#' comments skipped.
std::vector<Vector> parse_points_csv(std::string_view text);
std::vector<Vector> read_points_csv(const std::string& path);

/// Frames as blocks of comma-separated vectors separated by blank lines.
/// Each block is orthonormalized.
std::vector<Frame> parse_frames_csv(std::string_view text);
std::vector<Frame> read_frames_csv(const std::string& path);

/// Header `grid n=<n> shape=<d1,...> origin=<o1,...> h=<h>`, optional
/// `mask f f f ...` line, then one line per last-axis row; -inf spelled `-inf`.
GridFunction parse_grid(std::string_view text);
GridFunction read_grid(const std::string& path);
void write_grid(std::ostream& os, const GridFunction& g);
void write_grid(const std::string& path, const GridFunction& g);

std::string read_file(const std::string& path);
/// Shortest text that round-trips the double; -inf/inf/nan spelled out.
std::string format_double(double v);

}  // namespace conecalc::io

#include <sstream>

#include "conecalc/errors.hpp"
#include "conecalc/io.hpp"
#include "doctest.h"

using namespace conecalc;

TEST_CASE("matrix csv") {
  const SymMatrix a = io::parse_matrix_csv("1, 2\n2, -3.5\n");
  CHECK(a(1, 1) == -3.5);
  std::ostringstream os;
  io::write_matrix_csv(os, a);
  CHECK(io::parse_matrix_csv(os.str()) == a);
  CHECK_THROWS_AS(io::parse_matrix_csv("1,2\n3\n"), ParseError);
  CHECK_THROWS_AS(io::parse_matrix_csv("1,x\n2,3\n"), ParseError);
}

TEST_CASE("points and frames") {
  const auto pts = io::parse_points_csv("# header\n0,1\n\n2.5,-1\n");
  REQUIRE(pts.size() == 2);
  CHECK(pts[1] == Vector{2.5, -1.0});
  CHECK_THROWS_AS(io::parse_points_csv("0,1\n2\n"), ParseError);
  const auto frames = io::parse_frames_csv("1,0,0\n0,1,0\n\n0,0,1\n1,0,0\n");
  REQUIRE(frames.size() == 2);
  CHECK(frames[0].plane_dim() == 2);
}

TEST_CASE("grid round trip keeps -inf, mask and every bit") {
  GridFunction g({3, 4}, Vector{-1.0, 0.5}, 0.1);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = 1.0 / (3.0 + static_cast<double>(i));
  g[5] = kMinusInfinity;
  g.set_masked(5, true);
  std::ostringstream os;
  io::write_grid(os, g);
  const GridFunction back = io::parse_grid(os.str());
  CHECK(back.dims() == g.dims());
  CHECK(back.origin() == g.origin());
  CHECK(back.h() == g.h());
  CHECK(back.mask() == g.mask());
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(back[i] == g[i]);
  std::ostringstream again;
  io::write_grid(again, back);
  CHECK(again.str() == os.str());
  CHECK(os.str().rfind("grid n=2 shape=3,4 origin=-1,0.5 h=0.1\n", 0) == 0);
}

TEST_CASE("grid parse errors") {
  CHECK_THROWS_AS(io::parse_grid("grid n=2 shape=2,2 origin=0,0 h=1\n1 2\n3\n"), ParseError);
  CHECK_THROWS_AS(io::parse_grid("grid n=2 shape=2,2 origin=0 h=1\n1 2\n3 4\n"), ParseError);
  CHECK_THROWS_AS(io::parse_grid("nogrid\n"), ParseError);
  CHECK_THROWS(io::read_grid("/nonexistent/file.grid"));
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 12345.678}) CHECK(std::stod(io::format_double(v)) == v);
  CHECK(io::format_double(kMinusInfinity) == "-inf");
}

TEST_CASE("grid geometry helpers") {
  const GridFunction g({5, 5}, Vector{0.0, 0.0}, 0.25);
  CHECK(g.cell_of(Vector{0.51, 0.26}) == g.linear(std::vector<int>{2, 1}));
  CHECK_FALSE(g.cell_of(Vector{2.0, 0.0}).has_value());
  CHECK(g.boundary_distance(g.linear(std::vector<int>{2, 2})) == 2);
  CHECK(g.multi(g.linear(std::vector<int>{3, 1})) == Index{3, 1});
  CHECK_THROWS_AS(GridFunction({5, 5}, Vector{0.0, 0.0}, -1.0), DomainError);
}

#pragma once

#include <array>
#include <span>
#include <vector>

#include "cmc/geometry.hpp"

namespace cmc::detail {

// Incremental Bowyer-Watson Delaunay triangulation of a planar point set.
// The hull is closed with ghost triangles sharing a vertex at infinity, so no
// bounding super-triangle is needed and collinear hull points are handled
// exactly. Points are inserted in the given order; the output is the list of
// counterclockwise solid triangles and depends only on the input.
std::vector<std::array<int, 3>> delaunay(std::span<const Point> points);

double orient(const Point& a, const Point& b, const Point& c);

}  // namespace cmc::detail

#pragma once

#include <string>
#include <vector>

#include "dlab/common.hpp"
#include "dlab/system.hpp"

namespace dlab {

// Passage through the corner ball in the linear model
//   L = (V1^2 + l1^2 X1^2) / (2 l1) + (V2^2 + l2^2 X2^2) / (2 l2),
// entering at X1pt and leaving at X2pt after time T.
struct CornerActionInput {
  double lambda1 = 1, lambda2 = 1;
  Vec2 X1pt{0, 0}, X2pt{0, 0};
  double T = 1;
  void validate() const;
};

// exact action of the hyperbolic-cosine trajectory:
//   sum_i ((a_i^2 + b_i^2) cosh l_i T - 2 a_i b_i) / (2 sinh l_i T),  a = X1pt, b = X2pt
double through_action(const CornerActionInput& in);
// |X1pt|^2/2 coth(l1 T) + |X2pt|^2/2 coth(l2 T); equal to through_action when the entry point
// lies on the X1 axis and the exit point on the X2 axis
double through_action_displayed(const CornerActionInput& in);
// (|X1pt|^2 + |X2pt|^2) / 2: in along the stable manifold, out along the unstable one
double broken_action(const CornerActionInput& in);

// through_action - broken_action without the cancellation of coth(l T) - 1; stays
// positive where the two rounded actions are equal
double through_minus_broken(const CornerActionInput& in);

// quadrature of L along the explicit trajectories (composite Gauss-Legendre)
double through_action_quadrature(const CornerActionInput& in);
double broken_action_quadrature(const CornerActionInput& in);
// max |X(t) - X| at the two ends of the explicit through trajectory
double through_boundary_error(const CornerActionInput& in);

using HClass = std::array<int, 2>;

bool admissible_class(const HClass& g);
std::vector<HClass> decompose_homology(const HClass& n);

struct FlatEdge {
  HClass g{1, 0};
  double c_g = 0;  // support distance: the edge lies on <g/|g|, c> = c_g
};

struct FlatPolygon {
  std::vector<Vec2> vertices;  // counterclockwise
  std::vector<HClass> edge_class;  // class of the edge from vertex k to k+1
  std::string kind;            // rectangle, hexagon, octagon
  double edge_defect = 0;      // max |<g/|g|, c> - c_g| over edge endpoints
  double symmetry_defect = 0;  // max distance from -v to the nearest vertex
  Report report;
  std::string csv() const;     // x,y
  Vec2 centroid() const;       // vertex mean; the origin when empty
};

// Intersection of the half-planes <g/|g|, c> <= c_g. The input must be centrally symmetric
// (g and -g with the same c_g) and use admissible classes only.
FlatPolygon flat_polygon(const std::vector<FlatEdge>& edges, double tol = 1e-9);

// (1 / 2 pi) int_0^{2 pi} sqrt(-2 Z(x) / a) dx
double separatrix_c_value(const Trig1& Z, double a = 1);

}  // namespace dlab

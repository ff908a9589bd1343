#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "drm/field.hpp"
#include "drm/quadrature.hpp"

namespace drm {

/// -Laplace(u) + w u = f on [0,1]^d, u = 0 on the boundary, penalized with lambda.
///
/// c1 <= w <= w_sup and |f| <= c3 with c3 >= w_sup. `exact` is the
/// Dirichlet solution when known.
struct PdeProblem {
  std::string name;
  int dim = 1;
  ScalarField w;
  ScalarField f;
  double c1 = 0.0;
  double w_sup = 0.0;
  double c3 = 0.0;
  double lambda = 1.0;
  std::optional<Field> exact;

  /// Structural checks: dim >= 1, c1 >= 0, lambda > 0, c3 >= w_sup >= c1.
  void validate() const;

  /// Samples `samples` interior points and checks the declared bounds
  /// (up to 1e-12 slack). Throws DomainError on violation.
  void audit(std::size_t samples = 10000, std::uint64_t seed = 0) const;

  PdeProblem with_lambda(double lam) const;
};

/// Built-in problems: sine-1d, sine-2d, sine-3d, sine-varw-1d, constant-1d,
/// zero-1d, zero-2d, zero-3d.
PdeProblem make_problem(std::string_view name, double lambda = 1.0);
std::vector<std::string> problem_names();

/// {dim, w: "const:<v>" | "registry:<name>", f: "const:<v>" | "registry:<name>", lambda}
///
/// The exact solution is attached when w and f both come from the same
/// registry problem (a constant w equal to that problem's w counts).
PdeProblem problem_from_json(const nlohmann::json& j);

/// Monte Carlo batch: interior points in (0,1)^d, boundary points on the faces.
struct SampleBatch {
  PointSet interior;
  PointSet boundary;
  std::uint64_t seed = 0;
};

PointSet sample_interior(std::size_t n, int d, std::uint64_t seed);
/// Picks one of the 2d faces uniformly, then a uniform point on it.
PointSet sample_boundary(std::size_t m, int d, std::uint64_t seed);
SampleBatch sample_batch(std::size_t n, std::size_t m, int d, std::uint64_t seed);

/// Face id (2 * axis + side) of a boundary point, or -1 if interior.
int face_of(const Eigen::Ref<const Vector>& y);

/// sqrt(int (u-v)^2 + |grad u - grad v|^2)
double h1_distance(const Field& u, const Field& v, const CubeQuadrature& quad);
double h1_norm(const Field& u, const CubeQuadrature& quad);
double l2_distance(const Field& u, const Field& v, const CubeQuadrature& quad);
/// sqrt(int over the boundary of (u-v)^2)
double l2_boundary_distance(const Field& u, const Field& v, const CubeQuadrature& quad);

}  // namespace drm

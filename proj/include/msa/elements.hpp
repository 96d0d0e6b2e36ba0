#pragma once

// Link models. Node wrenches W are the wrenches applied to the link end by
// its node; a flexible link obeys W = K * [dt_i; dt_j].

#include <optional>
#include <string>

#include "msa/equations.hpp"
#include "msa/screw.hpp"

namespace msa {

struct Material {
  double E = 0.0;  // Young's modulus [Pa]
  double G = 0.0;  // shear modulus [Pa]
};

struct CrossSection {
  double A = 0.0;   // [m^2]
  double Iy = 0.0;  // [m^4]
  double Iz = 0.0;  // [m^4]
  double J = 0.0;   // torsion constant [m^4]

  static CrossSection circular(double diameter);
};

struct FlexibleLink {
  std::string id;
  std::string node_i;
  std::string node_j;
  Matrix12 K;  // global frame
  Vector3 d;   // node i -> node j [m]

  Matrix6 block(int row, int col) const { return K.block<6, 6>(6 * row, 6 * col); }
};

struct RigidLink {
  std::string id;
  std::string node_i;
  std::string node_j;
  Vector3 d;
};

/// Euler-Bernoulli free-free frame element in its local frame (x along the
/// axis, node i at the origin). Throws ModelError on non-positive parameters.
Matrix12 beam_stiffness(const Material& mat, const CrossSection& sec, double length);

/// Local-to-global rotation of a beam: x along `axis`, y = normalize(hint x x),
/// z = x cross y. Without a hint, world z is used unless the axis is within
/// 1e-6 of it, in which case world y is used.
Rotation beam_frame(const Vector3& axis, const std::optional<Vector3>& orientation_hint = {});

/// Beam between two positioned nodes, stiffness rotated to the global frame.
FlexibleLink beam_link(std::string id, std::string node_i, std::string node_j,
                       const Vector3& position_i, const Vector3& position_j,
                       const Material& mat, const CrossSection& sec,
                       const std::optional<Vector3>& orientation_hint = {});

/// Wraps an externally identified global-frame stiffness matrix, checking
/// symmetry, positive semi-definiteness and the rigid-body null space
/// {[t; D(d) t]}. Throws ModelError on violation.
FlexibleLink custom_flexible_link(std::string id, std::string node_i, std::string node_j,
                                  const Matrix12& k_global, const Vector3& d);

/// 12 rows: K [dt_i; dt_j] - [W_i; W_j] = 0.
EquationRows flexible_link_rows(const FlexibleLink& link);

/// 6 rows [D, -I][dt_i; dt_j] = 0 and 6 rows [I, D^T][W_i; W_j] = 0.
EquationRows rigid_link_rows(const RigidLink& link);

/// Twist pairs [t; D(d) t] for the six unit twists t, as a 12x6 matrix.
Eigen::Matrix<double, 12, 6> rigid_motion_basis(const Vector3& d);

}  // namespace msa

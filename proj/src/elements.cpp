#include "msa/elements.hpp"

#include <cmath>
#include <numbers>

#include "msa/errors.hpp"

namespace msa {

CrossSection CrossSection::circular(double diameter) {
  const double r = 0.5 * diameter;
  const double area = std::numbers::pi * r * r;
  const double inertia = std::numbers::pi * std::pow(r, 4) / 4.0;
  return {area, inertia, inertia, 2.0 * inertia};
}

Matrix12 beam_stiffness(const Material& mat, const CrossSection& sec, double length) {
  if (!(length > 0.0)) throw ModelError("beam length must be positive");
  if (!(mat.E > 0.0) || !(mat.G > 0.0)) throw ModelError("material moduli must be positive");
  if (!(sec.A > 0.0) || !(sec.Iy > 0.0) || !(sec.Iz > 0.0) || !(sec.J > 0.0)) {
    throw ModelError("section properties must be positive");
  }

  const double L = length;
  const double L2 = L * L;
  const double L3 = L2 * L;
  const double axial = mat.E * sec.A / L;
  const double torsion = mat.G * sec.J / L;
  const double ez = mat.E * sec.Iz;  // bending in the local x-y plane
  const double ey = mat.E * sec.Iy;  // bending in the local x-z plane

  Matrix12 k = Matrix12::Zero();
  auto set = [&k](int r, int c, double v) {
    k(r, c) = v;
    k(c, r) = v;
  };

  // DOF order per node: ux uy uz rx ry rz
  set(0, 0, axial);
  set(6, 6, axial);
  set(0, 6, -axial);

  set(3, 3, torsion);
  set(9, 9, torsion);
  set(3, 9, -torsion);

  set(1, 1, 12.0 * ez / L3);
  set(7, 7, 12.0 * ez / L3);
  set(1, 7, -12.0 * ez / L3);
  set(1, 5, 6.0 * ez / L2);
  set(1, 11, 6.0 * ez / L2);
  set(5, 7, -6.0 * ez / L2);
  set(7, 11, -6.0 * ez / L2);
  set(5, 5, 4.0 * ez / L);
  set(11, 11, 4.0 * ez / L);
  set(5, 11, 2.0 * ez / L);

  set(2, 2, 12.0 * ey / L3);
  set(8, 8, 12.0 * ey / L3);
  set(2, 8, -12.0 * ey / L3);
  set(2, 4, -6.0 * ey / L2);
  set(2, 10, -6.0 * ey / L2);
  set(4, 8, 6.0 * ey / L2);
  set(8, 10, 6.0 * ey / L2);
  set(4, 4, 4.0 * ey / L);
  set(10, 10, 4.0 * ey / L);
  set(4, 10, 2.0 * ey / L);

  return k;
}

Rotation beam_frame(const Vector3& axis, const std::optional<Vector3>& orientation_hint) {
  const double length = axis.norm();
  if (!(length > 0.0)) throw ModelError("beam axis has zero length");
  const Vector3 x = axis / length;

  Vector3 hint;
  if (orientation_hint) {
    hint = *orientation_hint;
  } else {
    hint = std::abs(x.dot(Vector3::UnitZ())) > 1.0 - 1e-6 ? Vector3::UnitY() : Vector3::UnitZ();
  }
  Vector3 y = hint.cross(x);
  const double ny = y.norm();
  if (!(ny > 1e-9 * std::max(1.0, hint.norm()))) {
    throw ModelError("orientation hint is parallel to the beam axis");
  }
  y /= ny;
  const Vector3 z = x.cross(y);

  Matrix3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return Rotation(r);
}

FlexibleLink beam_link(std::string id, std::string node_i, std::string node_j,
                       const Vector3& position_i, const Vector3& position_j,
                       const Material& mat, const CrossSection& sec,
                       const std::optional<Vector3>& orientation_hint) {
  const Vector3 d = position_j - position_i;
  Matrix12 k_global;
  try {
    const Rotation frame = beam_frame(d, orientation_hint);
    k_global = rotate_stiffness(beam_stiffness(mat, sec, d.norm()), frame);
  } catch (const ModelError& e) {
    throw ModelError("link '" + id + "': " + e.what(), id);
  }
  // Remove rounding asymmetry introduced by the frame change.
  const Matrix12 sym = 0.5 * (k_global + k_global.transpose());
  return {std::move(id), std::move(node_i), std::move(node_j), sym, d};
}

Eigen::Matrix<double, 12, 6> rigid_motion_basis(const Vector3& d) {
  Eigen::Matrix<double, 12, 6> n;
  n.topRows<6>().setIdentity();
  n.bottomRows<6>() = transport_matrix(d).matrix();
  return n;
}

FlexibleLink custom_flexible_link(std::string id, std::string node_i, std::string node_j,
                                  const Matrix12& k_global, const Vector3& d) {
  auto fail = [&id](const std::string& why) -> ModelError {
    return ModelError("link '" + id + "': " + why, id);
  };
  if (!k_global.allFinite()) throw fail("stiffness matrix has non-finite entries");
  const double scale = k_global.cwiseAbs().maxCoeff();
  if (scale == 0.0) throw fail("stiffness matrix is zero");
  if (relative_asymmetry(k_global) > 1e-9) throw fail("stiffness matrix is not symmetric");

  const Eigen::SelfAdjointEigenSolver<Matrix12> eig(0.5 * (k_global + k_global.transpose()),
                                                     Eigen::EigenvaluesOnly);
  const auto& lambda = eig.eigenvalues();
  const double lambda_max = lambda.maxCoeff();
  if (lambda.minCoeff() < -1e-6 * lambda_max) {
    throw fail("stiffness matrix is not positive semi-definite");
  }

  const Eigen::Matrix<double, 12, 6> rigid = rigid_motion_basis(d);
  const double leak = (k_global * rigid).cwiseAbs().maxCoeff();
  const double lever = std::max(1.0, d.cwiseAbs().maxCoeff());
  const int near_zero = static_cast<int>((lambda.array().abs() < 1e-9 * lambda_max).count());
  if (leak > 1e-8 * scale * lever || near_zero != 6) {
    throw fail("stiffness matrix does not have the rigid-body null space of a free-free link");
  }
  return {std::move(id), std::move(node_i), std::move(node_j), k_global, d};
}

EquationRows flexible_link_rows(const FlexibleLink& link) {
  EquationRows eq({{0, Quantity::deflection},
                   {1, Quantity::deflection},
                   {0, Quantity::wrench},
                   {1, Quantity::wrench}},
                  12);
  eq.coefficients.leftCols<12>() = link.K;
  eq.coefficients.rightCols<12>() = -Eigen::MatrixXd::Identity(12, 12);
  eq.add_segment("stiffness", 0, 12);
  return eq;
}

EquationRows rigid_link_rows(const RigidLink& link) {
  EquationRows eq({{0, Quantity::deflection},
                   {1, Quantity::deflection},
                   {0, Quantity::wrench},
                   {1, Quantity::wrench}},
                  12);
  const Matrix6 d = transport_matrix(link.d).matrix();
  eq.block(0, 6, 0) = d;
  eq.block(0, 6, 1) = -Matrix6::Identity();
  eq.block(6, 6, 2) = Matrix6::Identity();
  eq.block(6, 6, 3) = d.transpose();
  eq.add_segment("rigid kinematics", 0, 6);
  eq.add_segment("rigid statics", 6, 6);
  return eq;
}

}  // namespace msa

#include "msa/oracle.hpp"

#include <stdexcept>

namespace msa::oracle {

namespace {

// Twist transport from a point to another lying `lever` away.
Matrix6 twist_transport(const Vector3& lever) {
  Matrix6 t = Matrix6::Identity();
  // dp_target = dp + dphi x lever
  t(0, 4) = lever.z();
  t(0, 5) = -lever.y();
  t(1, 3) = -lever.z();
  t(1, 5) = lever.x();
  t(2, 3) = lever.y();
  t(2, 4) = -lever.x();
  return t;
}

}  // namespace

Matrix6 cantilever_compliance(double E, double G, double A, double Iy, double Iz, double J,
                              double L) {
  Matrix6 c = Matrix6::Zero();
  c(0, 0) = L / (E * A);
  c(3, 3) = L / (G * J);
  // x-y plane: uy and rz respond to Fy and Mz
  c(1, 1) = L * L * L / (3.0 * E * Iz);
  c(1, 5) = L * L / (2.0 * E * Iz);
  c(5, 1) = c(1, 5);
  c(5, 5) = L / (E * Iz);
  // x-z plane: a positive Fz tip load turns the tip by a negative ry
  c(2, 2) = L * L * L / (3.0 * E * Iy);
  c(2, 4) = -L * L / (2.0 * E * Iy);
  c(4, 2) = c(2, 4);
  c(4, 4) = L / (E * Iy);
  return c;
}

CompliantElement beam_element(const Vector3& start, const Vector3& end,
                              const Eigen::Matrix3d& local_axes, double E, double G, double A,
                              double Iy, double Iz, double J) {
  const double L = (end - start).norm();
  Matrix6 rot = Matrix6::Zero();
  rot.topLeftCorner<3, 3>() = local_axes;
  rot.bottomRightCorner<3, 3>() = local_axes;
  return {end, rot * cantilever_compliance(E, G, A, Iy, Iz, J, L) * rot.transpose()};
}

CompliantElement spring_element(const Vector3& point, const Vector6& direction,
                                double stiffness) {
  return {point, direction * direction.transpose() / stiffness};
}

Matrix6 vjm_serial_compliance(const SerialChainSpec& chain) {
  Matrix6 c = Matrix6::Zero();
  for (const auto& element : chain.elements) {
    const Matrix6 jac = twist_transport(chain.end_effector - element.point);
    c += jac * element.compliance * jac.transpose();
  }
  return c;
}

Matrix6 vjm_serial_stiffness(const SerialChainSpec& chain) {
  const Matrix6 c = vjm_serial_compliance(chain);
  const Eigen::JacobiSVD<Matrix6> svd(c);
  const auto& s = svd.singularValues();
  if (!(s(5) > 1e-14 * s(0))) {
    throw std::runtime_error("accumulated compliance is singular");
  }
  return c.inverse();
}

Eigen::MatrixXd dense_nullspace(const Eigen::MatrixXd& matrix, double relative_tolerance) {
  const Eigen::Index n = matrix.cols();
  if (n == 0) return Eigen::MatrixXd(0, 0);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double largest = s.size() ? s(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (s(k) >= relative_tolerance * largest && s(k) > 0.0) ++rank;
  }
  return svd.matrixV().rightCols(n - rank);
}

}  // namespace msa::oracle

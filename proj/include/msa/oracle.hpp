#pragma once

// Reference computations that do not share code with the assembly and solver:
// closed-form cantilever compliance, serial compliance composition (virtual
// joint style), and a dense SVD null space.

#include <vector>

#include <Eigen/Dense>

namespace msa::oracle {

using Vector3 = Eigen::Vector3d;
using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;

/// Tip compliance of a clamped Euler-Bernoulli beam of length L along local x,
/// ordered [translation; rotation] x [force; moment].
Matrix6 cantilever_compliance(double E, double G, double A, double Iy, double Iz, double J,
                              double L);

/// One compliant element of a serial chain: maps a wrench applied at `point`
/// to the twist it causes at `point`, both in the global frame.
struct CompliantElement {
  Vector3 point = Vector3::Zero();
  Matrix6 compliance = Matrix6::Zero();
};

/// Clamped beam from `start` to `end` with a local frame whose columns are the
/// local axes in global coordinates.
CompliantElement beam_element(const Vector3& start, const Vector3& end,
                              const Eigen::Matrix3d& local_axes, double E, double G, double A,
                              double Iy, double Iz, double J);

/// Single-direction spring with unit free twist `direction` at `point`.
CompliantElement spring_element(const Vector3& point, const Vector6& direction, double stiffness);

struct SerialChainSpec {
  std::vector<CompliantElement> elements;  // base to end effector
  Vector3 end_effector = Vector3::Zero();
};

/// Sum of element compliances transported to the end effector, inverted.
/// Throws std::runtime_error if the accumulated compliance is singular.
Matrix6 vjm_serial_stiffness(const SerialChainSpec& chain);

/// Accumulated end-effector compliance of the chain.
Matrix6 vjm_serial_compliance(const SerialChainSpec& chain);

/// Orthonormal basis (columns) of the right null space: right singular vectors
/// with singular value below `relative_tolerance` times the largest.
Eigen::MatrixXd dense_nullspace(const Eigen::MatrixXd& matrix,
                                double relative_tolerance = 1e-9);

}  // namespace msa::oracle

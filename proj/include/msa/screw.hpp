#pragma once

// Small-deflection screw algebra: twists, wrenches and the 6x6 operators that
// move them between points and frames. Six-vectors are ordered
// [translation; rotation] for twists and [force; moment] for wrenches.

#include <Eigen/Dense>

namespace msa {

using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;
using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Matrix12 = Eigen::Matrix<double, 12, 12>;

/// Small deflection of a node: translation dp [m] and rotation dphi [rad].
struct Twist {
  Vector3 dp = Vector3::Zero();
  Vector3 dphi = Vector3::Zero();

  static Twist from_vector(const Vector6& v) { return {v.head<3>(), v.tail<3>()}; }
  Vector6 vector() const {
    Vector6 v;
    v << dp, dphi;
    return v;
  }
};

/// Force f [N] and moment m [N*m] acting at a node.
struct Wrench {
  Vector3 f = Vector3::Zero();
  Vector3 m = Vector3::Zero();

  static Wrench from_vector(const Vector6& v) { return {v.head<3>(), v.tail<3>()}; }
  Vector6 vector() const {
    Vector6 v;
    v << f, m;
    return v;
  }
};

/// Proper rotation matrix. Construction rejects matrices that are not
/// orthonormal (|R^T R - I| > 1e-9) or have det != +1.
class Rotation {
 public:
  Rotation() = default;
  explicit Rotation(const Matrix3& r);

  static Rotation identity() { return Rotation{}; }

  const Matrix3& matrix() const { return r_; }
  Rotation transpose() const;
  Vector3 operator*(const Vector3& v) const { return r_ * v; }

 private:
  Matrix3 r_ = Matrix3::Identity();
};

/// Rigid-body transport of small twists across a lever arm d (from point i
/// to point j): D = [[I, [d x]^T], [0, I]], so that t_j = D t_i.
class TransportMatrix {
 public:
  explicit TransportMatrix(const Vector3& d);

  const Matrix6& matrix() const { return m_; }
  const Vector3& offset() const { return d_; }
  TransportMatrix inverse() const { return TransportMatrix(-d_); }

  Twist operator*(const Twist& t) const;

 private:
  Vector3 d_;
  Matrix6 m_;
};

Matrix3 skew(const Vector3& v);

TransportMatrix transport_matrix(const Vector3& d);

/// blockdiag(R, R); maps twists and wrenches from a local frame to the
/// global frame.
Matrix6 adjoint_rotation(const Rotation& r);

/// Re-expresses a 12x12 two-node stiffness matrix given in the frame `r`
/// in the global frame. Throws std::invalid_argument if `k_local` is not
/// symmetric within 1e-9 relative.
Matrix12 rotate_stiffness(const Matrix12& k_local, const Rotation& r);

/// Moves the reference point of a wrench: the moment about a point lying at
/// -d from the current reference, m' = m + d x f.
Wrench transport_wrench(const Wrench& w, const Vector3& d);

/// Largest |A - A^T| entry relative to the largest |A| entry (0 for A = 0).
double relative_asymmetry(const Eigen::Ref<const Eigen::MatrixXd>& a);

}  // namespace msa

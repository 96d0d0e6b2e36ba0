#include "msa/screw.hpp"

#include <cmath>
#include <stdexcept>

namespace msa {

Rotation::Rotation(const Matrix3& r) : r_(r) {
  if (!r.allFinite()) {
    throw std::invalid_argument("rotation has non-finite entries");
  }
  const double orthogonality = (r.transpose() * r - Matrix3::Identity()).cwiseAbs().maxCoeff();
  if (orthogonality > 1e-9) {
    throw std::invalid_argument("rotation is not orthonormal (|R^T R - I| = " +
                                std::to_string(orthogonality) + ")");
  }
  if (std::abs(r.determinant() - 1.0) > 1e-9) {
    throw std::invalid_argument("rotation is improper (det != +1)");
  }
}

Rotation Rotation::transpose() const {
  Rotation t;
  t.r_ = r_.transpose();
  return t;
}

Matrix3 skew(const Vector3& v) {
  Matrix3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return s;
}

TransportMatrix::TransportMatrix(const Vector3& d) : d_(d) {
  m_.setIdentity();
  m_.topRightCorner<3, 3>() = skew(d).transpose();
}

Twist TransportMatrix::operator*(const Twist& t) const {
  return {t.dp + t.dphi.cross(d_), t.dphi};
}

TransportMatrix transport_matrix(const Vector3& d) { return TransportMatrix(d); }

Matrix6 adjoint_rotation(const Rotation& r) {
  Matrix6 a = Matrix6::Zero();
  a.topLeftCorner<3, 3>() = r.matrix();
  a.bottomRightCorner<3, 3>() = r.matrix();
  return a;
}

double relative_asymmetry(const Eigen::Ref<const Eigen::MatrixXd>& a) {
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) {
    return 0.0;
  }
  return (a - a.transpose()).cwiseAbs().maxCoeff() / scale;
}

Matrix12 rotate_stiffness(const Matrix12& k_local, const Rotation& r) {
  if (relative_asymmetry(k_local) > 1e-9) {
    throw std::invalid_argument("stiffness matrix is not symmetric");
  }
  Matrix12 t = Matrix12::Zero();
  const Matrix6 ad = adjoint_rotation(r);
  t.topLeftCorner<6, 6>() = ad;
  t.bottomRightCorner<6, 6>() = ad;
  return t * k_local * t.transpose();
}

Wrench transport_wrench(const Wrench& w, const Vector3& d) {
  return {w.f, w.m + d.cross(w.f)};
}

}  // namespace msa

#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "msa/screw.hpp"

using namespace msa;

namespace {

Vector3 random_vector(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return {n(rng), n(rng), n(rng)};
}

}  // namespace

TEST_CASE("skew matches the cross product") {
  CHECK(skew(Vector3::Zero()).isZero(0.0));

  Matrix3 expected;
  expected << 0, -3, 2, 3, 0, -1, -2, 1, 0;
  CHECK(skew(Vector3(1, 2, 3)) == expected);

  std::mt19937_64 rng(1);
  for (int k = 0; k < 50; ++k) {
    const Vector3 v = random_vector(rng);
    const Vector3 w = random_vector(rng);
    CHECK((skew(v) * w - v.cross(w)).norm() < 1e-14);
    CHECK((skew(v) * v).norm() < 1e-14);
    CHECK((skew(v) + skew(v).transpose()).isZero(0.0));
  }
}

TEST_CASE("transport matrix moves twists across a lever arm") {
  CHECK(transport_matrix(Vector3::Zero()).matrix() == Matrix6::Identity());

  const double theta = 0.01;
  const Twist t = transport_matrix(Vector3(1, 0, 0)) * Twist{Vector3::Zero(), Vector3(0, 0, theta)};
  CHECK((t.dp - Vector3(0, theta, 0)).norm() < 1e-15);
  CHECK((t.dphi - Vector3(0, 0, theta)).norm() < 1e-15);

  std::mt19937_64 rng(2);
  for (int k = 0; k < 20; ++k) {
    const Vector3 d1 = random_vector(rng);
    const Vector3 d2 = random_vector(rng);
    const Matrix6 product = transport_matrix(d1).matrix() * transport_matrix(d2).matrix();
    CHECK((product - transport_matrix(d1 + d2).matrix()).norm() < 1e-12);
    CHECK((transport_matrix(d1).inverse().matrix() * transport_matrix(d1).matrix() -
           Matrix6::Identity())
              .norm() < 1e-12);
  }
}

TEST_CASE("rotation validation and adjoint") {
  CHECK(adjoint_rotation(Rotation::identity()) == Matrix6::Identity());

  Matrix3 skewed = Matrix3::Identity();
  skewed(0, 1) = 1e-6;
  CHECK_THROWS_AS(Rotation{skewed}, std::invalid_argument);
  CHECK_THROWS_AS(Rotation{Matrix3(-Matrix3::Identity())}, std::invalid_argument);

  std::mt19937_64 rng(3);
  for (int k = 0; k < 20; ++k) {
    const Rotation r(fixtures::random_rotation(rng));
    const Matrix6 ad = adjoint_rotation(r);
    CHECK((ad.transpose() - adjoint_rotation(r.transpose())).norm() < 1e-14);
    const Twist t{random_vector(rng), random_vector(rng)};
    const Twist moved = Twist::from_vector(ad * t.vector());
    CHECK(std::abs(moved.dp.norm() - t.dp.norm()) < 1e-12);
    CHECK(std::abs(moved.dphi.norm() - t.dphi.norm()) < 1e-12);
  }
}

TEST_CASE("rotate_stiffness is an orthogonal similarity") {
  const Matrix12 k = beam_stiffness(fixtures::steel(), fixtures::rod(), 0.7);
  CHECK((rotate_stiffness(k, Rotation::identity()) - k).norm() == 0.0);

  std::mt19937_64 rng(4);
  const Eigen::SelfAdjointEigenSolver<Matrix12> local(k);
  for (int n = 0; n < 10; ++n) {
    const Rotation r(fixtures::random_rotation(rng));
    const Matrix12 g = rotate_stiffness(k, r);
    CHECK(relative_asymmetry(g) < 1e-12);
    const Eigen::SelfAdjointEigenSolver<Matrix12> global(0.5 * (g + g.transpose()));
    CHECK((global.eigenvalues() - local.eigenvalues()).norm() <
          1e-8 * local.eigenvalues().cwiseAbs().maxCoeff());
    const Matrix12 back = rotate_stiffness(rotate_stiffness(k, r), r.transpose());
    CHECK((back - k).norm() < 1e-9 * k.norm());
  }

  Matrix12 bad = k;
  bad(0, 1) += 1.0;
  CHECK_THROWS_AS(rotate_stiffness(bad, Rotation::identity()), std::invalid_argument);
}

TEST_CASE("transport_wrench shifts the moment") {
  const Wrench w{Vector3(0, 1, 0), Vector3::Zero()};
  const Wrench same = transport_wrench(w, Vector3::Zero());
  CHECK(same.f == w.f);
  CHECK(same.m == w.m);

  const Wrench moved = transport_wrench(w, Vector3(1, 0, 0));
  CHECK((moved.m - Vector3(0, 0, 1)).norm() < 1e-15);
  CHECK(moved.f == w.f);

  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    const Wrench a{random_vector(rng), random_vector(rng)};
    const Vector3 d = random_vector(rng);
    const Wrench back = transport_wrench(transport_wrench(a, d), -d);
    CHECK((back.vector() - a.vector()).norm() < 1e-12);
    // Same as the transposed twist transport D(d)^T.
    const Vector6 via_matrix = transport_matrix(d).matrix().transpose() * a.vector();
    CHECK((via_matrix - transport_wrench(a, d).vector()).norm() < 1e-12);
  }
}

TEST_CASE("twist and wrench vectors round-trip") {
  Vector6 v;
  v << 1, 2, 3, 4, 5, 6;
  CHECK(Twist::from_vector(v).vector() == v);
  CHECK(Wrench::from_vector(v).vector() == v);
  CHECK(Twist::from_vector(v).dphi == Vector3(4, 5, 6));
  CHECK(Wrench::from_vector(v).f == Vector3(1, 2, 3));
}

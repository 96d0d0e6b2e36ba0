#pragma once

// Model fixtures shared by the unit and acceptance tests. Every builder takes a
// rotation applied about the origin to positions, orientation hints, free
// twists and loads, so that frame invariance can be checked on each fixture.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "msa/model.hpp"
#include "msa/oracle.hpp"

namespace msa::fixtures {

inline constexpr double kE = 200e9;
inline constexpr double kG = 80e9;
inline constexpr double kDiameter = 0.02;

Material steel();
CrossSection rod(double diameter = kDiameter);

/// Single clamped beam along x from the origin, tip loaded.
ManipulatorModel cantilever(double length = 1.0, const Matrix3& rot = Matrix3::Identity(),
                            const Wrench& tip_load = {});

/// Two beams of length/2 joined by a rigid joint.
ManipulatorModel split_cantilever(double length = 1.0, const Matrix3& rot = Matrix3::Identity());

/// Rigid arm from the base to a torsional spring about z at x = 0.5, then a
/// rigid arm of length r to the end effector.
ManipulatorModel spring_lever(double k = 1000.0, double r = 0.5,
                              const Matrix3& rot = Matrix3::Identity());

/// Two identical cantilevers from coincident bases, tips joined rigidly.
ManipulatorModel twin_legs(const Matrix3& rot = Matrix3::Identity());

/// Two beams from distinct bases meeting at a rigid joint carrying the end
/// effector.
ManipulatorModel bipod(const Matrix3& rot = Matrix3::Identity(), const Wrench& ee_load = {});

/// Three links meeting at one rigid joint: base beam, end-effector beam and a
/// free side branch.
ManipulatorModel tee(const Matrix3& rot = Matrix3::Identity());

/// Beam, connection, beam in series along x. Without `k` the connection is a
/// rigid joint; otherwise an elastic joint with Ke = k I5 on every direction
/// except the rotation about x.
ManipulatorModel jointed_beams(std::optional<double> k, const Matrix3& rot = Matrix3::Identity());

/// Bent beam pair (L shape) on a support. Without `k` the support is rigid;
/// otherwise elastic with Ke = k I5 as in jointed_beams.
ManipulatorModel supported_frame(std::optional<double> k, const Matrix3& rot = Matrix3::Identity());

/// Three beams with two 1-dof elastic joints (about z, then about y) carrying
/// preloads `p1` and `p2`.
ManipulatorModel preloaded_chain(double p1, double p2, const Matrix3& rot = Matrix3::Identity());

/// Beam, passive revolute about z at x = 0.5, beam to the tip at x = 1.
ManipulatorModel passive_revolute_chain(const Matrix3& rot = Matrix3::Identity());

/// Cantilever whose mid joint also carries a rigid appendage hinged by a
/// passive revolute: the appendage swings freely.
ManipulatorModel swinging_appendage();

/// Beam chain with a locked actuator and an actuator with drive stiffness.
ManipulatorModel actuated_chain(const Matrix3& rot = Matrix3::Identity());

/// Frame with an elastic joint and a passive (spherical) support constraint.
ManipulatorModel mixed_supports(const Matrix3& rot = Matrix3::Identity());

struct NamedFixture {
  std::string name;
  std::function<ManipulatorModel(const Matrix3&)> build;
  bool preloaded = false;
};

/// Regular (nonsingular Kc) fixtures used by the property suites.
std::vector<NamedFixture> regular_fixtures();

struct RandomChain {
  ManipulatorModel model;
  oracle::SerialChainSpec oracle;
};

/// Random serial chain of 2-5 beams joined by 1-dof elastic revolute or
/// prismatic joints. The oracle spec is built from its own beam frames.
RandomChain random_serial_chain(std::mt19937_64& rng);

Matrix3 random_rotation(std::mt19937_64& rng);

/// blockdiag(R, R).
Matrix6 adjoint(const Matrix3& rot);

/// Variable values stacked in the order an equation block expects them,
/// indexed by slot.
Eigen::VectorXd stack(const EquationRows& eq, const std::vector<Vector6>& deflections,
                      const std::vector<Vector6>& wrenches);

double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Sum of all reactions and external wrenches (end effector and other loads)
/// transported to the origin.
Wrench resultant(const ManipulatorModel& model, const std::vector<std::pair<std::string, Wrench>>& reactions,
                 const Wrench& ee_wrench, const std::string& ee_node);

}  // namespace msa::fixtures

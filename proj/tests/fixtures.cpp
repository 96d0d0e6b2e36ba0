#include "fixtures.hpp"

#include <cmath>

namespace msa::fixtures {

namespace {

Vector6 twist_row(const Matrix3& rot, const Vector3& v, const Vector3& w) {
  Vector6 t;
  t << rot * v, rot * w;
  return t;
}

Eigen::MatrixXd rows(std::initializer_list<Vector6> twists) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(twists.size()), 6);
  Eigen::Index k = 0;
  for (const auto& t : twists) m.row(k++) = t.transpose();
  return m;
}

Eigen::MatrixXd scalar(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

// Every unit twist except the rotation about x.
Eigen::MatrixXd five_free(const Matrix3& rot) {
  Eigen::MatrixXd free(5, 6);
  Eigen::Index row = 0;
  for (int i = 0; i < 6; ++i) {
    if (i == 3) continue;
    free.row(row++) =
        twist_row(rot, Vector6::Unit(i).head<3>(), Vector6::Unit(i).tail<3>()).transpose();
  }
  return free;
}

Wrench rotate(const Matrix3& rot, const Wrench& w) { return {rot * w.f, rot * w.m}; }

}  // namespace

Material steel() { return {kE, kG}; }
CrossSection rod(double diameter) { return CrossSection::circular(diameter); }

ManipulatorModel cantilever(double length, const Matrix3& rot, const Wrench& tip_load) {
  ModelBuilder b;
  b.node("base", Vector3::Zero()).node("tip", rot * Vector3(length, 0, 0));
  b.beam("beam", "base", "tip", steel(), rod(), rot * Vector3::UnitZ());
  b.rigid_support("base").load("tip", rotate(rot, tip_load)).end_effector("tip");
  return b.build();
}

ManipulatorModel split_cantilever(double length, const Matrix3& rot) {
  ModelBuilder b;
  b.node("base", Vector3::Zero())
      .node("m1", rot * Vector3(length / 2, 0, 0))
      .node("m2", rot * Vector3(length / 2, 0, 0))
      .node("tip", rot * Vector3(length, 0, 0));
  b.beam("b1", "base", "m1", steel(), rod(), rot * Vector3::UnitZ());
  b.beam("b2", "m2", "tip", steel(), rod(), rot * Vector3::UnitZ());
  b.rigid_joint("weld", {"m1", "m2"});
  b.rigid_support("base").load("tip").end_effector("tip");
  return b.build();
}

ManipulatorModel spring_lever(double k, double r, const Matrix3& rot) {
  ModelBuilder b;
  b.node("base", Vector3::Zero())
      .node("a", rot * Vector3(0.5, 0, 0))
      .node("b", rot * Vector3(0.5, 0, 0))
      .node("tip", rot * Vector3(0.5 + r, 0, 0));
  b.rigid_link("arm1", "base", "a").rigid_link("arm2", "b", "tip");
  b.elastic_joint("spring", "a", "b", rows({twist_row(rot, Vector3::Zero(), Vector3::UnitZ())}),
                  scalar(k));
  b.rigid_support("base").load("tip").end_effector("tip");
  return b.build();
}

ManipulatorModel twin_legs(const Matrix3& rot) {
  ModelBuilder b;
  const Vector3 tip = rot * Vector3(1, 0, 0);
  b.node("base1", Vector3::Zero()).node("base2", Vector3::Zero());
  b.node("tip1", tip).node("tip2", tip);
  b.beam("leg1", "base1", "tip1", steel(), rod(), rot * Vector3::UnitZ());
  b.beam("leg2", "base2", "tip2", steel(), rod(), rot * Vector3::UnitZ());
  b.rigid_joint("platform", {"tip1", "tip2"});
  b.rigid_support("base1").rigid_support("base2").end_effector("tip1");
  return b.build();
}

ManipulatorModel bipod(const Matrix3& rot, const Wrench& ee_load) {
  ModelBuilder b;
  const Vector3 tip = rot * Vector3(1, 0, 0);
  b.node("base1", rot * Vector3(0, 0.5, 0)).node("base2", rot * Vector3(0, -0.5, 0.1));
  b.node("tip1", tip).node("tip2", tip);
  b.beam("leg1", "base1", "tip1", steel(), rod(), rot * Vector3::UnitZ());
  b.beam("leg2", "base2", "tip2", steel(), rod(0.015), rot * Vector3::UnitZ());
  b.rigid_joint("platform", {"tip1", "tip2"});
  b.rigid_support("base1").rigid_support("base2");
  b.load("tip1", rotate(rot, ee_load)).end_effector("tip1");
  return b.build();
}

ManipulatorModel tee(const Matrix3& rot) {
  ModelBuilder b;
  const Vector3 hub = rot * Vector3(0.6, 0, 0);
  b.node("base", Vector3::Zero()).node("h1", hub).node("h2", hub).node("h3", hub);
  b.node("tip", rot * Vector3(1.0, 0.2, 0)).node("side", rot * Vector3(0.6, 0, 0.4));
  b.beam("stem", "base", "h1", steel(), rod(), rot * Vector3::UnitZ());
  b.beam("arm", "h2", "tip", steel(), rod(0.015), rot * Vector3::UnitZ());
  b.beam("branch", "h3", "side", steel(), rod(0.01), rot * Vector3::UnitY());
  b.rigid_joint("hub", {"h1", "h2", "h3"});
  b.rigid_support("base").load("tip").load("side").end_effector("tip");
  return b.build();
}

ManipulatorModel jointed_beams(std::optional<double> k, const Matrix3& rot) {
  ModelBuilder b;
  b.node("base", Vector3::Zero())
      .node("m1", rot * Vector3(0.5, 0, 0))
      .node("m2", rot * Vector3(0.5, 0, 0))
      .node("tip", rot * Vector3(0.8, 0.4, 0));
  b.beam("b1", "base", "m1", steel(), rod(), rot * Vector3::UnitZ());
  b.beam("b2", "m2", "tip", steel(), rod(), rot * Vector3::UnitZ());
  if (k) {
    const Eigen::MatrixXd free = five_free(rot);
    b.elastic_joint("j", "m1", "m2", free, *k * Eigen::MatrixXd::Identity(5, 5));
  } else {
    b.rigid_joint("j", {"m1", "m2"});
  }
  b.rigid_support("base").load("tip").end_effector("tip");
  return b.build();
}

ManipulatorModel supported_frame(std::optional<double> k, const Matrix3& rot) {
  ModelBuilder b;
  b.node("base", Vector3::Zero())
      .node("c1", rot * Vector3(0, 0, 0.7))
      .node("c2", rot * Vector3(0, 0, 0.7))
      .node("tip", rot * Vector3(0.6, 0, 0.7));
  b.beam("post", "base", "c1", steel(), rod(0.03), rot * Vector3::UnitY());
  b.beam("boom", "c2", "tip", steel(), rod(), rot * Vector3::UnitZ());
  b.rigid_joint("corner", {"c1", "c2"});
  if (k) {
    const Eigen::MatrixXd free = five_free(rot);
    b.elastic_support("base", free, *k * Eigen::MatrixXd::Identity(5, 5));
  } else {
    b.rigid_support("base");
  }
  b.load("tip").end_effector("tip");
  return b.build();
}

ManipulatorModel preloaded_chain(double p1, double p2, const Matrix3& rot) {
  ModelBuilder b;
  b.node("base", Vector3::Zero())
      .node("a1", rot * Vector3(0.4, 0, 0))
      .node("a2", rot * Vector3(0.4, 0, 0))
      .node("b1", rot * Vector3(0.7, 0.3, 0))
      .node("b2", rot * Vector3(0.7, 0.3, 0))
      .node("tip", rot * Vector3(0.9, 0.3, 0.3));
  b.beam("l1", "base", "a1", steel(), rod(), rot * Vector3::UnitZ());
  b.beam("l2", "a2", "b1", steel(), rod(), rot * Vector3::UnitZ());
  b.beam("l3", "b2", "tip", steel(), rod(), rot * Vector3::UnitX());
  Eigen::VectorXd w1(1), w2(1);
  w1 << p1;
  w2 << p2;
  b.elastic_joint("j1", "a1", "a2", rows({twist_row(rot, Vector3::Zero(), Vector3::UnitZ())}),
                  scalar(2000.0), w1);
  b.elastic_joint("j2", "b1", "b2", rows({twist_row(rot, Vector3::Zero(), Vector3::UnitY())}),
                  scalar(3000.0), w2);
  b.rigid_support("base").load("tip").end_effector("tip");
  return b.build();
}

ManipulatorModel passive_revolute_chain(const Matrix3& rot) {
  ModelBuilder b;
  b.node("base", Vector3::Zero())
      .node("a", rot * Vector3(0.5, 0, 0))
      .node("b", rot * Vector3(0.5, 0, 0))
      .node("tip", rot * Vector3(1, 0, 0));
  b.beam("upper", "base", "a", steel(), rod(), rot * Vector3::UnitZ());
  b.beam("lower", "b", "tip", steel(), rod(), rot * Vector3::UnitZ());
  b.passive_joint("hinge", "a", "b", rows({twist_row(rot, Vector3::Zero(), Vector3::UnitZ())}));
  b.rigid_support("base").load("tip").end_effector("tip");
  return b.build();
}

ManipulatorModel swinging_appendage() {
  ModelBuilder b;
  b.node("base", Vector3::Zero())
      .node("h1", Vector3(0.5, 0, 0))
      .node("h2", Vector3(0.5, 0, 0))
      .node("h3", Vector3(0.5, 0, 0))
      .node("tip", Vector3(1, 0, 0))
      .node("p", Vector3(0.5, 0, -0.2))
      .node("q", Vector3(0.5, 0, -0.2))
      .node("bob", Vector3(0.5, 0, -0.5));
  b.beam("b1", "base", "h1", steel(), rod());
  b.beam("b2", "h2", "tip", steel(), rod());
  b.beam("hanger", "h3", "p", steel(), rod(), Vector3::UnitY());
  b.rigid_link("pendulum", "q", "bob");
  b.rigid_joint("hub", {"h1", "h2", "h3"});
  b.passive_joint("pivot", "p", "q", rows({twist_row(Matrix3::Identity(), Vector3::Zero(),
                                                      Vector3::UnitY())}));
  b.rigid_support("base").load("tip").load("bob").end_effector("tip");
  return b.build();
}

ManipulatorModel actuated_chain(const Matrix3& rot) {
  ModelBuilder b;
  b.node("base", Vector3::Zero())
      .node("a1", rot * Vector3(0.3, 0, 0))
      .node("a2", rot * Vector3(0.3, 0, 0))
      .node("b1", rot * Vector3(0.6, 0.2, 0))
      .node("b2", rot * Vector3(0.6, 0.2, 0))
      .node("tip", rot * Vector3(0.9, 0.2, 0.1));
  b.beam("l1", "base", "a1", steel(), rod(), rot * Vector3::UnitZ());
  b.beam("l2", "a2", "b1", steel(), rod(), rot * Vector3::UnitZ());
  b.beam("l3", "b2", "tip", steel(), rod(), rot * Vector3::UnitZ());
  b.locked_actuator("m1", "a1", "a2");
  b.drive_actuator("m2", "b1", "b2", rows({twist_row(rot, Vector3::Zero(), Vector3::UnitZ())}),
                   scalar(5000.0));
  b.rigid_support("base").load("tip").end_effector("tip");
  return b.build();
}

ManipulatorModel mixed_supports(const Matrix3& rot) {
  ModelBuilder b;
  const Vector3 hub = rot * Vector3(1, 0, 0);
  b.node("s1", rot * Vector3(0, 0.5, 0))
      .node("s2", rot * Vector3(0, -0.5, 0))
      .node("m1", rot * Vector3(0.5, -0.25, 0))
      .node("m2", rot * Vector3(0.5, -0.25, 0))
      .node("h1", hub)
      .node("h2", hub)
      .node("h3", hub)
      .node("tip", rot * Vector3(1.3, 0, 0.2));
  b.beam("leg1", "s1", "h1", steel(), rod(), rot * Vector3::UnitZ());
  b.beam("leg2a", "s2", "m1", steel(), rod(), rot * Vector3::UnitZ());
  b.beam("leg2b", "m2", "h2", steel(), rod(), rot * Vector3::UnitZ());
  b.beam("tool", "h3", "tip", steel(), rod(0.025), rot * Vector3::UnitY());
  b.elastic_joint("knee", "m1", "m2", rows({twist_row(rot, Vector3::Zero(), Vector3::UnitZ())}),
                  scalar(2000.0));
  b.rigid_joint("hub", {"h1", "h2", "h3"});
  b.rigid_support("s1");
  b.passive_support("s2", rows({twist_row(rot, Vector3::Zero(), Vector3::UnitX()),
                                twist_row(rot, Vector3::Zero(), Vector3::UnitY()),
                                twist_row(rot, Vector3::Zero(), Vector3::UnitZ())}));
  b.load("tip").end_effector("tip");
  return b.build();
}

std::vector<NamedFixture> regular_fixtures() {
  return {
      {"cantilever", [](const Matrix3& r) { return cantilever(1.0, r); }},
      {"split_cantilever", [](const Matrix3& r) { return split_cantilever(1.0, r); }},
      {"twin_legs", [](const Matrix3& r) { return twin_legs(r); }},
      {"bipod", [](const Matrix3& r) { return bipod(r); }},
      {"tee", [](const Matrix3& r) { return tee(r); }},
      {"jointed_rigid", [](const Matrix3& r) { return jointed_beams(std::nullopt, r); }},
      {"jointed_elastic", [](const Matrix3& r) { return jointed_beams(1e5, r); }},
      {"supported_elastic", [](const Matrix3& r) { return supported_frame(1e6, r); }},
      {"actuated_chain", [](const Matrix3& r) { return actuated_chain(r); }},
      {"mixed_supports", [](const Matrix3& r) { return mixed_supports(r); }},
      {"elastic_chain", [](const Matrix3& r) { return preloaded_chain(0.0, 0.0, r); }},
      {"preloaded_chain", [](const Matrix3& r) { return preloaded_chain(15.0, -4.0, r); }, true},
  };
}

Matrix3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

Matrix6 adjoint(const Matrix3& rot) {
  Matrix6 a = Matrix6::Zero();
  a.topLeftCorner<3, 3>() = rot;
  a.bottomRightCorner<3, 3>() = rot;
  return a;
}

Eigen::VectorXd stack(const EquationRows& eq, const std::vector<Vector6>& deflections,
                      const std::vector<Vector6>& wrenches) {
  Eigen::VectorXd x(6 * static_cast<Eigen::Index>(eq.variables.size()));
  for (std::size_t k = 0; k < eq.variables.size(); ++k) {
    const auto& v = eq.variables[k];
    x.segment<6>(6 * static_cast<Eigen::Index>(k)) =
        v.quantity == Quantity::deflection ? deflections.at(v.slot) : wrenches.at(v.slot);
  }
  return x;
}

double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / b.norm();
}

RandomChain random_serial_chain(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> beams_dist(2, 5);
  std::uniform_real_distribution<double> len(0.2, 0.8);
  std::uniform_real_distribution<double> dia(0.01, 0.03);
  std::uniform_real_distribution<double> aspect(0.6, 1.6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> n(0.0, 1.0);

  auto random_unit = [&]() {
    Vector3 v(n(rng), n(rng), n(rng));
    return Vector3(v.normalized());
  };

  RandomChain out;
  ModelBuilder b;
  const int count = beams_dist(rng);
  Vector3 start = Vector3::Zero();
  b.node("n0", start);
  b.rigid_support("n0");
  std::string prev = "n0";
  for (int k = 0; k < count; ++k) {
    const Vector3 axis = random_unit();
    const Vector3 end = start + len(rng) * axis;
    Vector3 hint = random_unit();
    while (hint.cross(axis).norm() < 0.2) hint = random_unit();

    const double d = dia(rng);
    CrossSection sec = rod(d);
    sec.Iy *= aspect(rng);
    sec.Iz *= aspect(rng);
    sec.J = 0.8 * (sec.Iy + sec.Iz);

    const std::string tail = "t" + std::to_string(k);
    b.node(tail, end);
    b.beam("beam" + std::to_string(k), prev, tail, steel(), sec, hint);

    // Local frame built independently of the library: x along the axis,
    // y = hint x x normalized, z = x cross y.
    Eigen::Matrix3d local;
    const Vector3 x = axis;
    const Vector3 y = hint.cross(x).normalized();
    local.col(0) = x;
    local.col(1) = y;
    local.col(2) = x.cross(y);
    out.oracle.elements.push_back(
        oracle::beam_element(start, end, local, kE, kG, sec.A, sec.Iy, sec.Iz, sec.J));

    if (k + 1 < count) {
      const std::string head = "h" + std::to_string(k + 1);
      b.node(head, end);
      const Vector3 dir = random_unit();
      Vector6 twist = Vector6::Zero();
      double stiffness = 0.0;
      if (unit(rng) < 0.6) {
        twist.tail<3>() = dir;
        stiffness = 1e3 * std::pow(10.0, 2.0 * unit(rng));  // N m/rad
      } else {
        twist.head<3>() = dir;
        stiffness = 1e5 * std::pow(10.0, 2.0 * unit(rng));  // N/m
      }
      b.elastic_joint("joint" + std::to_string(k + 1), tail, head, twist.transpose(),
                      scalar(stiffness));
      out.oracle.elements.push_back(oracle::spring_element(end, twist, stiffness));
      prev = head;
    } else {
      b.load(tail).end_effector(tail);
      out.oracle.end_effector = end;
    }
    start = end;
  }
  out.model = b.build();
  return out;
}

Wrench resultant(const ManipulatorModel& model,
                 const std::vector<std::pair<std::string, Wrench>>& reactions,
                 const Wrench& ee_wrench, const std::string& ee_node) {
  Wrench total;
  auto add = [&](const Vector3& p, const Wrench& w) {
    total.f += w.f;
    total.m += w.m + p.cross(w.f);
  };
  for (const auto& [node, w] : reactions) add(model.node(node).position, w);
  add(model.node(ee_node).position, ee_wrench);
  for (const auto& load : model.loads) {
    if (load.node != ee_node) add(model.node(load.node).position, load.wrench);
  }
  return total;
}

}  // namespace msa::fixtures

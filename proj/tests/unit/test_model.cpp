#include <algorithm>

#include "doctest.h"
#include "fixtures.hpp"
#include "msa/errors.hpp"
#include "msa/model.hpp"

using namespace msa;

namespace {

bool has_error(const ValidationReport& r, const std::string& code) {
  return std::any_of(r.errors.begin(), r.errors.end(),
                     [&](const ValidationIssue& i) { return i.code == code; });
}

bool has_warning(const ValidationReport& r, const std::string& code) {
  return std::any_of(r.warnings.begin(), r.warnings.end(),
                     [&](const ValidationIssue& i) { return i.code == code; });
}

ModelBuilder bare_cantilever() {
  ModelBuilder b;
  b.node("base", Vector3::Zero())
      .node("tip", Vector3(1, 0, 0))
      .beam("beam", "base", "tip", fixtures::steel(), fixtures::rod())
      .rigid_support("base")
      .end_effector("tip");
  return b;
}

}  // namespace

TEST_CASE("equation counts balance unknowns") {
  const ValidationReport one = validate(fixtures::cantilever());
  CHECK(one.ok());
  CHECK(one.equation_count == 24);
  CHECK(one.unknown_count == 24);

  const ValidationReport two = validate(fixtures::split_cantilever());
  CHECK(two.ok());
  CHECK(two.equation_count == 48);
  CHECK(two.unknown_count == 48);

  for (const auto& f : fixtures::regular_fixtures()) {
    CAPTURE(f.name);
    const ValidationReport r = validate(f.build(Matrix3::Identity()));
    CHECK(r.ok());
    CHECK(r.equation_count == r.unknown_count);
  }
}

TEST_CASE("dangling node is reported") {
  const ValidationReport r = validate(bare_cantilever().build());
  CHECK_FALSE(r.ok());
  CHECK(has_error(r, "node_unbound"));
  CHECK(has_error(r, "equation_count_mismatch"));
  CHECK(r.equation_count == 18);
}

TEST_CASE("structural rule violations") {
  SUBCASE("support and load on one node") {
    auto b = bare_cantilever();
    b.load("tip").load("base", Wrench{Vector3(1, 0, 0), Vector3::Zero()});
    CHECK(has_error(validate(b.build()), "load_at_support"));
  }
  SUBCASE("supported end effector") {
    auto b = bare_cantilever();
    b.load("tip").end_effector("base");
    CHECK(has_error(validate(b.build()), "end_effector_supported"));
  }
  SUBCASE("duplicate load") {
    auto b = bare_cantilever();
    b.load("tip").load("tip");
    CHECK(has_error(validate(b.build()), "duplicate_load"));
  }
  SUBCASE("shared node") {
    ModelBuilder b;
    b.node("a", Vector3::Zero())
        .node("b", Vector3(1, 0, 0))
        .node("c", Vector3(2, 0, 0))
        .rigid_link("l1", "a", "b")
        .rigid_link("l2", "b", "c")
        .rigid_support("a")
        .load("c")
        .end_effector("c");
    const auto r = validate(b.build());
    CHECK(has_error(r, "node_in_multiple_links"));
  }
  SUBCASE("node without link") {
    auto b = bare_cantilever();
    b.load("tip").node("loose", Vector3(3, 0, 0)).load("loose");
    CHECK(has_error(validate(b.build()), "node_not_in_link"));
  }
  SUBCASE("load at passive joint") {
    ManipulatorModel m = fixtures::passive_revolute_chain();
    const auto& j = m.joints.front();
    m.loads.push_back({j.nodes.front(), Wrench{Vector3(0, 1, 0), Vector3::Zero()}});
    CHECK(has_error(validate(m), "load_at_passive_joint"));
  }
  SUBCASE("end effector at passive joint") {
    ManipulatorModel m = fixtures::passive_revolute_chain();
    m.end_effector = m.joints.front().nodes.front();
    CHECK(has_error(validate(m), "end_effector_placement"));
  }
  SUBCASE("loaded end effector warns") {
    const auto r = validate(fixtures::cantilever(1.0, Matrix3::Identity(),
                                                 Wrench{Vector3(0, 1, 0), Vector3::Zero()}));
    CHECK(r.ok());
    CHECK(has_warning(r, "end_effector_load_ignored"));
  }
  SUBCASE("joint nodes apart") {
    ManipulatorModel m = fixtures::split_cantilever();
    for (auto& n : m.nodes) {
      if (n.id == m.joints.front().nodes.back()) n.position.y() += 1e-3;
    }
    CHECK(has_error(validate(m), "joint_not_coincident"));
  }
}

TEST_CASE("builder rejects bad references and parameters") {
  CHECK_THROWS_AS(ModelBuilder().node("a", Vector3::Zero()).node("a", Vector3(1, 0, 0)).build(),
                  ModelError);
  {
    auto b = bare_cantilever();
    b.load("nowhere");
    CHECK_THROWS_AS(b.build(), ModelError);
  }
  {
    ModelBuilder b;
    b.node("base", Vector3::Zero())
        .node("tip", Vector3(1, 0, 0))
        .beam("beam", "base", "tip", fixtures::steel(), fixtures::rod())
        .rigid_support("base")
        .load("tip");
    CHECK_THROWS_AS(b.build(), ModelError);  // no end effector
  }
  {
    auto b = bare_cantilever();
    b.load("tip").beam("beam", "base", "tip", fixtures::steel(), fixtures::rod());
    CHECK_THROWS_AS(b.build(), ModelError);  // duplicate link id
  }
  {
    Eigen::MatrixXd skewed(1, 6);
    skewed << 0, 0, 0, 0, 1, 1;  // not unit length
    ModelBuilder b;
    b.node("base", Vector3::Zero())
        .node("a", Vector3(0.5, 0, 0))
        .node("b", Vector3(0.5, 0, 0))
        .node("tip", Vector3(1, 0, 0))
        .rigid_link("l1", "base", "a")
        .rigid_link("l2", "b", "tip")
        .elastic_joint("j", "a", "b", skewed, Eigen::MatrixXd::Constant(1, 1, 10.0))
        .rigid_support("base")
        .load("tip")
        .end_effector("tip");
    CHECK_THROWS_AS(b.build(), ModelError);
  }
}

TEST_CASE("joint equation counts") {
  const ManipulatorModel m = fixtures::tee();
  for (const auto& j : m.joints) {
    CAPTURE(j.id);
    CHECK(joint_equation_count(j) == 6 * j.nodes.size());
  }
  for (const auto& j : fixtures::actuated_chain().joints) CHECK(joint_equation_count(j) == 12);
}

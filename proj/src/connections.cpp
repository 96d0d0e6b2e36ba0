#include "msa/connections.hpp"

#include <algorithm>

#include "msa/errors.hpp"

namespace msa {

namespace {

std::vector<VariableRef> slots(std::size_t members, Quantity q) {
  std::vector<VariableRef> vars;
  for (std::size_t k = 0; k < members; ++k) vars.push_back({k, q});
  return vars;
}

std::vector<VariableRef> two_node_variables() {
  return {{0, Quantity::deflection},
          {1, Quantity::deflection},
          {0, Quantity::wrench},
          {1, Quantity::wrench}};
}

void require_two(std::span<const Vector3> positions, const char* what) {
  if (positions.size() != 2) {
    throw ModelError(std::string(what) + " connects exactly two nodes");
  }
}

Eigen::VectorXd preload_or_zero(const Eigen::VectorXd& preload, Eigen::Index e) {
  return preload.size() == 0 ? Eigen::VectorXd::Zero(e) : preload;
}

}  // namespace

bool JointSpec::carries_node_balance() const {
  return kind == JointKind::rigid || kind == JointKind::elastic || kind == JointKind::actuated;
}

bool JointSpec::is_rigid() const {
  return kind == JointKind::rigid ||
         (kind == JointKind::actuated && mode == ActuationMode::locked);
}

SelectionBasis complement_basis(const Eigen::MatrixXd& free_rows) {
  if (free_rows.cols() != 6) throw ModelError("free twists must have 6 components");
  const Eigen::Index p = free_rows.rows();
  if (p > 6) throw ModelError("at most 6 free twists can be independent");
  if (!free_rows.allFinite()) throw ModelError("free twists have non-finite components");
  if (p > 0) {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(free_rows);
    if (svd.singularValues().minCoeff() <= 1e-9) {
      throw ModelError("free twists are linearly dependent");
    }
  }

  // Gram-Schmidt applied twice keeps rows orthonormal to rounding.
  auto orthogonalize = [](Eigen::VectorXd v, const std::vector<Eigen::VectorXd>& against) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : against) v -= q.dot(v) * q;
    }
    return v;
  };

  std::vector<Eigen::VectorXd> basis;
  for (Eigen::Index k = 0; k < p; ++k) {
    Eigen::VectorXd v = orthogonalize(free_rows.row(k).transpose(), basis);
    basis.push_back(v / v.norm());
  }

  std::vector<bool> used(6, false);
  for (Eigen::Index k = p; k < 6; ++k) {
    int best = -1;
    double best_norm = -1.0;
    Eigen::VectorXd best_v;
    for (int c = 0; c < 6; ++c) {
      if (used[c]) continue;
      Eigen::VectorXd v = orthogonalize(Eigen::VectorXd::Unit(6, c), basis);
      // Candidates within rounding of the best keep the lower index.
      if (v.norm() > best_norm + 1e-12) {
        best = c;
        best_norm = v.norm();
        best_v = v;
      }
    }
    used[best] = true;
    basis.push_back(best_v / best_norm);
  }

  SelectionBasis out;
  out.free.resize(p, 6);
  out.constrained.resize(6 - p, 6);
  for (Eigen::Index k = 0; k < 6; ++k) {
    if (k < p) {
      out.free.row(k) = basis[k].transpose();
    } else {
      out.constrained.row(k - p) = basis[k].transpose();
    }
  }
  return out;
}

void require_coincident(std::span<const Vector3> positions, const std::string& entity) {
  for (const auto& p : positions) {
    const double gap = (p - positions.front()).norm();
    if (gap > kCoincidenceTolerance) {
      throw ModelError("joint nodes are not coincident (gap " + std::to_string(gap) + " m)",
                       entity);
    }
  }
}

void require_spring(const Eigen::MatrixXd& ke, const Eigen::VectorXd& preload, Eigen::Index e,
                    const std::string& entity) {
  if (ke.rows() != e || ke.cols() != e) {
    throw ModelError("spring stiffness must be " + std::to_string(e) + "x" + std::to_string(e) +
                         " to match the free directions",
                     entity);
  }
  if (!ke.allFinite() || relative_asymmetry(ke) > 1e-12) {
    throw ModelError("spring stiffness must be symmetric", entity);
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(ke);
  if (llt.info() != Eigen::Success) {
    throw ModelError("spring stiffness must be positive definite", entity);
  }
  if (preload.size() != 0 && preload.size() != e) {
    throw ModelError("preload must have " + std::to_string(e) + " components", entity);
  }
}

EquationRows rigid_joint_rows(std::span<const Vector3> positions) {
  require_two(positions, "rigid joint");
  require_coincident(positions);
  EquationRows eq(two_node_variables(), 12);
  eq.block(0, 6, 0) = Matrix6::Identity();
  eq.block(0, 6, 1) = -Matrix6::Identity();
  eq.block(6, 6, 2) = Matrix6::Identity();
  eq.block(6, 6, 3) = Matrix6::Identity();
  eq.add_segment("compatibility", 0, 6);
  eq.add_segment("equilibrium", 6, 6);
  eq.balance_row = 6;
  return eq;
}

EquationRows multi_rigid_joint_rows(std::span<const Vector3> positions) {
  const std::size_t m = positions.size();
  if (m == 2) return rigid_joint_rows(positions);
  if (m < 2) throw ModelError("rigid joint needs at least two nodes");
  require_coincident(positions);

  auto vars = slots(m, Quantity::deflection);
  const auto wrenches = slots(m, Quantity::wrench);
  vars.insert(vars.end(), wrenches.begin(), wrenches.end());

  const auto rows = static_cast<Eigen::Index>(6 * m);
  EquationRows eq(std::move(vars), rows);
  for (std::size_t k = 1; k < m; ++k) {
    const auto r = static_cast<Eigen::Index>(6 * (k - 1));
    eq.block(r, 6, 0) = Matrix6::Identity();
    eq.block(r, 6, k) = -Matrix6::Identity();
  }
  const Eigen::Index balance = rows - 6;
  for (std::size_t k = 0; k < m; ++k) {
    eq.block(balance, 6, m + k) = Matrix6::Identity();
  }
  eq.add_segment("compatibility", 0, balance);
  eq.add_segment("equilibrium", balance, 6);
  eq.balance_row = balance;
  return eq;
}

EquationRows passive_joint_rows(std::span<const Vector3> positions, const SelectionBasis& basis) {
  require_two(positions, "passive joint");
  require_coincident(positions);
  const Eigen::Index p = basis.free_count();
  const Eigen::Index r = basis.constrained_count();
  if (p == 0) throw ModelError("passive joint without free directions; use a rigid joint");
  if (p == 6) throw ModelError("passive joint with six free directions disconnects the links");

  EquationRows eq(two_node_variables(), 12);
  eq.block(0, r, 0) = basis.constrained;
  eq.block(0, r, 1) = -basis.constrained;
  eq.block(r, r, 2) = basis.constrained;
  eq.block(r, r, 3) = basis.constrained;
  eq.block(2 * r, p, 2) = basis.free;
  eq.block(2 * r + p, p, 3) = basis.free;
  eq.add_segment("compatibility", 0, r);
  eq.add_segment("equilibrium", r, r);
  eq.add_segment("free wrench", 2 * r, 2 * p);
  return eq;
}

EquationRows elastic_joint_rows(std::span<const Vector3> positions, const SelectionBasis& basis,
                                const Eigen::MatrixXd& ke, const Eigen::VectorXd& preload) {
  require_two(positions, "elastic joint");
  require_coincident(positions);
  const Eigen::Index e = basis.free_count();
  const Eigen::Index r = basis.constrained_count();
  if (e == 0 || e == 6) throw ModelError("elastic joint needs between 1 and 5 free directions");
  require_spring(ke, preload, e);

  EquationRows eq(two_node_variables(), 12);
  eq.block(0, r, 0) = basis.constrained;
  eq.block(0, r, 1) = -basis.constrained;
  eq.block(r, 6, 2) = Matrix6::Identity();
  eq.block(r, 6, 3) = Matrix6::Identity();
  const Eigen::MatrixXd spring = ke * basis.free;
  eq.block(r + 6, e, 0) = spring;
  eq.block(r + 6, e, 1) = -spring;
  eq.block(r + 6, e, 2) = basis.free;
  eq.rhs.segment(r + 6, e) = preload_or_zero(preload, e);
  eq.add_segment("compatibility", 0, r);
  eq.add_segment("equilibrium", r, 6);
  eq.add_segment("spring", r + 6, e);
  eq.balance_row = r;
  return eq;
}

EquationRows actuated_joint_rows(std::span<const Vector3> positions, ActuationMode mode,
                                 const SelectionBasis& basis, const Eigen::MatrixXd& ke,
                                 const Eigen::VectorXd& preload) {
  if (mode == ActuationMode::locked) return rigid_joint_rows(positions);
  return elastic_joint_rows(positions, basis, ke, preload);
}

EquationRows joint_rows(const JointSpec& joint, std::span<const Vector3> positions) {
  try {
    switch (joint.kind) {
      case JointKind::rigid:
        return multi_rigid_joint_rows(positions);
      case JointKind::passive:
        return passive_joint_rows(positions, joint.basis);
      case JointKind::elastic:
        return elastic_joint_rows(positions, joint.basis, joint.stiffness, joint.preload);
      case JointKind::actuated:
        return actuated_joint_rows(positions, joint.mode, joint.basis, joint.stiffness,
                                   joint.preload);
    }
  } catch (const ModelError& e) {
    throw ModelError("joint '" + joint.id + "': " + e.what(), joint.id);
  }
  throw ModelError("joint '" + joint.id + "': unknown kind", joint.id);
}

EquationRows rigid_support_rows() {
  EquationRows eq({{0, Quantity::deflection}}, 6);
  eq.coefficients.setIdentity();
  eq.add_segment("fixed", 0, 6);
  return eq;
}

EquationRows passive_support_rows(const SelectionBasis& basis) {
  const Eigen::Index p = basis.free_count();
  const Eigen::Index r = basis.constrained_count();
  if (p == 0 || p == 6) throw ModelError("passive support needs between 1 and 5 free directions");
  EquationRows eq({{0, Quantity::deflection}, {0, Quantity::wrench}}, 6);
  eq.block(0, r, 0) = basis.constrained;
  eq.block(r, p, 1) = basis.free;
  eq.add_segment("fixed", 0, r);
  eq.add_segment("free wrench", r, p);
  return eq;
}

EquationRows elastic_support_rows(const SelectionBasis& basis, const Eigen::MatrixXd& ke,
                                  const Eigen::VectorXd& preload) {
  const Eigen::Index e = basis.free_count();
  const Eigen::Index r = basis.constrained_count();
  if (e == 0 || e == 6) throw ModelError("elastic support needs between 1 and 5 free directions");
  require_spring(ke, preload, e);
  EquationRows eq({{0, Quantity::deflection}, {0, Quantity::wrench}}, 6);
  eq.block(0, r, 0) = basis.constrained;
  eq.block(r, e, 0) = ke * basis.free;
  eq.block(r, e, 1) = basis.free;
  eq.rhs.segment(r, e) = preload_or_zero(preload, e);
  eq.add_segment("fixed", 0, r);
  eq.add_segment("spring", r, e);
  return eq;
}

EquationRows support_rows(const SupportSpec& support) {
  const std::string entity = "support@" + support.node;
  try {
    switch (support.kind) {
      case SupportKind::rigid:
        return rigid_support_rows();
      case SupportKind::passive:
        return passive_support_rows(support.basis);
      case SupportKind::elastic:
        return elastic_support_rows(support.basis, support.stiffness, support.preload);
    }
  } catch (const ModelError& e) {
    throw ModelError(entity + ": " + e.what(), entity);
  }
  throw ModelError(entity + ": unknown kind", entity);
}

EquationRows external_load_rows(std::size_t members, const Wrench& applied) {
  if (members == 0) throw ModelError("a loaded node needs at least one member end");
  EquationRows eq(slots(members, Quantity::wrench), 6);
  for (std::size_t k = 0; k < members; ++k) eq.block(0, 6, k) = Matrix6::Identity();
  eq.rhs = applied.vector();
  eq.add_segment("load", 0, 6);
  eq.balance_row = 0;
  return eq;
}

}  // namespace msa

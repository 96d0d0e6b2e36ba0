#include "msa/model.hpp"

#include <map>
#include <set>

#include "msa/errors.hpp"

namespace msa {

const std::string& link_id(const Link& link) {
  return std::visit([](const auto& l) -> const std::string& { return l.id; }, link);
}

const std::string& link_node_i(const Link& link) {
  return std::visit([](const auto& l) -> const std::string& { return l.node_i; }, link);
}

const std::string& link_node_j(const Link& link) {
  return std::visit([](const auto& l) -> const std::string& { return l.node_j; }, link);
}

std::optional<std::size_t> ManipulatorModel::node_index(const std::string& id) const {
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k].id == id) return k;
  }
  return std::nullopt;
}

const Node& ManipulatorModel::node(const std::string& id) const {
  const auto k = node_index(id);
  if (!k) throw ModelError("unknown node '" + id + "'", id);
  return nodes[*k];
}

std::size_t joint_equation_count(const JointSpec& joint) {
  if (joint.kind == JointKind::rigid) return 6 * joint.nodes.size();
  return 12;
}

namespace {

const char* kind_name(JointKind kind) {
  switch (kind) {
    case JointKind::rigid: return "rigid";
    case JointKind::passive: return "passive";
    case JointKind::elastic: return "elastic";
    case JointKind::actuated: return "actuated";
  }
  return "?";
}

}  // namespace

ValidationReport validate(const ManipulatorModel& model) {
  ValidationReport report;
  auto error = [&report](std::string code, std::string message, std::string entity) {
    report.errors.push_back({std::move(code), std::move(message), std::move(entity)});
  };
  auto warn = [&report](std::string code, std::string message, std::string entity) {
    report.warnings.push_back({std::move(code), std::move(message), std::move(entity)});
  };

  const std::size_t n = model.nodes.size();
  report.unknown_count = 12 * n;

  std::map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& node = model.nodes[k];
    if (!index.emplace(node.id, k).second) {
      error("duplicate_id", "node id '" + node.id + "' is declared more than once", node.id);
    }
    if (!node.position.allFinite()) {
      error("invalid_position", "node '" + node.id + "' has a non-finite position", node.id);
    }
  }
  auto known = [&](const std::string& id, const std::string& by) {
    if (index.count(id)) return true;
    error("unknown_node", "unknown node '" + id + "' referenced by " + by, id);
    return false;
  };

  // Link ends.
  std::vector<int> link_ends(n, 0);
  std::set<std::string> entity_ids;
  for (const auto& link : model.links) {
    const auto& id = link_id(link);
    if (!entity_ids.insert(id).second) {
      error("duplicate_id", "id '" + id + "' is declared more than once", id);
    }
    const auto& ni = link_node_i(link);
    const auto& nj = link_node_j(link);
    if (ni == nj) error("degenerate_link", "link '" + id + "' connects a node to itself", id);
    if (known(ni, "link '" + id + "'")) ++link_ends[index[ni]];
    if (known(nj, "link '" + id + "'") && ni != nj) ++link_ends[index[nj]];
    report.equation_count += 12;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const auto& id = model.nodes[k].id;
    if (link_ends[k] == 0) {
      error("node_not_in_link", "node '" + id + "' is not the end of any link", id);
    } else if (link_ends[k] > 1) {
      error("node_in_multiple_links",
            "node '" + id + "' is shared by several links; connect separate nodes with a joint",
            id);
    }
  }

  // Bindings: joint membership, supports, free-node loads.
  std::vector<int> bindings(n, 0);
  std::vector<const JointSpec*> joint_of(n, nullptr);
  std::vector<bool> supported(n, false);

  for (const auto& joint : model.joints) {
    if (!entity_ids.insert(joint.id).second) {
      error("duplicate_id", "id '" + joint.id + "' is declared more than once", joint.id);
    }
    const std::size_t m = joint.nodes.size();
    const bool count_ok = joint.kind == JointKind::rigid ? m >= 2 : m == 2;
    if (!count_ok) {
      error("joint_node_count",
            std::string(kind_name(joint.kind)) + " joint '" + joint.id + "' has " +
                std::to_string(m) + " nodes",
            joint.id);
    }
    std::set<std::string> distinct(joint.nodes.begin(), joint.nodes.end());
    if (distinct.size() != m) {
      error("joint_repeated_node", "joint '" + joint.id + "' lists a node twice", joint.id);
    }
    bool all_known = true;
    std::vector<Vector3> positions;
    for (const auto& id : joint.nodes) {
      if (!known(id, "joint '" + joint.id + "'")) {
        all_known = false;
        continue;
      }
      const std::size_t k = index[id];
      ++bindings[k];
      joint_of[k] = &joint;
      positions.push_back(model.nodes[k].position);
    }
    report.equation_count += joint_equation_count(joint);
    if (all_known && count_ok && distinct.size() == m) {
      bool coincident = true;
      for (const auto& p : positions) {
        if ((p - positions.front()).norm() > kCoincidenceTolerance) coincident = false;
      }
      if (!coincident) {
        error("joint_not_coincident",
              "nodes of joint '" + joint.id + "' are not spatially coincident", joint.id);
      } else {
        try {
          (void)joint_rows(joint, positions);
        } catch (const ModelError& e) {
          error("invalid_joint", e.what(), joint.id);
        }
      }
    }
  }

  for (const auto& support : model.supports) {
    const std::string entity = "support@" + support.node;
    if (known(support.node, entity)) {
      const std::size_t k = index[support.node];
      ++bindings[k];
      supported[k] = true;
    }
    report.equation_count += 6;
    try {
      (void)support_rows(support);
    } catch (const ModelError& e) {
      error("invalid_support", e.what(), entity);
    }
  }

  std::vector<int> loads_at(n, 0);
  std::vector<Vector6> load_value(n, Vector6::Zero());
  for (const auto& load : model.loads) {
    if (!known(load.node, "a load")) continue;
    const std::size_t k = index[load.node];
    if (!load.wrench.vector().allFinite()) {
      error("invalid_load", "load at node '" + load.node + "' is not finite", load.node);
    }
    if (++loads_at[k] > 1) {
      error("duplicate_load", "node '" + load.node + "' carries more than one load declaration",
            load.node);
      continue;
    }
    load_value[k] = load.wrench.vector();
    if (supported[k]) {
      error("load_at_support", "node '" + load.node + "' carries both a load and a support",
            load.node);
    } else if (joint_of[k] != nullptr) {
      if (!joint_of[k]->carries_node_balance()) {
        error("load_at_passive_joint",
              "loads cannot be applied at passive joint '" + joint_of[k]->id + "'", load.node);
      }
    } else {
      ++bindings[k];
      report.equation_count += 6;
    }
  }

  for (std::size_t k = 0; k < n; ++k) {
    const auto& id = model.nodes[k].id;
    if (bindings[k] == 0) {
      error("node_unbound", "node '" + id + "' is not bound to a joint, support or load", id);
    } else if (bindings[k] > 1) {
      error("node_multiply_bound",
            "node '" + id + "' is bound more than once (joints, supports, loads)", id);
    }
  }

  // End effector.
  const auto& ee = model.end_effector;
  if (ee.empty()) {
    error("missing_end_effector", "no end effector node is designated", "");
  } else if (known(ee, "end_effector")) {
    const std::size_t k = index[ee];
    if (supported[k]) {
      error("end_effector_supported", "end effector '" + ee + "' carries a support", ee);
    } else if (joint_of[k] != nullptr && !joint_of[k]->is_rigid()) {
      error("end_effector_placement",
            "end effector '" + ee + "' must be a free node or a node of a rigid joint", ee);
    }
    bool loaded = load_value[k].cwiseAbs().maxCoeff() > 0.0;
    if (joint_of[k] != nullptr) {
      for (const auto& member : joint_of[k]->nodes) {
        const auto it = index.find(member);
        if (it != index.end()) loaded = loaded || load_value[it->second].cwiseAbs().maxCoeff() > 0;
      }
    }
    if (loaded) {
      warn("end_effector_load_ignored",
           "loads declared at the end effector are replaced by the solve input", ee);
    }
  }

  if (report.equation_count != report.unknown_count) {
    error("equation_count_mismatch",
          "model yields " + std::to_string(report.equation_count) + " equations for " +
              std::to_string(report.unknown_count) + " unknowns",
          "");
  }
  return report;
}

// ---------------------------------------------------------------------------
// ModelBuilder

ModelBuilder& ModelBuilder::node(std::string id, const Vector3& position) {
  nodes_.push_back({std::move(id), position});
  return *this;
}

ModelBuilder& ModelBuilder::beam(std::string id, std::string node_i, std::string node_j,
                                 const Material& mat, const CrossSection& sec,
                                 std::optional<Vector3> orientation_hint) {
  PendingLink link{std::move(id), LinkType::beam, std::move(node_i), std::move(node_j),
                   mat, sec, orientation_hint, Matrix12::Zero()};
  links_.push_back(std::move(link));
  return *this;
}

ModelBuilder& ModelBuilder::rigid_link(std::string id, std::string node_i, std::string node_j) {
  links_.push_back({std::move(id), LinkType::rigid, std::move(node_i), std::move(node_j),
                    {}, {}, std::nullopt, Matrix12::Zero()});
  return *this;
}

ModelBuilder& ModelBuilder::custom_link(std::string id, std::string node_i, std::string node_j,
                                        const Matrix12& k_global) {
  links_.push_back({std::move(id), LinkType::custom, std::move(node_i), std::move(node_j),
                    {}, {}, std::nullopt, k_global});
  return *this;
}

ModelBuilder& ModelBuilder::rigid_joint(std::string id, std::vector<std::string> nodes) {
  PendingJoint j;
  j.spec.id = std::move(id);
  j.spec.kind = JointKind::rigid;
  j.spec.nodes = std::move(nodes);
  joints_.push_back(std::move(j));
  return *this;
}

ModelBuilder& ModelBuilder::passive_joint(std::string id, std::string node_i, std::string node_j,
                                          const Eigen::MatrixXd& free_twists) {
  PendingJoint j;
  j.spec.id = std::move(id);
  j.spec.kind = JointKind::passive;
  j.spec.nodes = {std::move(node_i), std::move(node_j)};
  j.connection.free_twists = free_twists;
  joints_.push_back(std::move(j));
  return *this;
}

ModelBuilder& ModelBuilder::elastic_joint(std::string id, std::string node_i, std::string node_j,
                                          const Eigen::MatrixXd& free_twists,
                                          const Eigen::MatrixXd& stiffness,
                                          const Eigen::VectorXd& preload) {
  PendingJoint j;
  j.spec.id = std::move(id);
  j.spec.kind = JointKind::elastic;
  j.spec.nodes = {std::move(node_i), std::move(node_j)};
  j.connection = {free_twists, stiffness, preload};
  joints_.push_back(std::move(j));
  return *this;
}

ModelBuilder& ModelBuilder::locked_actuator(std::string id, std::string node_i,
                                            std::string node_j) {
  PendingJoint j;
  j.spec.id = std::move(id);
  j.spec.kind = JointKind::actuated;
  j.spec.mode = ActuationMode::locked;
  j.spec.nodes = {std::move(node_i), std::move(node_j)};
  joints_.push_back(std::move(j));
  return *this;
}

ModelBuilder& ModelBuilder::drive_actuator(std::string id, std::string node_i, std::string node_j,
                                           const Eigen::MatrixXd& free_twists,
                                           const Eigen::MatrixXd& stiffness,
                                           const Eigen::VectorXd& preload) {
  PendingJoint j;
  j.spec.id = std::move(id);
  j.spec.kind = JointKind::actuated;
  j.spec.mode = ActuationMode::drive_stiffness;
  j.spec.nodes = {std::move(node_i), std::move(node_j)};
  j.connection = {free_twists, stiffness, preload};
  joints_.push_back(std::move(j));
  return *this;
}

ModelBuilder& ModelBuilder::rigid_support(std::string node) {
  PendingSupport s;
  s.spec.kind = SupportKind::rigid;
  s.spec.node = std::move(node);
  supports_.push_back(std::move(s));
  return *this;
}

ModelBuilder& ModelBuilder::passive_support(std::string node, const Eigen::MatrixXd& free_twists) {
  PendingSupport s;
  s.spec.kind = SupportKind::passive;
  s.spec.node = std::move(node);
  s.connection.free_twists = free_twists;
  supports_.push_back(std::move(s));
  return *this;
}

ModelBuilder& ModelBuilder::elastic_support(std::string node, const Eigen::MatrixXd& free_twists,
                                            const Eigen::MatrixXd& stiffness,
                                            const Eigen::VectorXd& preload) {
  PendingSupport s;
  s.spec.kind = SupportKind::elastic;
  s.spec.node = std::move(node);
  s.connection = {free_twists, stiffness, preload};
  supports_.push_back(std::move(s));
  return *this;
}

ModelBuilder& ModelBuilder::load(std::string node, const Wrench& wrench) {
  loads_.push_back({std::move(node), wrench});
  return *this;
}

ModelBuilder& ModelBuilder::end_effector(std::string node) {
  end_effector_ = std::move(node);
  return *this;
}

namespace {

// Elastic directions carry a stiffness matrix in their own coordinates, so
// they are taken as given and must already be orthonormal.
SelectionBasis spring_basis(const Eigen::MatrixXd& free_twists, const std::string& entity) {
  if (free_twists.cols() != 6) {
    throw ModelError(entity + ": free twists must have 6 components", entity);
  }
  const Eigen::MatrixXd gram = free_twists * free_twists.transpose();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(free_twists.rows(), free_twists.rows());
  if (free_twists.rows() > 0 && (gram - eye).cwiseAbs().maxCoeff() > 1e-9) {
    throw ModelError(entity + ": elastic free twists must be orthonormal", entity);
  }
  try {
    return complement_basis(free_twists);
  } catch (const ModelError& e) {
    throw ModelError(entity + ": " + e.what(), entity);
  }
}

SelectionBasis passive_basis(const Eigen::MatrixXd& free_twists, const std::string& entity) {
  try {
    return complement_basis(free_twists);
  } catch (const ModelError& e) {
    throw ModelError(entity + ": " + e.what(), entity);
  }
}

}  // namespace

ManipulatorModel ModelBuilder::build() const {
  ManipulatorModel model;
  std::set<std::string> node_ids;
  for (const auto& n : nodes_) {
    if (!node_ids.insert(n.id).second) {
      throw ModelError("duplicate node id '" + n.id + "'", n.id);
    }
    model.nodes.push_back(n);
  }
  auto require_node = [&model](const std::string& id, const std::string& by) -> const Node& {
    const auto k = model.node_index(id);
    if (!k) throw ModelError("unknown node '" + id + "' referenced by " + by, id);
    return model.nodes[*k];
  };

  std::set<std::string> entity_ids;
  auto claim_id = [&entity_ids](const std::string& id) {
    if (id.empty()) throw ModelError("link and joint ids must not be empty");
    if (!entity_ids.insert(id).second) throw ModelError("duplicate id '" + id + "'", id);
  };

  for (const auto& l : links_) {
    claim_id(l.id);
    const Node& ni = require_node(l.node_i, "link '" + l.id + "'");
    const Node& nj = require_node(l.node_j, "link '" + l.id + "'");
    const Vector3 d = nj.position - ni.position;
    switch (l.type) {
      case LinkType::beam:
        model.links.emplace_back(
            beam_link(l.id, l.node_i, l.node_j, ni.position, nj.position, l.material, l.section,
                      l.hint));
        break;
      case LinkType::rigid:
        model.links.emplace_back(RigidLink{l.id, l.node_i, l.node_j, d});
        break;
      case LinkType::custom:
        model.links.emplace_back(custom_flexible_link(l.id, l.node_i, l.node_j, l.k, d));
        break;
    }
  }

  for (const auto& pending : joints_) {
    JointSpec spec = pending.spec;
    claim_id(spec.id);
    for (const auto& id : spec.nodes) require_node(id, "joint '" + spec.id + "'");
    const std::string entity = "joint '" + spec.id + "'";
    const auto& c = pending.connection;
    if (spec.kind == JointKind::passive) {
      spec.basis = passive_basis(c.free_twists, entity);
    } else if (spec.kind == JointKind::elastic ||
               (spec.kind == JointKind::actuated && spec.mode == ActuationMode::drive_stiffness)) {
      spec.basis = spring_basis(c.free_twists, entity);
      try {
        require_spring(c.stiffness, c.preload, spec.basis.free_count());
      } catch (const ModelError& e) {
        throw ModelError(entity + ": " + e.what(), spec.id);
      }
      spec.stiffness = c.stiffness;
      spec.preload = c.preload.size() ? c.preload : Eigen::VectorXd::Zero(c.stiffness.rows());
    }
    model.joints.push_back(std::move(spec));
  }

  for (const auto& pending : supports_) {
    SupportSpec spec = pending.spec;
    const std::string entity = "support@" + spec.node;
    require_node(spec.node, entity);
    const auto& c = pending.connection;
    if (spec.kind == SupportKind::passive) {
      spec.basis = passive_basis(c.free_twists, entity);
    } else if (spec.kind == SupportKind::elastic) {
      spec.basis = spring_basis(c.free_twists, entity);
      try {
        require_spring(c.stiffness, c.preload, spec.basis.free_count());
      } catch (const ModelError& e) {
        throw ModelError(entity + ": " + e.what(), entity);
      }
      spec.stiffness = c.stiffness;
      spec.preload = c.preload.size() ? c.preload : Eigen::VectorXd::Zero(c.stiffness.rows());
    }
    model.supports.push_back(std::move(spec));
  }

  for (const auto& load : loads_) {
    require_node(load.node, "a load");
    model.loads.push_back(load);
  }

  if (!end_effector_ || end_effector_->empty()) {
    throw ModelError("missing end_effector");
  }
  require_node(*end_effector_, "end_effector");
  model.end_effector = *end_effector_;
  return model;
}

}  // namespace msa

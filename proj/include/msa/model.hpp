#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "msa/connections.hpp"
#include "msa/elements.hpp"
#include "msa/screw.hpp"

namespace msa {

struct Node {
  std::string id;
  Vector3 position = Vector3::Zero();
};

using Link = std::variant<FlexibleLink, RigidLink>;

const std::string& link_id(const Link& link);
const std::string& link_node_i(const Link& link);
const std::string& link_node_j(const Link& link);

/// Manipulator description graph. Every node is the end of exactly one link,
/// and is bound by exactly one of: a joint, a support, or a load declaration
/// (a zero load marks a free link end). Loads may also be attached to nodes of
/// rigid, elastic or actuated joints, where they enter the joint's node
/// balance.
struct ManipulatorModel {
  std::vector<Node> nodes;
  std::vector<Link> links;
  std::vector<JointSpec> joints;
  std::vector<SupportSpec> supports;
  std::vector<LoadSpec> loads;
  std::string end_effector;

  std::optional<std::size_t> node_index(const std::string& id) const;
  const Node& node(const std::string& id) const;  // throws ModelError if unknown
};

struct ValidationIssue {
  std::string code;
  std::string message;
  std::string entity;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  std::vector<ValidationIssue> warnings;
  std::size_t equation_count = 0;
  std::size_t unknown_count = 0;

  bool ok() const { return errors.empty(); }
};

ValidationReport validate(const ManipulatorModel& model);

/// Incremental construction of a ManipulatorModel. Link geometry is resolved
/// from node positions in build(), which throws ModelError on unknown node
/// references, duplicate ids, a missing end effector, or invalid link,
/// joint or support parameters. Structural rules are left to validate().
class ModelBuilder {
 public:
  ModelBuilder& node(std::string id, const Vector3& position);

  ModelBuilder& beam(std::string id, std::string node_i, std::string node_j, const Material& mat,
                     const CrossSection& sec, std::optional<Vector3> orientation_hint = {});
  ModelBuilder& rigid_link(std::string id, std::string node_i, std::string node_j);
  ModelBuilder& custom_link(std::string id, std::string node_i, std::string node_j,
                            const Matrix12& k_global);

  ModelBuilder& rigid_joint(std::string id, std::vector<std::string> nodes);
  ModelBuilder& passive_joint(std::string id, std::string node_i, std::string node_j,
                              const Eigen::MatrixXd& free_twists);
  /// `free_twists` must be orthonormal rows: `stiffness` and `preload` are
  /// expressed along them.
  ModelBuilder& elastic_joint(std::string id, std::string node_i, std::string node_j,
                              const Eigen::MatrixXd& free_twists, const Eigen::MatrixXd& stiffness,
                              const Eigen::VectorXd& preload = {});
  ModelBuilder& locked_actuator(std::string id, std::string node_i, std::string node_j);
  ModelBuilder& drive_actuator(std::string id, std::string node_i, std::string node_j,
                               const Eigen::MatrixXd& free_twists,
                               const Eigen::MatrixXd& stiffness,
                               const Eigen::VectorXd& preload = {});

  ModelBuilder& rigid_support(std::string node);
  ModelBuilder& passive_support(std::string node, const Eigen::MatrixXd& free_twists);
  ModelBuilder& elastic_support(std::string node, const Eigen::MatrixXd& free_twists,
                                const Eigen::MatrixXd& stiffness,
                                const Eigen::VectorXd& preload = {});

  ModelBuilder& load(std::string node, const Wrench& wrench = {});
  ModelBuilder& end_effector(std::string node);

  ManipulatorModel build() const;

 private:
  enum class LinkType { beam, rigid, custom };
  struct PendingLink {
    std::string id;
    LinkType type;
    std::string node_i;
    std::string node_j;
    Material material;
    CrossSection section;
    std::optional<Vector3> hint;
    Matrix12 k;
  };
  struct PendingConnection {
    Eigen::MatrixXd free_twists = Eigen::MatrixXd(0, 6);
    Eigen::MatrixXd stiffness;
    Eigen::VectorXd preload;
  };
  struct PendingJoint {
    JointSpec spec;
    PendingConnection connection;
  };
  struct PendingSupport {
    SupportSpec spec;
    PendingConnection connection;
  };

  std::vector<Node> nodes_;
  std::vector<PendingLink> links_;
  std::vector<PendingJoint> joints_;
  std::vector<PendingSupport> supports_;
  std::vector<LoadSpec> loads_;
  std::optional<std::string> end_effector_;
};

/// Number of scalar equations each kind of entity contributes.
std::size_t joint_equation_count(const JointSpec& joint);

}  // namespace msa

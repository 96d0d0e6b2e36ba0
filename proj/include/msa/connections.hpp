#pragma once

// Equation rows for joints, supports and external loads.
//
// Conventions shared with the link models: W_k is the wrench that node k
// applies to the end of its link. Springs act against the relative deflection
// of the links they connect, so an elastic joint between ends i and j obeys
//   Lambda_e W_i = Ke Lambda_e (dt_j - dt_i) + w0,
// and an elastic support obeys Lambda_e W_j = -Ke Lambda_e dt_j + w0, where w0
// is the spring preload expressed along the free directions.

#include <span>
#include <string>
#include <vector>

#include "msa/equations.hpp"
#include "msa/screw.hpp"

namespace msa {

/// Orthonormal split of twist space at a connection into free (passive or
/// elastic) directions and constrained directions. Stacking `free` over
/// `constrained` gives an orthogonal 6x6 matrix.
struct SelectionBasis {
  Eigen::MatrixXd free = Eigen::MatrixXd(0, 6);         // p x 6
  Eigen::MatrixXd constrained = Eigen::MatrixXd(0, 6);  // (6 - p) x 6

  Eigen::Index free_count() const { return free.rows(); }
  Eigen::Index constrained_count() const { return constrained.rows(); }
};

/// Orthonormalizes `free_rows` (Gram-Schmidt in row order) and completes them
/// with constrained rows chosen greedily from the unit twists e1..e6, taking
/// the most independent candidate first and breaking ties by index. Throws
/// ModelError when the rows are rank deficient (smallest singular value below
/// 1e-9) or not 6 columns wide.
SelectionBasis complement_basis(const Eigen::MatrixXd& free_rows);

enum class JointKind { rigid, passive, elastic, actuated };
enum class ActuationMode { locked, drive_stiffness };
enum class SupportKind { rigid, passive, elastic };

struct JointSpec {
  std::string id;
  JointKind kind = JointKind::rigid;
  std::vector<std::string> nodes;
  SelectionBasis basis;        // passive, elastic, actuated/drive_stiffness
  Eigen::MatrixXd stiffness;   // e x e, elastic and drive_stiffness
  Eigen::VectorXd preload;     // e, along basis.free; empty means zero
  ActuationMode mode = ActuationMode::locked;

  /// True when the joint's rows include a 6-row node balance (sum of member
  /// wrenches) that can carry an external load.
  bool carries_node_balance() const;
  /// True when the joint behaves as a rigid connection.
  bool is_rigid() const;
};

struct SupportSpec {
  SupportKind kind = SupportKind::rigid;
  std::string node;
  SelectionBasis basis;
  Eigen::MatrixXd stiffness;
  Eigen::VectorXd preload;
};

struct LoadSpec {
  std::string node;
  Wrench wrench;
};

inline constexpr double kCoincidenceTolerance = 1e-9;  // [m]

/// Throws ModelError naming `entity` if the positions are not all within
/// kCoincidenceTolerance of the first.
void require_coincident(std::span<const Vector3> positions, const std::string& entity = {});

/// Throws ModelError unless `ke` is e x e, symmetric within 1e-12 relative and
/// positive definite, and `preload` is empty or of length e.
void require_spring(const Eigen::MatrixXd& ke, const Eigen::VectorXd& preload, Eigen::Index e,
                    const std::string& entity = {});

// Joint generators. Slots 0..m-1 follow the order of `positions`.

/// 6 rows dt_i - dt_j = 0, then 6 rows W_i + W_j = 0.
EquationRows rigid_joint_rows(std::span<const Vector3> positions);

/// For m >= 3: 6(m-1) rows dt_1 - dt_k = 0 and 6 rows sum W_k = 0.
/// m == 2 delegates to rigid_joint_rows.
EquationRows multi_rigid_joint_rows(std::span<const Vector3> positions);

/// r compatibility rows, r equilibrium rows, and p + p rows zeroing the free
/// wrench components at each end (12 rows in total).
EquationRows passive_joint_rows(std::span<const Vector3> positions, const SelectionBasis& basis);

/// r compatibility rows, 6 rows W_i + W_j = 0, and e spring rows
/// Lambda_e W_i + Ke Lambda_e (dt_i - dt_j) = preload (12 rows in total).
EquationRows elastic_joint_rows(std::span<const Vector3> positions, const SelectionBasis& basis,
                                const Eigen::MatrixXd& ke, const Eigen::VectorXd& preload);

/// Locked: rigid joint rows. Drive stiffness: elastic joint rows along
/// basis.free with stiffness `ke`.
EquationRows actuated_joint_rows(std::span<const Vector3> positions, ActuationMode mode,
                                 const SelectionBasis& basis = {},
                                 const Eigen::MatrixXd& ke = {},
                                 const Eigen::VectorXd& preload = {});

EquationRows joint_rows(const JointSpec& joint, std::span<const Vector3> positions);

// Support generators (single slot 0).

/// 6 rows dt_j = 0.
EquationRows rigid_support_rows();

/// r rows Lambda_r dt_j = 0 and p rows Lambda_p W_j = 0.
EquationRows passive_support_rows(const SelectionBasis& basis);

/// r rows Lambda_r dt_j = 0 and e rows Ke Lambda_e dt_j + Lambda_e W_j = preload.
EquationRows elastic_support_rows(const SelectionBasis& basis, const Eigen::MatrixXd& ke,
                                  const Eigen::VectorXd& preload);

EquationRows support_rows(const SupportSpec& support);

/// 6 rows sum_k W_k = applied over `members` wrench variables.
EquationRows external_load_rows(std::size_t members, const Wrench& applied);

}  // namespace msa

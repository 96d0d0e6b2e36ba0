#pragma once

// Aggregation of all link, joint, support and load equations into one sparse
// square system over the stacked unknowns [{dt_n}; {W_n}], and its partition
// into the reduced system that yields the Cartesian stiffness.

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "msa/model.hpp"

namespace msa {

/// Column layout: all node deflections (6 per node, declaration order), then
/// all node wrenches.
class VariableIndex {
 public:
  explicit VariableIndex(const ManipulatorModel& model);

  std::size_t node_count() const { return ids_.size(); }
  Eigen::Index column_count() const { return 12 * static_cast<Eigen::Index>(ids_.size()); }
  std::size_t node(const std::string& id) const;  // throws ModelError if unknown
  const std::string& id(std::size_t node) const { return ids_[node]; }

  Eigen::Index deflection_column(std::size_t node) const {
    return 6 * static_cast<Eigen::Index>(node);
  }
  Eigen::Index wrench_column(std::size_t node) const {
    return 6 * static_cast<Eigen::Index>(ids_.size() + node);
  }
  Eigen::Index column(std::size_t node, Quantity q) const {
    return q == Quantity::deflection ? deflection_column(node) : wrench_column(node);
  }

  /// Human-readable name of a column, e.g. "dt[n2].ry" or "W[n1].fx".
  std::string column_label(Eigen::Index column) const;

 private:
  std::vector<std::string> ids_;
};

VariableIndex index_variables(const ManipulatorModel& model);

struct RowGroup {
  std::string source;  // "link 'l1'", "joint 'j1'", "support@n1", "load@n2"
  std::string role;    // equation role within the source
  Eigen::Index first = 0;
  Eigen::Index count = 0;
};

struct GlobalSystem {
  VariableIndex index;
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
  Eigen::VectorXd rhs;
  std::vector<RowGroup> groups;
  /// node -> first of the six rows balancing the wrenches at that node against
  /// the external load (free-node load rows or a joint's equilibrium rows).
  std::vector<std::optional<Eigen::Index>> balance_rows;
  std::vector<bool> supported;  // per node
  double characteristic_length = 1.0;     // bounding-box diagonal [m]
  double characteristic_stiffness = 1.0;  // largest |K| entry of the links

  Eigen::Index size() const { return matrix.rows(); }
  std::string describe_row(Eigen::Index row) const;

  /// Column scaling that makes deflection and wrench unknowns commensurate:
  /// translations by L0, rotations by 1, forces by k0*L0, moments by k0*L0^2.
  Eigen::VectorXd column_scale() const;
};

/// Validates the model, then inserts every generator's rows. Throws
/// ModelError (carrying the first validation error) if validation fails or
/// the row count differs from 12 x nodes.
GlobalSystem assemble(const ManipulatorModel& model);

struct PartitionedSystem {
  Eigen::SparseMatrix<double> reduced;     // rows of the system minus the end-effector balance
  Eigen::SparseMatrix<double> coupling;    // reduced rows x end-effector deflection columns
  Eigen::VectorXd rhs;                     // right-hand side of the reduced rows
  Eigen::SparseMatrix<double> extraction;  // end-effector balance rows x reduced columns
  Vector6 extraction_rhs = Vector6::Zero();  // assembled rhs of those rows (declared EE load)

  std::vector<Eigen::Index> reduced_rows;     // original row of each reduced row
  std::vector<Eigen::Index> reduced_columns;  // original column of each reduced column
  std::vector<Eigen::Index> extraction_rows;  // original rows of the balance
  std::vector<Eigen::Index> end_effector_columns;
};

/// Moves the end-effector deflection to the parameter side and its balance
/// rows to the output side. Reduced columns are ordered [all wrenches;
/// deflections of the other nodes].
PartitionedSystem partition(const GlobalSystem& system, const std::string& end_effector);

/// Writes <dir>/system.mtx (coordinate, real, general) and <dir>/rhs.mtx
/// (array, real, general) in full double precision.
void write_matrix_market(const GlobalSystem& system, const std::filesystem::path& dir);

}  // namespace msa

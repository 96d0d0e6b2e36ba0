#pragma once

// A block of scalar equations produced by one link, joint, support or load.
// Coefficients are expressed over 6-column variable blocks that refer to the
// generator's own node slots; the assembler maps slots to global columns.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace msa {

enum class Quantity { deflection, wrench };

struct VariableRef {
  std::size_t slot;   // position in the generator's node list
  Quantity quantity;
};

struct RowSegment {
  std::string role;
  Eigen::Index first;
  Eigen::Index count;
};

struct EquationRows {
  std::vector<VariableRef> variables;
  Eigen::MatrixXd coefficients;  // rows x (6 * variables.size())
  Eigen::VectorXd rhs;
  std::vector<RowSegment> segments;
  // First of six rows reading "sum of member-end wrenches = applied wrench";
  // an external load at the node is added to their right-hand side.
  std::optional<Eigen::Index> balance_row;

  EquationRows(std::vector<VariableRef> vars, Eigen::Index rows);

  Eigen::Index rows() const { return coefficients.rows(); }

  /// Coefficient block of rows [first, first + count) acting on variable `var`.
  auto block(Eigen::Index first, Eigen::Index count, std::size_t var) {
    return coefficients.block(first, 6 * static_cast<Eigen::Index>(var), count, 6);
  }

  void add_segment(std::string role, Eigen::Index first, Eigen::Index count) {
    segments.push_back({std::move(role), first, count});
  }

  /// coefficients * stacked - rhs, where `stacked` concatenates the variable
  /// values in the order of `variables`.
  Eigen::VectorXd residual(const Eigen::VectorXd& stacked) const;
};

inline EquationRows::EquationRows(std::vector<VariableRef> vars, Eigen::Index rows)
    : variables(std::move(vars)),
      coefficients(Eigen::MatrixXd::Zero(rows, 6 * static_cast<Eigen::Index>(variables.size()))),
      rhs(Eigen::VectorXd::Zero(rows)) {}

inline Eigen::VectorXd EquationRows::residual(const Eigen::VectorXd& stacked) const {
  return coefficients * stacked - rhs;
}

}  // namespace msa

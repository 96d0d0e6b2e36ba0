#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace msa {

/// Malformed model text: JSON syntax or schema violations.
class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : std::runtime_error(what), line_(line), column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Semantically invalid model: unknown references, duplicate ids, bad parameters,
/// or a model that failed validation.
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& what, std::string entity = {})
      : std::runtime_error(what), entity_(std::move(entity)) {}

  const std::string& entity() const { return entity_; }

 private:
  std::string entity_;
};

/// A linear system that could not be solved because it is rank deficient.
///
/// `basis` holds orthonormal null-space vectors as columns, expressed in the
/// unknowns of the failing system (reduced system columns, or the six
/// Cartesian twist components for a singular Kc). `labels` names each row of
/// `basis`.
class SingularSystemError : public std::runtime_error {
 public:
  enum class Kind {
    mobility,          // deflections move without load: a mechanism
    rigid_direction,   // load carried with zero deflection: infinitely stiff direction
    cartesian,         // singular Cartesian stiffness at the end effector
  };

  SingularSystemError(const std::string& what, Kind kind, Eigen::MatrixXd basis,
                      std::vector<std::string> labels)
      : std::runtime_error(what),
        kind_(kind),
        basis_(std::move(basis)),
        labels_(std::move(labels)) {}

  Kind kind() const { return kind_; }
  const Eigen::MatrixXd& basis() const { return basis_; }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  Kind kind_;
  Eigen::MatrixXd basis_;
  std::vector<std::string> labels_;
};

}  // namespace msa

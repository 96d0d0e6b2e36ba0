#pragma once

// Solution of the assembled system: Cartesian stiffness at the end effector,
// full internal states for a prescribed end-effector deflection or wrench,
// and support reactions.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "msa/assembly.hpp"
#include "msa/errors.hpp"
#include "msa/model.hpp"

namespace msa {

struct SolverOptions {
  bool equilibrate = true;          // column (L0, k0) and row scaling before factorization
  unsigned threads = 1;             // right-hand sides solved concurrently
  double condition_gate = 1e12;     // above this the system is checked for rank deficiency
  double singular_ratio = 1e-13;    // sigma_min / sigma_max below this is treated as singular
  double cartesian_tolerance = 1e-9;  // relative singular value marking a free Cartesian direction
  Eigen::Index dense_limit = 600;   // dense LU below this size, sparse LU above
};

/// LU factorization of a square sparse system with optional diagonal
/// equilibration, a 1-norm condition estimate and rank diagnosis.
class FactorizedSystem {
 public:
  /// `column_scale` multiplies the unknowns (x = S y); `labels` and
  /// `deflection` describe each column for null-space reports.
  FactorizedSystem(const Eigen::SparseMatrix<double>& matrix, const Eigen::VectorXd& column_scale,
                   std::vector<std::string> labels, std::vector<bool> deflection,
                   const SolverOptions& options, std::string name);
  ~FactorizedSystem();
  FactorizedSystem(FactorizedSystem&&) noexcept;
  FactorizedSystem& operator=(FactorizedSystem&&) noexcept;

  Eigen::Index size() const { return matrix_.rows(); }
  bool singular() const { return failure_.has_value(); }
  const std::optional<SingularSystemError>& failure() const { return failure_; }
  /// Estimated 1-norm condition number of the equilibrated matrix.
  double condition_estimate() const { return condition_; }
  bool ill_conditioned() const { return condition_ > options_.condition_gate; }

  /// Solves for every column of `rhs` with one step of iterative refinement.
  /// Throws the stored SingularSystemError if the matrix is singular.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;

 private:
  struct Factors;

  Eigen::MatrixXd solve_scaled(const Eigen::MatrixXd& rhs) const;
  void diagnose();

  Eigen::SparseMatrix<double> matrix_;  // original
  Eigen::SparseMatrix<double> scaled_;  // R * A * S
  Eigen::VectorXd row_scale_;
  Eigen::VectorXd column_scale_;
  std::vector<std::string> labels_;
  std::vector<bool> deflection_;
  SolverOptions options_;
  std::string name_;
  std::unique_ptr<Factors> factors_;
  double condition_ = 0.0;
  std::optional<SingularSystemError> failure_;
};

struct StiffnessResult {
  Matrix6 stiffness = Matrix6::Zero();  // Kc: end-effector twist -> wrench
  Wrench offset;                        // wrench at zero end-effector deflection
  double condition_estimate = 0.0;      // of the reduced matrix M
  std::vector<std::string> warnings;
  /// Columns: unit twists along which Kc vanishes (empty when Kc is regular).
  Eigen::MatrixXd free_directions = Eigen::MatrixXd(6, 0);
};

struct NodeState {
  std::string id;
  Twist deflection;
  Wrench wrench;
};

struct FullState {
  std::vector<NodeState> nodes;  // declaration order
  Twist ee_deflection;
  Wrench ee_wrench;  // external wrench at the end effector
  Eigen::VectorXd solution;  // stacked unknowns in global column order
  std::vector<std::string> warnings;
};

struct Reaction {
  std::string node;
  Wrench wrench;  // wrench the support exerts on the structure
};

/// Assembles and factors a model once; every query reuses the factorization.
class StiffnessAnalysis {
 public:
  explicit StiffnessAnalysis(const ManipulatorModel& model, SolverOptions options = {});
  ~StiffnessAnalysis();

  const ManipulatorModel& model() const { return model_; }
  const GlobalSystem& system() const { return system_; }
  const PartitionedSystem& partitioned() const { return partition_; }
  const FactorizedSystem& reduced() const { return reduced_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Kc = -B_e M^-1 C_e and W_offset = B_e M^-1 b. Throws SingularSystemError
  /// if M is singular.
  StiffnessResult stiffness() const;

  FullState solve_prescribed_deflection(const Twist& dt_e) const;

  /// Throws SingularSystemError (cartesian) if Kc is singular. When M is
  /// singular the full square system is solved with W_e as load instead.
  FullState solve_applied_wrench(const Wrench& w_e) const;

  /// End-effector compliance from the full system under unit wrenches. Defined
  /// even when M is singular because some directions are infinitely stiff.
  Matrix6 cartesian_compliance() const;

  std::vector<Reaction> support_reactions(const FullState& state) const;
  double equilibrium_residual(const FullState& state) const;

 private:
  const FactorizedSystem& full() const;
  FullState state_from_solution(const Eigen::VectorXd& x, std::vector<std::string> warnings) const;
  Eigen::VectorXd full_rhs(const Wrench& w_e) const;

  ManipulatorModel model_;
  SolverOptions options_;
  std::vector<std::string> warnings_;
  GlobalSystem system_;
  PartitionedSystem partition_;
  std::size_t ee_node_ = 0;
  Eigen::Index ee_row_ = 0;
  FactorizedSystem reduced_;
  mutable std::unique_ptr<FactorizedSystem> full_;
  mutable std::optional<StiffnessResult> stiffness_;
};

StiffnessResult cartesian_stiffness(const ManipulatorModel& model, const SolverOptions& options = {});
FullState solve_prescribed_deflection(const ManipulatorModel& model, const Twist& dt_e,
                                      const SolverOptions& options = {});
FullState solve_applied_wrench(const ManipulatorModel& model, const Wrench& w_e,
                               const SolverOptions& options = {});
Matrix6 cartesian_compliance(const ManipulatorModel& model, const SolverOptions& options = {});
std::vector<Reaction> support_reactions(const FullState& state, const ManipulatorModel& model);

/// max over rows of |row . x - rhs| / (1 + |rhs|), the end-effector balance
/// rows taking the state's W_e as right-hand side.
double equilibrium_residual(const FullState& state, const ManipulatorModel& model);

/// Unit free Cartesian directions of a stiffness matrix, as columns. `length`
/// makes translations and rotations commensurate.
Eigen::MatrixXd cartesian_free_directions(const Matrix6& kc, double length,
                                          double relative_tolerance = 1e-9);

}  // namespace msa

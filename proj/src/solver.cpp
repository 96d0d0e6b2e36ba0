#include "msa/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include <Eigen/SparseLU>

#include "msa/oracle.hpp"

namespace msa {

struct FactorizedSystem::Factors {
  std::optional<Eigen::PartialPivLU<Eigen::MatrixXd>> dense;
  mutable std::optional<Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>> sparse;

  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const {
    if (dense) return dense->solve(b);
    return sparse->solve(b);
  }
  Eigen::MatrixXd solve_transpose(const Eigen::MatrixXd& b) const {
    if (dense) return dense->transpose().solve(b);
    return sparse->transpose().solve(b);
  }
};

namespace {

double one_norm(const Eigen::SparseMatrix<double>& a) {
  double best = 0.0;
  for (Eigen::Index c = 0; c < a.outerSize(); ++c) {
    double sum = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, c); it; ++it) sum += std::abs(it.value());
    best = std::max(best, sum);
  }
  return best;
}

// Hager's estimate of |A^-1|_1, refined with Higham's alternating vector.
double inverse_one_norm(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& solve,
                        const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& solve_t,
                        Eigen::Index n) {
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  double estimate = 0.0;
  Eigen::Index last = -1;
  for (int iter = 0; iter < 5; ++iter) {
    const Eigen::VectorXd y = solve(x);
    if (!y.allFinite()) return std::numeric_limits<double>::infinity();
    estimate = std::max(estimate, y.lpNorm<1>());
    const Eigen::VectorXd xi = y.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
    const Eigen::VectorXd z = solve_t(xi);
    Eigen::Index j = 0;
    const double zmax = z.cwiseAbs().maxCoeff(&j);
    if (zmax <= z.dot(x) || j == last) break;
    last = j;
    x.setZero();
    x(j) = 1.0;
  }
  Eigen::VectorXd alt(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sign = i % 2 == 0 ? 1.0 : -1.0;
    alt(i) = sign * (1.0 + (n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0));
  }
  const double alt_estimate = 2.0 * solve(alt).lpNorm<1>() / (3.0 * static_cast<double>(n));
  if (!std::isfinite(alt_estimate)) return std::numeric_limits<double>::infinity();
  return std::max(estimate, alt_estimate);
}

std::string describe_vector(const Eigen::VectorXd& v, const std::vector<std::string>& labels) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(v.size()));
  for (Eigen::Index k = 0; k < v.size(); ++k) order[static_cast<std::size_t>(k)] = k;
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return std::abs(v(a)) > std::abs(v(b)); });
  std::ostringstream out;
  out.precision(3);
  const std::size_t shown = std::min<std::size_t>(4, order.size());
  for (std::size_t k = 0; k < shown; ++k) {
    if (std::abs(v(order[k])) < 1e-6) break;
    if (k) out << ", ";
    out << labels[static_cast<std::size_t>(order[k])] << " " << v(order[k]);
  }
  return out.str();
}

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

}  // namespace

FactorizedSystem::FactorizedSystem(const Eigen::SparseMatrix<double>& matrix,
                                   const Eigen::VectorXd& column_scale,
                                   std::vector<std::string> labels, std::vector<bool> deflection,
                                   const SolverOptions& options, std::string name)
    : matrix_(matrix),
      labels_(std::move(labels)),
      deflection_(std::move(deflection)),
      options_(options),
      name_(std::move(name)),
      factors_(std::make_unique<Factors>()) {
  const Eigen::Index n = matrix_.rows();
  if (matrix_.cols() != n) throw std::invalid_argument(name_ + " is not square");
  column_scale_ = options_.equilibrate ? column_scale : Eigen::VectorXd::Ones(n);
  scaled_ = matrix_ * column_scale_.asDiagonal();
  row_scale_ = Eigen::VectorXd::Ones(n);
  if (options_.equilibrate) {
    Eigen::VectorXd row_max = Eigen::VectorXd::Zero(n);
    for (Eigen::Index c = 0; c < scaled_.outerSize(); ++c) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(scaled_, c); it; ++it) {
        row_max(it.row()) = std::max(row_max(it.row()), std::abs(it.value()));
      }
    }
    for (Eigen::Index r = 0; r < n; ++r) row_scale_(r) = row_max(r) > 0.0 ? 1.0 / row_max(r) : 1.0;
    scaled_ = row_scale_.asDiagonal() * scaled_;
  }
  scaled_.makeCompressed();
  if (n == 0) return;

  bool factored = false;
  if (n < options_.dense_limit) {
    factors_->dense.emplace(Eigen::MatrixXd(scaled_));
    factored = true;
  } else {
    factors_->sparse.emplace();
    factors_->sparse->analyzePattern(scaled_);
    factors_->sparse->factorize(scaled_);
    factored = factors_->sparse->info() == Eigen::Success;
  }

  if (factored) {
    const double inv = inverse_one_norm(
        [this](const Eigen::VectorXd& b) -> Eigen::VectorXd { return factors_->solve(b); },
        [this](const Eigen::VectorXd& b) -> Eigen::VectorXd {
          return factors_->solve_transpose(b);
        },
        n);
    condition_ = std::isfinite(inv) ? one_norm(scaled_) * inv
                                    : std::numeric_limits<double>::infinity();
  } else {
    condition_ = std::numeric_limits<double>::infinity();
  }
  if (!std::isfinite(condition_) || condition_ > options_.condition_gate) diagnose();
}

FactorizedSystem::~FactorizedSystem() = default;
FactorizedSystem::FactorizedSystem(FactorizedSystem&&) noexcept = default;
FactorizedSystem& FactorizedSystem::operator=(FactorizedSystem&&) noexcept = default;

void FactorizedSystem::diagnose() {
  const Eigen::MatrixXd dense(scaled_);
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(dense);
  const auto& s = svd.singularValues();
  const double ratio = s(0) > 0.0 ? s(s.size() - 1) / s(0) : 0.0;
  if (ratio >= options_.singular_ratio) {
    // Ill-conditioned but regular: make sure a usable factorization exists.
    if (!factors_->dense) {
      factors_->sparse.reset();
      factors_->dense.emplace(dense);
    }
    if (!std::isfinite(condition_)) condition_ = 1.0 / ratio;
    return;
  }

  const Eigen::MatrixXd basis_scaled = oracle::dense_nullspace(dense, 1e-9);
  Eigen::MatrixXd basis = column_scale_.asDiagonal() * basis_scaled;
  for (Eigen::Index k = 0; k < basis.cols(); ++k) basis.col(k).normalize();

  double deflection_weight = 0.0;
  for (Eigen::Index k = 0; k < basis.cols(); ++k) {
    for (Eigen::Index r = 0; r < basis.rows(); ++r) {
      if (deflection_[static_cast<std::size_t>(r)]) {
        deflection_weight = std::max(deflection_weight, std::abs(basis(r, k)));
      }
    }
  }
  const auto kind = deflection_weight > 1e-6 ? SingularSystemError::Kind::mobility
                                             : SingularSystemError::Kind::rigid_direction;
  std::ostringstream msg;
  msg << name_ << " is singular (sigma_min/sigma_max = " << ratio << ", "
      << basis.cols() << "-dimensional null space): ";
  msg << (kind == SingularSystemError::Kind::mobility
              ? "mechanism mobility, deflections unresisted by any element"
              : "infinitely stiff direction, internal wrenches not determined");
  if (basis.cols() > 0) msg << "; first null vector: " << describe_vector(basis.col(0), labels_);
  failure_.emplace(msg.str(), kind, std::move(basis), labels_);
  condition_ = std::numeric_limits<double>::infinity();
}

Eigen::MatrixXd FactorizedSystem::solve_scaled(const Eigen::MatrixXd& rhs) const {
  const Eigen::Index cols = rhs.cols();
  const unsigned threads =
      std::max(1u, std::min<unsigned>(options_.threads, static_cast<unsigned>(cols)));
  Eigen::MatrixXd out(rhs.rows(), cols);
  auto work = [&](Eigen::Index first, Eigen::Index last) {
    if (first >= last) return;
    const Eigen::MatrixXd b = rhs.middleCols(first, last - first);
    Eigen::MatrixXd y = factors_->solve(b);
    const Eigen::MatrixXd r = b - scaled_ * y;
    y += factors_->solve(r);
    out.middleCols(first, last - first) = y;
  };
  if (threads <= 1) {
    work(0, cols);
    return out;
  }
  std::vector<std::thread> pool;
  const Eigen::Index chunk = (cols + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const Eigen::Index first = static_cast<Eigen::Index>(t) * chunk;
    pool.emplace_back(work, first, std::min(cols, first + chunk));
  }
  for (auto& th : pool) th.join();
  return out;
}

Eigen::MatrixXd FactorizedSystem::solve(const Eigen::MatrixXd& rhs) const {
  if (failure_) throw *failure_;
  if (rhs.rows() != size()) throw std::invalid_argument("right-hand side size mismatch");
  if (size() == 0) return Eigen::MatrixXd(0, rhs.cols());
  const Eigen::MatrixXd y = solve_scaled(row_scale_.asDiagonal() * rhs);
  Eigen::MatrixXd x = column_scale_.asDiagonal() * y;
  if (!all_finite(x)) {
    throw SingularSystemError(name_ + " produced a non-finite solution",
                              SingularSystemError::Kind::mobility, Eigen::MatrixXd(size(), 0),
                              labels_);
  }
  return x;
}

namespace {

FactorizedSystem factor_reduced(const GlobalSystem& system, const PartitionedSystem& p,
                                const SolverOptions& options) {
  const Eigen::VectorXd scale = system.column_scale();
  const auto m = static_cast<Eigen::Index>(p.reduced_columns.size());
  Eigen::VectorXd s(m);
  std::vector<std::string> labels;
  std::vector<bool> deflection;
  const Eigen::Index wrench0 = 6 * static_cast<Eigen::Index>(system.index.node_count());
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::Index c = p.reduced_columns[static_cast<std::size_t>(k)];
    s(k) = scale(c);
    labels.push_back(system.index.column_label(c));
    deflection.push_back(c < wrench0);
  }
  return FactorizedSystem(p.reduced, s, std::move(labels), std::move(deflection), options,
                          "reduced system M");
}

}  // namespace

StiffnessAnalysis::StiffnessAnalysis(const ManipulatorModel& model, SolverOptions options)
    : model_(model),
      options_(options),
      system_(assemble(model_)),
      partition_(partition(system_, model_.end_effector)),
      ee_node_(system_.index.node(model_.end_effector)),
      ee_row_(*system_.balance_rows[ee_node_]),
      reduced_(factor_reduced(system_, partition_, options_)) {
  for (const auto& w : validate(model_).warnings) warnings_.push_back(w.message);
}

StiffnessAnalysis::~StiffnessAnalysis() = default;

StiffnessResult StiffnessAnalysis::stiffness() const {
  if (stiffness_) return *stiffness_;
  const Eigen::Index m = partition_.reduced.rows();
  Eigen::MatrixXd rhs(m, 7);
  rhs.leftCols<6>() = Eigen::MatrixXd(partition_.coupling);
  rhs.col(6) = partition_.rhs;
  const Eigen::MatrixXd x = reduced_.solve(rhs);
  const Eigen::MatrixXd bx = partition_.extraction * x;

  StiffnessResult result;
  result.stiffness = -bx.leftCols<6>();
  result.offset = Wrench::from_vector(bx.col(6));
  result.condition_estimate = reduced_.condition_estimate();
  result.warnings = warnings_;
  if (reduced_.ill_conditioned()) {
    std::ostringstream w;
    w << "reduced system is ill-conditioned (condition estimate " << reduced_.condition_estimate()
      << ")";
    result.warnings.push_back(w.str());
  }
  const double norm = result.stiffness.norm();
  if (norm > 0.0) {
    const double asym = (result.stiffness - result.stiffness.transpose()).norm() / norm;
    if (asym > 1e-8) {
      std::ostringstream w;
      w << "Cartesian stiffness is not symmetric (relative asymmetry " << asym << ")";
      result.warnings.push_back(w.str());
    }
  }
  result.free_directions = cartesian_free_directions(
      result.stiffness, system_.characteristic_length, options_.cartesian_tolerance);
  stiffness_ = result;
  return result;
}

FullState StiffnessAnalysis::state_from_solution(const Eigen::VectorXd& x,
                                                 std::vector<std::string> warnings) const {
  FullState state;
  state.solution = x;
  state.warnings = std::move(warnings);
  const std::size_t n = system_.index.node_count();
  for (std::size_t k = 0; k < n; ++k) {
    state.nodes.push_back({system_.index.id(k),
                           Twist::from_vector(x.segment<6>(system_.index.deflection_column(k))),
                           Wrench::from_vector(x.segment<6>(system_.index.wrench_column(k)))});
  }
  state.ee_deflection = state.nodes[ee_node_].deflection;
  state.ee_wrench = Wrench::from_vector(system_.matrix.middleRows(ee_row_, 6) * x);
  return state;
}

FullState StiffnessAnalysis::solve_prescribed_deflection(const Twist& dt_e) const {
  const Eigen::VectorXd y =
      reduced_.solve(partition_.rhs - partition_.coupling * dt_e.vector()).col(0);
  Eigen::VectorXd x(system_.size());
  for (std::size_t k = 0; k < partition_.reduced_columns.size(); ++k) {
    x(partition_.reduced_columns[k]) = y(static_cast<Eigen::Index>(k));
  }
  x.segment<6>(system_.index.deflection_column(ee_node_)) = dt_e.vector();
  std::vector<std::string> warnings = warnings_;
  if (reduced_.ill_conditioned()) warnings.push_back("reduced system is ill-conditioned");
  return state_from_solution(x, std::move(warnings));
}

Eigen::VectorXd StiffnessAnalysis::full_rhs(const Wrench& w_e) const {
  Eigen::VectorXd rhs = system_.rhs;
  rhs.segment<6>(ee_row_) = w_e.vector();
  return rhs;
}

const FactorizedSystem& StiffnessAnalysis::full() const {
  if (!full_) {
    const std::size_t n = system_.index.node_count();
    std::vector<std::string> labels;
    std::vector<bool> deflection;
    for (Eigen::Index c = 0; c < system_.size(); ++c) {
      labels.push_back(system_.index.column_label(c));
      deflection.push_back(c < 6 * static_cast<Eigen::Index>(n));
    }
    full_ = std::make_unique<FactorizedSystem>(Eigen::SparseMatrix<double>(system_.matrix),
                                               system_.column_scale(), std::move(labels),
                                               std::move(deflection), options_, "global system");
  }
  return *full_;
}

FullState StiffnessAnalysis::solve_applied_wrench(const Wrench& w_e) const {
  if (!reduced_.singular()) {
    const StiffnessResult k = stiffness();
    if (k.free_directions.cols() > 0) {
      std::vector<std::string> labels{"dx", "dy", "dz", "rx", "ry", "rz"};
      std::ostringstream msg;
      msg << "Cartesian stiffness is singular: the end effector moves freely along "
          << k.free_directions.cols() << " direction(s); first: "
          << describe_vector(k.free_directions.col(0), labels);
      throw SingularSystemError(msg.str(), SingularSystemError::Kind::cartesian,
                                k.free_directions, std::move(labels));
    }
    const Vector6 dt = k.stiffness.partialPivLu().solve(w_e.vector() - k.offset.vector());
    FullState state = solve_prescribed_deflection(Twist::from_vector(dt));
    state.warnings = k.warnings;
    return state;
  }
  const FactorizedSystem& a = full();
  const Eigen::VectorXd x = a.solve(full_rhs(w_e)).col(0);
  std::vector<std::string> warnings = warnings_;
  warnings.push_back(
      "reduced system M is singular; solved the global system under the applied wrench instead");
  return state_from_solution(x, std::move(warnings));
}

Matrix6 StiffnessAnalysis::cartesian_compliance() const {
  const FactorizedSystem& a = full();
  Eigen::MatrixXd rhs(system_.size(), 7);
  for (int k = 0; k < 7; ++k) rhs.col(k) = system_.rhs;
  for (int k = 0; k < 6; ++k) {
    rhs.col(k).segment<6>(ee_row_) = Vector6::Unit(k);
  }
  rhs.col(6).segment<6>(ee_row_).setZero();
  const Eigen::MatrixXd x = a.solve(rhs);
  const Eigen::Index col = system_.index.deflection_column(ee_node_);
  Matrix6 c;
  for (int k = 0; k < 6; ++k) c.col(k) = x.col(k).segment<6>(col) - x.col(6).segment<6>(col);
  return c;
}

std::vector<Reaction> StiffnessAnalysis::support_reactions(const FullState& state) const {
  std::vector<Reaction> out;
  for (const auto& s : model_.supports) {
    const std::size_t k = system_.index.node(s.node);
    out.push_back({s.node, Wrench::from_vector(state.solution.segment<6>(system_.index.wrench_column(k)))});
  }
  return out;
}

double StiffnessAnalysis::equilibrium_residual(const FullState& state) const {
  const Eigen::VectorXd rhs = full_rhs(state.ee_wrench);
  const Eigen::VectorXd r = system_.matrix * state.solution - rhs;
  double worst = 0.0;
  for (Eigen::Index k = 0; k < r.size(); ++k) {
    worst = std::max(worst, std::abs(r(k)) / (1.0 + std::abs(rhs(k))));
  }
  return worst;
}

Eigen::MatrixXd cartesian_free_directions(const Matrix6& kc, double length,
                                          double relative_tolerance) {
  Vector6 t;
  t << length, length, length, 1.0, 1.0, 1.0;
  const Matrix6 scaled = t.asDiagonal() * kc * t.asDiagonal();
  const Eigen::JacobiSVD<Matrix6> svd(scaled, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < 6; ++k) {
    if (s(k) > relative_tolerance * s(0)) ++rank;
  }
  Eigen::MatrixXd basis = t.asDiagonal() * svd.matrixV().rightCols(6 - rank);
  for (Eigen::Index k = 0; k < basis.cols(); ++k) {
    basis.col(k).normalize();
    // Deterministic sign: largest component positive.
    Eigen::Index j = 0;
    basis.col(k).cwiseAbs().maxCoeff(&j);
    if (basis(j, k) < 0.0) basis.col(k) *= -1.0;
  }
  return basis;
}

StiffnessResult cartesian_stiffness(const ManipulatorModel& model, const SolverOptions& options) {
  return StiffnessAnalysis(model, options).stiffness();
}

FullState solve_prescribed_deflection(const ManipulatorModel& model, const Twist& dt_e,
                                      const SolverOptions& options) {
  return StiffnessAnalysis(model, options).solve_prescribed_deflection(dt_e);
}

FullState solve_applied_wrench(const ManipulatorModel& model, const Wrench& w_e,
                               const SolverOptions& options) {
  return StiffnessAnalysis(model, options).solve_applied_wrench(w_e);
}

Matrix6 cartesian_compliance(const ManipulatorModel& model, const SolverOptions& options) {
  return StiffnessAnalysis(model, options).cartesian_compliance();
}

std::vector<Reaction> support_reactions(const FullState& state, const ManipulatorModel& model) {
  std::vector<Reaction> out;
  for (const auto& s : model.supports) {
    for (const auto& n : state.nodes) {
      if (n.id == s.node) out.push_back({s.node, n.wrench});
    }
  }
  return out;
}

double equilibrium_residual(const FullState& state, const ManipulatorModel& model) {
  const GlobalSystem system = assemble(model);
  const std::size_t ee = system.index.node(model.end_effector);
  Eigen::VectorXd rhs = system.rhs;
  rhs.segment<6>(*system.balance_rows[ee]) = state.ee_wrench.vector();
  const Eigen::VectorXd r = system.matrix * state.solution - rhs;
  double worst = 0.0;
  for (Eigen::Index k = 0; k < r.size(); ++k) {
    worst = std::max(worst, std::abs(r(k)) / (1.0 + std::abs(rhs(k))));
  }
  return worst;
}

}  // namespace msa

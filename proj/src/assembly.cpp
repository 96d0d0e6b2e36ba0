#include "msa/assembly.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>

#include "msa/errors.hpp"

namespace msa {

VariableIndex::VariableIndex(const ManipulatorModel& model) {
  ids_.reserve(model.nodes.size());
  for (const auto& n : model.nodes) ids_.push_back(n.id);
}

std::size_t VariableIndex::node(const std::string& id) const {
  const auto it = std::find(ids_.begin(), ids_.end(), id);
  if (it == ids_.end()) throw ModelError("unknown node '" + id + "'", id);
  return static_cast<std::size_t>(it - ids_.begin());
}

std::string VariableIndex::column_label(Eigen::Index column) const {
  static const char* deflection[] = {"dx", "dy", "dz", "rx", "ry", "rz"};
  static const char* wrench[] = {"fx", "fy", "fz", "mx", "my", "mz"};
  const auto n = static_cast<Eigen::Index>(ids_.size());
  const Eigen::Index block = column / 6;
  const Eigen::Index comp = column % 6;
  if (block < n) return "dt[" + ids_[block] + "]." + deflection[comp];
  return "W[" + ids_[block - n] + "]." + wrench[comp];
}

VariableIndex index_variables(const ManipulatorModel& model) { return VariableIndex(model); }

std::string GlobalSystem::describe_row(Eigen::Index row) const {
  for (const auto& g : groups) {
    if (row >= g.first && row < g.first + g.count) {
      return g.source + " " + g.role + " row " + std::to_string(row - g.first);
    }
  }
  return "row " + std::to_string(row);
}

Eigen::VectorXd GlobalSystem::column_scale() const {
  const double l0 = characteristic_length;
  const double k0 = characteristic_stiffness;
  const Eigen::Index n = static_cast<Eigen::Index>(index.node_count());
  Eigen::VectorXd s(12 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    s.segment<3>(6 * k).setConstant(l0);
    s.segment<3>(6 * k + 3).setConstant(1.0);
    s.segment<3>(6 * (n + k)).setConstant(k0 * l0);
    s.segment<3>(6 * (n + k) + 3).setConstant(k0 * l0 * l0);
  }
  return s;
}

namespace {

class RowInserter {
 public:
  RowInserter(GlobalSystem& system, std::vector<Eigen::Triplet<double>>& triplets,
              std::vector<double>& rhs)
      : system_(system), triplets_(triplets), rhs_(rhs) {}

  /// Appends the rows of `eq`, mapping slot k to `nodes[k]`. Returns the first
  /// global row index.
  Eigen::Index insert(const EquationRows& eq, const std::vector<std::size_t>& nodes,
                      const std::string& source) {
    const auto first = static_cast<Eigen::Index>(rhs_.size());
    for (std::size_t v = 0; v < eq.variables.size(); ++v) {
      const auto& var = eq.variables[v];
      const Eigen::Index col0 = system_.index.column(nodes.at(var.slot), var.quantity);
      for (Eigen::Index r = 0; r < eq.rows(); ++r) {
        for (Eigen::Index c = 0; c < 6; ++c) {
          const double a = eq.coefficients(r, 6 * static_cast<Eigen::Index>(v) + c);
          if (a != 0.0) triplets_.emplace_back(first + r, col0 + c, a);
        }
      }
    }
    for (Eigen::Index r = 0; r < eq.rows(); ++r) rhs_.push_back(eq.rhs(r));
    for (const auto& seg : eq.segments) {
      system_.groups.push_back({source, seg.role, first + seg.first, seg.count});
    }
    if (eq.balance_row) {
      for (const auto node : nodes) system_.balance_rows[node] = first + *eq.balance_row;
    }
    return first;
  }

 private:
  GlobalSystem& system_;
  std::vector<Eigen::Triplet<double>>& triplets_;
  std::vector<double>& rhs_;
};

}  // namespace

GlobalSystem assemble(const ManipulatorModel& model) {
  const ValidationReport report = validate(model);
  if (!report.ok()) {
    const auto& first = report.errors.front();
    throw ModelError("model failed validation (" + std::to_string(report.errors.size()) +
                         " error(s)); first: [" + first.code + "] " + first.message,
                     first.entity);
  }

  GlobalSystem system{VariableIndex(model), {}, {}, {}, {}, {}, 1.0, 1.0};
  const std::size_t n = system.index.node_count();
  system.balance_rows.assign(n, std::nullopt);
  system.supported.assign(n, false);

  if (n > 0) {
    Vector3 lo = model.nodes.front().position;
    Vector3 hi = lo;
    for (const auto& node : model.nodes) {
      lo = lo.cwiseMin(node.position);
      hi = hi.cwiseMax(node.position);
    }
    const double diagonal = (hi - lo).norm();
    if (diagonal > 0.0) system.characteristic_length = diagonal;
  }
  double k0 = 0.0;
  for (const auto& link : model.links) {
    if (const auto* f = std::get_if<FlexibleLink>(&link)) {
      k0 = std::max(k0, f->K.cwiseAbs().maxCoeff());
    }
  }
  if (k0 == 0.0) {
    for (const auto& j : model.joints) {
      if (j.stiffness.size()) k0 = std::max(k0, j.stiffness.cwiseAbs().maxCoeff());
    }
    for (const auto& s : model.supports) {
      if (s.stiffness.size()) k0 = std::max(k0, s.stiffness.cwiseAbs().maxCoeff());
    }
  }
  if (k0 > 0.0) system.characteristic_stiffness = k0;

  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<double> rhs;
  RowInserter rows(system, triplets, rhs);

  for (const auto& link : model.links) {
    const std::vector<std::size_t> nodes{system.index.node(link_node_i(link)),
                                         system.index.node(link_node_j(link))};
    const std::string source = "link '" + link_id(link) + "'";
    if (const auto* f = std::get_if<FlexibleLink>(&link)) {
      rows.insert(flexible_link_rows(*f), nodes, source);
    } else {
      rows.insert(rigid_link_rows(std::get<RigidLink>(link)), nodes, source);
    }
  }

  for (const auto& joint : model.joints) {
    std::vector<std::size_t> nodes;
    std::vector<Vector3> positions;
    for (const auto& id : joint.nodes) {
      nodes.push_back(system.index.node(id));
      positions.push_back(model.node(id).position);
    }
    rows.insert(joint_rows(joint, positions), nodes, "joint '" + joint.id + "'");
  }

  for (const auto& support : model.supports) {
    const std::size_t node = system.index.node(support.node);
    system.supported[node] = true;
    rows.insert(support_rows(support), {node}, "support@" + support.node);
  }

  for (const auto& load : model.loads) {
    const std::size_t node = system.index.node(load.node);
    if (system.balance_rows[node]) {
      // Load attached to a joint: it enters the joint's node balance.
      const Eigen::Index first = *system.balance_rows[node];
      for (Eigen::Index c = 0; c < 6; ++c) {
        rhs[static_cast<std::size_t>(first + c)] += load.wrench.vector()(c);
      }
    } else {
      rows.insert(external_load_rows(1, load.wrench), {node}, "load@" + load.node);
    }
  }

  const auto size = static_cast<Eigen::Index>(rhs.size());
  if (size != system.index.column_count()) {
    throw ModelError("assembled " + std::to_string(size) + " equations for " +
                     std::to_string(system.index.column_count()) + " unknowns");
  }
  system.matrix.resize(size, size);
  system.matrix.setFromTriplets(triplets.begin(), triplets.end());
  system.rhs = Eigen::Map<const Eigen::VectorXd>(rhs.data(), size);
  return system;
}

PartitionedSystem partition(const GlobalSystem& system, const std::string& end_effector) {
  const std::size_t ee = system.index.node(end_effector);
  if (system.supported[ee]) {
    throw ModelError("end effector '" + end_effector + "' carries a support", end_effector);
  }
  if (!system.balance_rows[ee]) {
    throw ModelError("no load rows found at end effector '" + end_effector + "'", end_effector);
  }
  const Eigen::Index ee_row = *system.balance_rows[ee];
  const Eigen::Index ee_col = system.index.deflection_column(ee);
  const Eigen::Index size = system.size();
  const auto n = static_cast<Eigen::Index>(system.index.node_count());

  PartitionedSystem p;
  for (Eigen::Index r = 0; r < size; ++r) {
    if (r >= ee_row && r < ee_row + 6) {
      p.extraction_rows.push_back(r);
    } else {
      p.reduced_rows.push_back(r);
    }
  }
  for (Eigen::Index c = 6 * n; c < 12 * n; ++c) p.reduced_columns.push_back(c);
  for (Eigen::Index c = 0; c < 6 * n; ++c) {
    if (c >= ee_col && c < ee_col + 6) {
      p.end_effector_columns.push_back(c);
    } else {
      p.reduced_columns.push_back(c);
    }
  }

  // Original column -> (is end-effector, position in its block).
  std::vector<Eigen::Index> column_slot(static_cast<std::size_t>(size), -1);
  for (std::size_t k = 0; k < p.reduced_columns.size(); ++k) {
    column_slot[p.reduced_columns[k]] = static_cast<Eigen::Index>(k);
  }
  std::vector<Eigen::Index> row_slot(static_cast<std::size_t>(size), -1);
  for (std::size_t k = 0; k < p.reduced_rows.size(); ++k) {
    row_slot[p.reduced_rows[k]] = static_cast<Eigen::Index>(k);
  }

  const Eigen::Index m = size - 6;
  std::vector<Eigen::Triplet<double>> reduced, coupling, extraction;
  for (Eigen::Index r = 0; r < size; ++r) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(system.matrix, r); it;
         ++it) {
      const Eigen::Index c = it.col();
      const bool ee_column = c >= ee_col && c < ee_col + 6;
      if (row_slot[r] >= 0) {
        if (ee_column) {
          coupling.emplace_back(row_slot[r], c - ee_col, it.value());
        } else {
          reduced.emplace_back(row_slot[r], column_slot[c], it.value());
        }
      } else {
        if (ee_column) {
          // Node balance rows never involve deflections.
          throw ModelError("end-effector balance rows depend on its deflection");
        }
        extraction.emplace_back(r - ee_row, column_slot[c], it.value());
      }
    }
  }
  p.reduced.resize(m, m);
  p.reduced.setFromTriplets(reduced.begin(), reduced.end());
  p.coupling.resize(m, 6);
  p.coupling.setFromTriplets(coupling.begin(), coupling.end());
  p.extraction.resize(6, m);
  p.extraction.setFromTriplets(extraction.begin(), extraction.end());
  p.rhs.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) p.rhs(k) = system.rhs(p.reduced_rows[k]);
  p.extraction_rhs = system.rhs.segment<6>(ee_row);
  return p;
}

void write_matrix_market(const GlobalSystem& system, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto precision = std::numeric_limits<double>::max_digits10;

  std::ofstream a(dir / "system.mtx");
  if (!a) throw std::runtime_error("cannot write " + (dir / "system.mtx").string());
  a << "%%MatrixMarket matrix coordinate real general\n";
  a << system.matrix.rows() << ' ' << system.matrix.cols() << ' ' << system.matrix.nonZeros()
    << '\n';
  a << std::setprecision(precision);
  for (Eigen::Index r = 0; r < system.matrix.outerSize(); ++r) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(system.matrix, r); it;
         ++it) {
      a << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
    }
  }

  std::ofstream b(dir / "rhs.mtx");
  if (!b) throw std::runtime_error("cannot write " + (dir / "rhs.mtx").string());
  b << "%%MatrixMarket matrix array real general\n";
  b << system.rhs.size() << " 1\n";
  b << std::setprecision(precision);
  for (Eigen::Index k = 0; k < system.rhs.size(); ++k) b << system.rhs(k) << '\n';
}

}  // namespace msa

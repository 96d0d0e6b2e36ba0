#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "msa/errors.hpp"
#include "msa/model_io.hpp"
#include "msa/solver.hpp"

namespace msa::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

const char* const kTwistLabels[] = {"dx", "dy", "dz", "rx", "ry", "rz"};

struct Options {
  std::string command;
  std::string model_path;
  std::string output = "text";
  std::string dump_dir;
  bool strict = false;
  std::vector<double> wrench;
  std::vector<double> deflection;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

unsigned thread_count() {
  const char* env = std::getenv("MSA_THREADS");
  if (!env) return 1;
  const std::string text(env);
  std::size_t used = 0;
  long value = 0;
  try {
    value = std::stol(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || value < 1) {
    throw UsageError("MSA_THREADS must be an integer >= 1 (got \"" + text + "\")");
  }
  return static_cast<unsigned>(std::min<long>(value, 256));
}

// Non-finite numbers become null in JSON; negative zero prints as 0.
ordered_json number(double v) {
  if (std::isfinite(v)) return v + 0.0;
  return nullptr;
}

ordered_json vector_json(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(number(v(k)));
  return a;
}

ordered_json matrix_json(const Eigen::MatrixXd& m) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vector_json(m.row(r).transpose()));
  return a;
}

ordered_json twist_json(const Twist& t) {
  return {{"translation", vector_json(t.dp)}, {"rotation", vector_json(t.dphi)}};
}

ordered_json wrench_json(const Wrench& w) {
  return {{"force", vector_json(w.f)}, {"moment", vector_json(w.m)}};
}

ordered_json summary_json(const ManipulatorModel& model, const ValidationReport& report) {
  return {{"nodes", model.nodes.size()},         {"links", model.links.size()},
          {"joints", model.joints.size()},       {"supports", model.supports.size()},
          {"loads", model.loads.size()},         {"end_effector", model.end_effector},
          {"equations", report.equation_count},  {"unknowns", report.unknown_count}};
}

class TextWriter {
 public:
  explicit TextWriter(std::ostream& out) : out_(out) {
    out_ << std::setprecision(std::numeric_limits<double>::max_digits10);
  }

  void vector(const std::string& name, const Eigen::VectorXd& v) {
    out_ << name << ":";
    for (Eigen::Index k = 0; k < v.size(); ++k) out_ << ' ' << v(k) + 0.0;
    out_ << '\n';
  }

  void matrix(const std::string& name, const Eigen::MatrixXd& m) {
    out_ << name << ":\n";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      out_ << " ";
      for (Eigen::Index c = 0; c < m.cols(); ++c) out_ << ' ' << m(r, c) + 0.0;
      out_ << '\n';
    }
  }

  std::ostream& raw() { return out_; }

 private:
  std::ostream& out_;
};

void print_summary(std::ostream& out, const ManipulatorModel& model,
                   const ValidationReport& report) {
  out << "model: " << model.nodes.size() << " nodes, " << model.links.size() << " links, "
      << model.joints.size() << " joints, " << model.supports.size() << " supports, "
      << model.loads.size() << " loads; end effector " << model.end_effector << '\n';
  out << "equations: " << report.equation_count << ", unknowns: " << report.unknown_count
      << '\n';
}

ordered_json singular_json(const SingularSystemError& e) {
  const char* kind = e.kind() == SingularSystemError::Kind::mobility          ? "mobility"
                     : e.kind() == SingularSystemError::Kind::rigid_direction ? "rigid_direction"
                                                                              : "cartesian";
  ordered_json directions = ordered_json::array();
  for (Eigen::Index k = 0; k < e.basis().cols(); ++k) {
    ordered_json entries = ordered_json::object();
    for (Eigen::Index r = 0; r < e.basis().rows(); ++r) {
      if (std::abs(e.basis()(r, k)) > 1e-9) {
        entries[e.labels()[static_cast<std::size_t>(r)]] = e.basis()(r, k);
      }
    }
    directions.push_back(entries);
  }
  return {{"error", {{"kind", kind}, {"message", e.what()}, {"null_space", directions}}}};
}

void print_singular(std::ostream& out, const SingularSystemError& e, bool json) {
  if (json) {
    out << singular_json(e).dump(2) << '\n';
    return;
  }
  TextWriter w(out);
  out << "singular system: " << e.what() << '\n';
  for (Eigen::Index k = 0; k < e.basis().cols(); ++k) {
    out << "null direction " << k + 1 << ":";
    for (Eigen::Index r = 0; r < e.basis().rows(); ++r) {
      if (std::abs(e.basis()(r, k)) > 1e-9) {
        out << ' ' << e.labels()[static_cast<std::size_t>(r)] << '=' << e.basis()(r, k);
      }
    }
    out << '\n';
  }
}

void print_warnings(std::ostream& err, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

int cmd_validate(const Options& opt, std::ostream& out) {
  const ManipulatorModel model = load_model(opt.model_path);
  const ValidationReport report = validate(model);
  if (opt.output == "json") {
    ordered_json doc;
    doc["model"] = summary_json(model, report);
    doc["valid"] = report.ok();
    for (const auto* list : {&report.errors, &report.warnings}) {
      ordered_json items = ordered_json::array();
      for (const auto& issue : *list) {
        items.push_back({{"code", issue.code}, {"entity", issue.entity}, {"message", issue.message}});
      }
      doc[list == &report.errors ? "errors" : "warnings"] = items;
    }
    out << doc.dump(2) << '\n';
  } else {
    print_summary(out, model, report);
    for (const auto& issue : report.errors) {
      out << "error [" << issue.code << "] " << issue.entity << ": " << issue.message << '\n';
    }
    for (const auto& issue : report.warnings) {
      out << "warning [" << issue.code << "] " << issue.entity << ": " << issue.message << '\n';
    }
    out << (report.ok() ? "valid" : "invalid") << '\n';
  }
  return report.ok() ? kOk : kValidationError;
}

int cmd_stiffness(const Options& opt, const SolverOptions& solver, std::ostream& out,
                  std::ostream& err) {
  const ManipulatorModel model = load_model(opt.model_path);
  const ValidationReport report = validate(model);
  const StiffnessAnalysis analysis(model, solver);
  if (!opt.dump_dir.empty()) write_matrix_market(analysis.system(), opt.dump_dir);
  if (analysis.reduced().singular()) {
    const SingularSystemError& e = *analysis.reduced().failure();
    std::optional<Matrix6> compliance;
    if (e.kind() == SingularSystemError::Kind::rigid_direction) {
      // Kc is unbounded, but the compliance can still be finite.
      try {
        compliance = analysis.cartesian_compliance();
      } catch (const SingularSystemError&) {
      }
    }
    if (opt.output == "json") {
      ordered_json doc = singular_json(e);
      if (compliance) doc["compliance"] = matrix_json(*compliance);
      out << doc.dump(2) << '\n';
    } else {
      print_singular(out, e, false);
      if (compliance) TextWriter(out).matrix("compliance (Kc^-1)", *compliance);
    }
    err << "error: " << e.what() << '\n';
    return kSingularSystem;
  }
  const StiffnessResult result = analysis.stiffness();
  const bool mobile = result.free_directions.cols() > 0;
  // 1 / diag(Kc^-1): stiffness along each axis with the other components free.
  const Vector6 effective =
      mobile ? Vector6::Zero() : Vector6(result.stiffness.inverse().diagonal().cwiseInverse());

  if (opt.output == "json") {
    ordered_json doc;
    doc["model"] = summary_json(model, report);
    doc["stiffness"] = matrix_json(result.stiffness);
    doc["offset"] = wrench_json(result.offset);
    doc["effective_stiffness"] = mobile ? ordered_json(nullptr) : vector_json(effective);
    doc["condition_estimate"] = number(result.condition_estimate);
    ordered_json free = ordered_json::array();
    for (Eigen::Index k = 0; k < result.free_directions.cols(); ++k) {
      free.push_back(vector_json(result.free_directions.col(k)));
    }
    doc["free_directions"] = free;
    doc["warnings"] = result.warnings;
    out << doc.dump(2) << '\n';
  } else {
    TextWriter w(out);
    print_summary(out, model, report);
    w.matrix("Kc", result.stiffness);
    w.vector("W_offset", result.offset.vector());
    if (!mobile) w.vector("effective stiffness (1/diag Kc^-1)", effective);
    out << "condition estimate: " << result.condition_estimate << '\n';
    for (Eigen::Index k = 0; k < result.free_directions.cols(); ++k) {
      out << "free direction " << k + 1 << ":";
      for (int r = 0; r < 6; ++r) out << ' ' << kTwistLabels[r] << '=' << result.free_directions(r, k);
      out << '\n';
    }
  }
  print_warnings(err, result.warnings);
  if (mobile) {
    err << "error: Cartesian stiffness is singular; the end effector is mobile along "
        << result.free_directions.cols() << " direction(s)\n";
    return kSingularSystem;
  }
  if (opt.strict && analysis.reduced().ill_conditioned()) {
    err << "error: condition estimate exceeds " << solver.condition_gate << " (--strict)\n";
    return kIllConditioned;
  }
  return kOk;
}

int cmd_solve(const Options& opt, const SolverOptions& solver, std::ostream& out,
              std::ostream& err) {
  const ManipulatorModel model = load_model(opt.model_path);
  const ValidationReport report = validate(model);
  const StiffnessAnalysis analysis(model, solver);
  FullState state;
  if (!opt.wrench.empty()) {
    try {
      state = analysis.solve_applied_wrench(
          Wrench::from_vector(Eigen::Map<const Vector6>(opt.wrench.data())));
    } catch (const SingularSystemError& e) {
      if (e.kind() != SingularSystemError::Kind::cartesian) throw;
      print_singular(out, e, opt.output == "json");
      err << "error: " << e.what() << '\n';
      return kSingularStiffness;
    }
  } else {
    state = analysis.solve_prescribed_deflection(
        Twist::from_vector(Eigen::Map<const Vector6>(opt.deflection.data())));
  }
  const auto reactions = analysis.support_reactions(state);
  const double residual = analysis.equilibrium_residual(state);

  if (opt.output == "json") {
    ordered_json doc;
    doc["model"] = summary_json(model, report);
    doc["mode"] = opt.wrench.empty() ? "deflection" : "wrench";
    doc["end_effector"] = {{"node", model.end_effector},
                           {"deflection", twist_json(state.ee_deflection)},
                           {"wrench", wrench_json(state.ee_wrench)}};
    ordered_json nodes = ordered_json::array();
    for (const auto& n : state.nodes) {
      nodes.push_back({{"id", n.id},
                       {"deflection", twist_json(n.deflection)},
                       {"wrench", wrench_json(n.wrench)}});
    }
    doc["nodes"] = nodes;
    ordered_json supports = ordered_json::array();
    for (const auto& r : reactions) {
      supports.push_back({{"node", r.node}, {"reaction", wrench_json(r.wrench)}});
    }
    doc["reactions"] = supports;
    doc["equilibrium_residual"] = number(residual);
    doc["condition_estimate"] = number(analysis.reduced().condition_estimate());
    doc["warnings"] = state.warnings;
    out << doc.dump(2) << '\n';
  } else {
    TextWriter w(out);
    print_summary(out, model, report);
    out << "end effector " << model.end_effector << '\n';
    w.vector("  deflection", state.ee_deflection.vector());
    w.vector("  wrench", state.ee_wrench.vector());
    for (const auto& n : state.nodes) {
      out << "node " << n.id << '\n';
      w.vector("  deflection", n.deflection.vector());
      w.vector("  wrench", n.wrench.vector());
    }
    for (const auto& r : reactions) w.vector("reaction " + r.node, r.wrench.vector());
    out << "equilibrium residual: " << residual << '\n';
    out << "condition estimate: " << analysis.reduced().condition_estimate() << '\n';
  }
  print_warnings(err, state.warnings);
  if (opt.strict && analysis.reduced().ill_conditioned()) {
    err << "error: condition estimate exceeds " << solver.condition_gate << " (--strict)\n";
    return kIllConditioned;
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Matrix structural analysis of manipulator stiffness", "msa"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("model", opt.model_path, "Model file (JSON)")->required();
    sub->add_option("--output", opt.output, "Output format")
        ->check(CLI::IsMember({"json", "text"}));
  };

  CLI::App* validate_cmd = app.add_subcommand("validate", "Check a model and count equations");
  add_common(validate_cmd);

  CLI::App* stiffness_cmd =
      app.add_subcommand("stiffness", "Cartesian stiffness matrix at the end effector");
  add_common(stiffness_cmd);
  stiffness_cmd->add_option("--dump-system", opt.dump_dir,
                            "Write the assembled system as Matrix Market files to this directory");
  stiffness_cmd->add_flag("--strict", opt.strict, "Fail when the system is ill-conditioned");

  CLI::App* solve_cmd = app.add_subcommand("solve", "Solve one load case");
  add_common(solve_cmd);
  auto* wrench = solve_cmd->add_option("--wrench", opt.wrench, "End-effector wrench fx fy fz mx my mz")
                     ->expected(6)
                     ->allow_extra_args(false);
  auto* deflection =
      solve_cmd->add_option("--deflection", opt.deflection, "End-effector twist dx dy dz rx ry rz")
          ->expected(6)
          ->allow_extra_args(false);
  wrench->excludes(deflection);
  solve_cmd->add_flag("--strict", opt.strict, "Fail when the system is ill-conditioned");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (solve_cmd->parsed() && opt.wrench.empty() && opt.deflection.empty()) {
      throw UsageError("solve needs exactly one of --wrench or --deflection");
    }
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  }

  const bool json = opt.output == "json";
  try {
    SolverOptions solver;
    solver.threads = thread_count();
    if (validate_cmd->parsed()) return cmd_validate(opt, out);
    if (stiffness_cmd->parsed()) return cmd_stiffness(opt, solver, out, err);
    return cmd_solve(opt, solver, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const SyntaxError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParseError;
  } catch (const ModelError& e) {
    err << "model error";
    if (!e.entity().empty()) err << " (" << e.entity() << ")";
    err << ": " << e.what() << '\n';
    return kValidationError;
  } catch (const SingularSystemError& e) {
    print_singular(out, e, json);
    err << "error: " << e.what() << '\n';
    return kSingularSystem;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  }
}

}  // namespace msa::cli

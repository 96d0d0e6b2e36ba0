#include "msa/model_io.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"

#include "msa/errors.hpp"

namespace msa {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw SyntaxError(path + ": " + what);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) schema_error(path, "unknown key \"" + key + "\"");
  }
}

const json& member(const json& obj, const std::string& path, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) schema_error(path, std::string("missing \"") + key + "\"");
  return *it;
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) schema_error(path, "expected a string");
  return v.get<std::string>();
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) schema_error(path, "expected a number");
  return v.get<double>();
}

std::vector<double> as_numbers(const json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    out.push_back(as_number(v[k], path + "[" + std::to_string(k) + "]"));
  }
  return out;
}

template <int N>
Eigen::Matrix<double, N, 1> fixed_vector(const json& v, const std::string& path) {
  const auto values = as_numbers(v, path);
  if (values.size() != N) schema_error(path, "expected " + std::to_string(N) + " numbers");
  return Eigen::Map<const Eigen::Matrix<double, N, 1>>(values.data());
}

// Matrix given either flat row-major or as an array of rows.
Eigen::MatrixXd row_major_matrix(const json& v, const std::string& path, Eigen::Index rows,
                                 Eigen::Index cols) {
  std::vector<double> values;
  if (v.is_array() && !v.empty() && v.front().is_array()) {
    for (std::size_t r = 0; r < v.size(); ++r) {
      const auto row = as_numbers(v[r], path + "[" + std::to_string(r) + "]");
      values.insert(values.end(), row.begin(), row.end());
    }
  } else {
    values = as_numbers(v, path);
  }
  if (values.size() != static_cast<std::size_t>(rows * cols)) {
    schema_error(path, "expected " + std::to_string(rows) + "x" + std::to_string(cols) +
                           " numbers in row-major order");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = values[r * cols + c];
  }
  return m;
}

Eigen::MatrixXd free_twists(const json& obj, const std::string& path) {
  const json& v = member(obj, path, "free_twists");
  if (!v.is_array()) schema_error(path + ".free_twists", "expected an array of 6-vectors");
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(v.size()), 6);
  for (std::size_t k = 0; k < v.size(); ++k) {
    rows.row(static_cast<Eigen::Index>(k)) =
        fixed_vector<6>(v[k], path + ".free_twists[" + std::to_string(k) + "]").transpose();
  }
  return rows;
}

struct Spring {
  Eigen::MatrixXd free;
  Eigen::MatrixXd stiffness;
  Eigen::VectorXd preload;
};

Spring spring(const json& obj, const std::string& path) {
  Spring s;
  s.free = free_twists(obj, path);
  const Eigen::Index e = s.free.rows();
  s.stiffness = row_major_matrix(member(obj, path, "stiffness"), path + ".stiffness", e, e);
  if (obj.contains("preload")) {
    const auto values = as_numbers(obj["preload"], path + ".preload");
    if (values.size() != static_cast<std::size_t>(e)) {
      schema_error(path + ".preload", "expected " + std::to_string(e) + " numbers");
    }
    s.preload = Eigen::Map<const Eigen::VectorXd>(values.data(), e);
  }
  return s;
}

std::vector<std::string> node_list(const json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected an array of node ids");
  std::vector<std::string> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    out.push_back(as_string(v[k], path + "[" + std::to_string(k) + "]"));
  }
  return out;
}

const json& array_member(const json& doc, const char* key, bool required) {
  static const json empty = json::array();
  const auto it = doc.find(key);
  if (it == doc.end()) {
    if (required) schema_error("$", std::string("missing \"") + key + "\"");
    return empty;
  }
  if (!it->is_array()) schema_error(std::string("$.") + key, "expected an array");
  return *it;
}

void read_link(ModelBuilder& b, const json& l, const std::string& path) {
  check_keys(l, path, {"id", "type", "nodes", "material", "section", "orientation_hint", "K"});
  const std::string id = as_string(member(l, path, "id"), path + ".id");
  const std::string type = as_string(member(l, path, "type"), path + ".type");
  const auto nodes = node_list(member(l, path, "nodes"), path + ".nodes");
  if (nodes.size() != 2) schema_error(path + ".nodes", "a link has exactly two nodes");

  if (type == "beam") {
    const json& m = member(l, path, "material");
    const std::string mp = path + ".material";
    check_keys(m, mp, {"E", "G"});
    const Material mat{as_number(member(m, mp, "E"), mp + ".E"),
                       as_number(member(m, mp, "G"), mp + ".G")};
    const json& s = member(l, path, "section");
    const std::string sp = path + ".section";
    check_keys(s, sp, {"A", "Iy", "Iz", "J"});
    const CrossSection sec{as_number(member(s, sp, "A"), sp + ".A"),
                           as_number(member(s, sp, "Iy"), sp + ".Iy"),
                           as_number(member(s, sp, "Iz"), sp + ".Iz"),
                           as_number(member(s, sp, "J"), sp + ".J")};
    std::optional<Vector3> hint;
    if (l.contains("orientation_hint")) {
      hint = fixed_vector<3>(l["orientation_hint"], path + ".orientation_hint");
    }
    b.beam(id, nodes[0], nodes[1], mat, sec, hint);
  } else if (type == "rigid") {
    b.rigid_link(id, nodes[0], nodes[1]);
  } else if (type == "custom") {
    const Matrix12 k = row_major_matrix(member(l, path, "K"), path + ".K", 12, 12);
    b.custom_link(id, nodes[0], nodes[1], k);
  } else {
    schema_error(path + ".type", "unknown link type \"" + type + "\"");
  }
}

void read_joint(ModelBuilder& b, const json& j, const std::string& path) {
  check_keys(j, path, {"id", "type", "nodes", "free_twists", "stiffness", "preload", "mode"});
  const std::string id = as_string(member(j, path, "id"), path + ".id");
  const std::string type = as_string(member(j, path, "type"), path + ".type");
  const auto nodes = node_list(member(j, path, "nodes"), path + ".nodes");
  auto pair = [&]() {
    if (nodes.size() != 2) schema_error(path + ".nodes", "a " + type + " joint has two nodes");
  };

  if (type == "rigid") {
    b.rigid_joint(id, nodes);
  } else if (type == "passive") {
    pair();
    b.passive_joint(id, nodes[0], nodes[1], free_twists(j, path));
  } else if (type == "elastic") {
    pair();
    const Spring s = spring(j, path);
    b.elastic_joint(id, nodes[0], nodes[1], s.free, s.stiffness, s.preload);
  } else if (type == "actuated") {
    pair();
    const std::string mode =
        j.contains("mode") ? as_string(j["mode"], path + ".mode") : std::string("locked");
    if (mode == "locked") {
      b.locked_actuator(id, nodes[0], nodes[1]);
    } else if (mode == "drive_stiffness") {
      const Spring s = spring(j, path);
      b.drive_actuator(id, nodes[0], nodes[1], s.free, s.stiffness, s.preload);
    } else {
      schema_error(path + ".mode", "unknown actuation mode \"" + mode + "\"");
    }
  } else {
    schema_error(path + ".type", "unknown joint type \"" + type + "\"");
  }
}

void read_support(ModelBuilder& b, const json& s, const std::string& path) {
  check_keys(s, path, {"node", "type", "free_twists", "stiffness", "preload"});
  const std::string node = as_string(member(s, path, "node"), path + ".node");
  const std::string type = as_string(member(s, path, "type"), path + ".type");
  if (type == "rigid") {
    b.rigid_support(node);
  } else if (type == "passive") {
    b.passive_support(node, free_twists(s, path));
  } else if (type == "elastic") {
    const Spring sp = spring(s, path);
    b.elastic_support(node, sp.free, sp.stiffness, sp.preload);
  } else {
    schema_error(path + ".type", "unknown support type \"" + type + "\"");
  }
}

std::pair<std::size_t, std::size_t> line_and_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

ManipulatorModel parse_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // e.byte is 1-based and points just past the offending character.
    const auto [line, column] = line_and_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw SyntaxError("line " + std::to_string(line) + ", column " + std::to_string(column) +
                          ": " + e.what(),
                      line, column);
  }

  check_keys(doc, "$",
             {"msa_version", "nodes", "links", "joints", "supports", "loads", "end_effector"});
  if (doc.contains("msa_version")) {
    const json& v = doc["msa_version"];
    if (!v.is_number_integer() || v.get<int>() != kModelFormatVersion) {
      schema_error("$.msa_version", "unsupported format version (expected 1)");
    }
  }

  ModelBuilder b;
  const json& nodes = array_member(doc, "nodes", true);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const std::string path = "$.nodes[" + std::to_string(k) + "]";
    check_keys(nodes[k], path, {"id", "position"});
    b.node(as_string(member(nodes[k], path, "id"), path + ".id"),
           fixed_vector<3>(member(nodes[k], path, "position"), path + ".position"));
  }
  const json& links = array_member(doc, "links", true);
  for (std::size_t k = 0; k < links.size(); ++k) {
    read_link(b, links[k], "$.links[" + std::to_string(k) + "]");
  }
  const json& joints = array_member(doc, "joints", false);
  for (std::size_t k = 0; k < joints.size(); ++k) {
    read_joint(b, joints[k], "$.joints[" + std::to_string(k) + "]");
  }
  const json& supports = array_member(doc, "supports", false);
  for (std::size_t k = 0; k < supports.size(); ++k) {
    read_support(b, supports[k], "$.supports[" + std::to_string(k) + "]");
  }
  const json& loads = array_member(doc, "loads", false);
  for (std::size_t k = 0; k < loads.size(); ++k) {
    const std::string path = "$.loads[" + std::to_string(k) + "]";
    check_keys(loads[k], path, {"node", "wrench"});
    b.load(as_string(member(loads[k], path, "node"), path + ".node"),
           Wrench::from_vector(fixed_vector<6>(member(loads[k], path, "wrench"), path + ".wrench")));
  }
  if (doc.contains("end_effector")) {
    b.end_effector(as_string(doc["end_effector"], "$.end_effector"));
  }
  return b.build();
}

ManipulatorModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SyntaxError("cannot read model file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_model(buffer.str());
}

}  // namespace msa

#include "mdpode/model_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mdpode/errors.hpp"

namespace mdpode {

namespace {

using json = nlohmann::json;
using Index = Eigen::Index;

const json& require(const json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end()) throw ParseError(std::string("model: missing field '") + key + "'");
  return *it;
}

std::vector<std::string> read_labels(const json& doc, const char* key) {
  const json& node = require(doc, key);
  if (!node.is_array() || node.empty()) {
    throw ParseError(std::string("model: '") + key + "' must be a nonempty array of strings");
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < node.size(); ++i) {
    if (!node[i].is_string()) {
      throw ParseError(std::string("model: ") + key + "[" + std::to_string(i) +
                       "] is not a string");
    }
    out.push_back(node[i].get<std::string>());
  }
  return out;
}

double read_number(const json& node, const std::string& where) {
  if (!node.is_number()) throw ParseError("model: " + where + " is not a number");
  const double v = node.get<double>();
  if (!std::isfinite(v)) throw ParseError("model: " + where + " is not finite");
  return v;
}

Matrix read_kernel(const json& doc, const char* key, std::size_t rows, std::size_t cols) {
  const json& node = require(doc, key);
  const std::string name(key);
  if (!node.is_array() || node.size() != rows) {
    throw ParseError("model: " + name + " must have " + std::to_string(rows) + " rows");
  }
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string row_name = name + "[" + std::to_string(i) + "]";
    if (!node[i].is_array() || node[i].size() != cols) {
      throw ParseError("model: " + row_name + " must have " + std::to_string(cols) + " entries");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      const std::string cell = row_name + "[" + std::to_string(j) + "]";
      const double v = read_number(node[i][j], cell);
      if (v < 0.0) throw ParseError("model: " + cell + " is negative");
      m(static_cast<Index>(i), static_cast<Index>(j)) = v;
      total += v;
    }
    if (std::abs(total - 1.0) > kFileRowSumTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "model: " << row_name << " sums to " << total << " (tolerance "
          << kFileRowSumTolerance << ")";
      throw ParseError(msg.str());
    }
  }
  return m;
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

KLModel parse_model_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::ostringstream msg;
    msg << "model: syntax error on line " << line_of(text, e.byte) << ": " << e.what();
    throw ParseError(msg.str());
  } catch (const json::exception& e) {
    // Out-of-range numbers such as 1e400.
    throw ParseError(std::string("model: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("model: top level must be an object");

  StateSpace space(read_labels(doc, "xu_labels"), read_labels(doc, "xn_labels"));
  const std::size_t d = space.size();
  Matrix q0 = read_kernel(doc, "Q0", d, space.size_n());
  Matrix r0 = read_kernel(doc, "R0", d, space.size_u());

  const json& u = require(doc, "utility");
  if (!u.is_array() || u.size() != d) {
    throw ParseError("model: utility must have " + std::to_string(d) + " entries");
  }
  Vector utility(static_cast<Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    utility(static_cast<Index>(i)) = read_number(u[i], "utility[" + std::to_string(i) + "]");
  }

  const json& ref = require(doc, "reference_state");
  std::size_t x0 = 0;
  if (ref.is_string()) {
    try {
      x0 = space.find(ref.get<std::string>());
    } catch (const ValidationError& e) {
      throw ParseError(std::string("model: reference_state: ") + e.what());
    }
  } else if (ref.is_number_unsigned()) {
    x0 = ref.get<std::size_t>();
    if (x0 >= d) throw ParseError("model: reference_state index out of range");
  } else {
    throw ParseError("model: reference_state must be \"xu,xn\" or a flat index");
  }

  return KLModel(std::move(space), NatureKernel(std::move(q0), kFileRowSumTolerance),
                 ControlKernel(std::move(r0), kFileRowSumTolerance), std::move(utility), x0);
}

KLModel load_model_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("cannot read model file '" + path.string() + "'");
  return parse_model_json(buf.str());
}

std::string model_to_json(const KLModel& model) {
  json doc;
  doc["xu_labels"] = model.space().xu_labels();
  doc["xn_labels"] = model.space().xn_labels();
  doc["Q0"] = matrix_to_json(model.q0().entries());
  doc["R0"] = matrix_to_json(model.r0().entries());
  doc["utility"] = std::vector<double>(model.utility().data(),
                                       model.utility().data() + model.utility().size());
  doc["reference_state"] = model.space().label(model.reference_state());
  return doc.dump(2);
}

KLModel symmetric_two_state_model() {
  Matrix q0 = Matrix::Ones(2, 1);
  Matrix r0 = Matrix::Constant(2, 2, 0.5);
  Vector utility(2);
  utility << 1.0, 0.0;
  return KLModel(StateSpace({"a", "b"}, {"0"}), NatureKernel(std::move(q0)),
                 ControlKernel(std::move(r0)), std::move(utility), 1);
}

}  // namespace mdpode

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>

#include <json.hpp>

#include "transferlab/bh.hpp"
#include "transferlab/commutative.hpp"

namespace transferlab {

using ordered_json = nlohmann::ordered_json;

enum class SystemKind { commutative, matrix, isometry };

inline std::string to_string(SystemKind k) {
  switch (k) {
    case SystemKind::commutative: return "commutative";
    case SystemKind::matrix: return "matrix";
    default: return "isometry";
  }
}

/// Payload of a "matrix" document: an explicit endomorphism of a block
/// algebra given by its coordinate matrix.
struct MatrixSystem {
  std::vector<int> blocks;
  Matrix endo;
};

/// A parsed input document describing one dynamical system.
struct SystemDocument {
  SystemKind kind = SystemKind::commutative;
  std::string label;
  std::variant<FiniteDynSystem, MatrixSystem, IsometryFamily> payload;

  const FiniteDynSystem& commutative() const { return std::get<FiniteDynSystem>(payload); }
  const MatrixSystem& matrix() const { return std::get<MatrixSystem>(payload); }
  const IsometryFamily& isometry() const { return std::get<IsometryFamily>(payload); }
};

/// An operator document: a raw coordinate matrix used as a transfer-operator
/// candidate or as a conditional expectation.
struct OperatorDocument {
  std::string label;
  Matrix matrix;
};

namespace doc {

/// Complex entries serialize as [re, im]; negative zero is canonicalized so
/// emitted documents do not drift on the sign of rounded-away parts.
inline ordered_json dump_complex(cplx z) {
  const double re = z.real() == 0.0 ? 0.0 : z.real();
  const double im = z.imag() == 0.0 ? 0.0 : z.imag();
  return ordered_json::array({re, im});
}

inline ordered_json dump_matrix(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(dump_complex(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline ordered_json dump_element(const AlgebraElement& a) {
  ordered_json blocks = ordered_json::array();
  for (int k = 0; k < a.algebra().num_blocks(); ++k) blocks.push_back(dump_matrix(a.block(k)));
  return blocks;
}

inline cplx parse_complex(const ordered_json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw input_error(where + ": complex entries must be [re, im] number pairs");
  return cplx(j[0].get<double>(), j[1].get<double>());
}

inline Matrix parse_matrix(const ordered_json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw input_error(where + ": expected a non-empty array of rows");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const ordered_json& row = j[i];
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      throw input_error(where + ": ragged rows at row " + std::to_string(i));
    for (int c = 0; c < cols; ++c)
      m(i, c) = parse_complex(row[c], where + "[" + std::to_string(i) + "][" + std::to_string(c) + "]");
  }
  return m;
}

inline const ordered_json& field(const ordered_json& j, const char* name, const std::string& where) {
  const auto it = j.find(name);
  if (it == j.end()) throw input_error(where + ": missing field \"" + name + "\"");
  return *it;
}

inline std::vector<int> parse_int_list(const ordered_json& j, const std::string& where) {
  if (!j.is_array()) throw input_error(where + ": expected an array of integers");
  std::vector<int> out;
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw input_error(where + ": expected an array of integers");
    out.push_back(v.get<int>());
  }
  return out;
}

}  // namespace doc

inline SystemDocument parse_system_document(const std::string& text, const Tolerance& tol = {}) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw input_error(std::string("document is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw input_error("document: expected a JSON object");
  if (doc::field(j, "schema", "document") != 1)
    throw input_error("document: unsupported schema version");

  SystemDocument out;
  out.label = doc::field(j, "label", "document").get<std::string>();
  const std::string kind = doc::field(j, "kind", "document").get<std::string>();
  const ordered_json& payload = doc::field(j, "payload", "document");

  if (kind == "commutative") {
    out.kind = SystemKind::commutative;
    FiniteDynSystem s;
    s.n_points = doc::field(payload, "points", "payload").get<int>();
    s.delta = doc::parse_int_list(doc::field(payload, "delta", "payload"), "payload.delta");
    s.gamma = doc::parse_int_list(doc::field(payload, "gamma", "payload"), "payload.gamma");
    for (int y : s.gamma)
      if (y < 0 || y >= s.n_points) throw input_error("payload.gamma: gamma image out of range");
    s.validate();
    out.payload = std::move(s);
  } else if (kind == "matrix") {
    out.kind = SystemKind::matrix;
    MatrixSystem m;
    m.blocks = doc::parse_int_list(doc::field(payload, "blocks", "payload"), "payload.blocks");
    m.endo = doc::parse_matrix(doc::field(payload, "endo", "payload"), "payload.endo");
    const BlockAlgebra alg(m.blocks);
    if (m.endo.rows() != alg.dim() || m.endo.cols() != alg.dim())
      throw input_error("payload.endo: matrix must be " + std::to_string(alg.dim()) + "x" +
                        std::to_string(alg.dim()) + " for the given blocks");
    out.payload = std::move(m);
  } else if (kind == "isometry") {
    out.kind = SystemKind::isometry;
    IsometryFamily f;
    f.n = doc::field(payload, "n", "payload").get<int>();
    f.d = doc::field(payload, "d", "payload").get<int>();
    f.D = payload.contains("D") ? payload["D"].get<int>() : f.n * f.d;
    if (f.n < 1 || f.d < 1 || f.D < f.n * f.d)
      throw input_error("payload: need n, d >= 1 and D >= n*d");
    const ordered_json& iso = doc::field(payload, "isometries", "payload");
    if (!iso.is_array() || static_cast<int>(iso.size()) != f.n)
      throw input_error("payload.isometries: expected " + std::to_string(f.n) + " matrices");
    for (int i = 0; i < f.n; ++i) {
      f.U.push_back(doc::parse_matrix(iso[i], "payload.isometries[" + std::to_string(i) + "]"));
      if (f.U.back().rows() != f.D || f.U.back().cols() != f.d)
        throw input_error("payload.isometries[" + std::to_string(i) + "]: expected a " +
                          std::to_string(f.D) + "x" + std::to_string(f.d) + " matrix");
    }
    double worst = 0.0;
    for (int i = 0; i < f.n; ++i)
      for (int j = 0; j < f.n; ++j) {
        Matrix g = f.U[i].adjoint() * f.U[j];
        if (i == j) g -= Matrix::identity(f.d);
        worst = std::max(worst, g.max_abs());
      }
    if (worst > tol.eq_tol)
      throw input_error("payload.isometries: ranges are not orthonormal (Gram residual " +
                        std::to_string(worst) + ")");
    f.validate(tol);
    out.payload = std::move(f);
  } else {
    throw input_error("document: unknown kind \"" + kind + "\"");
  }
  return out;
}

inline ordered_json emit_system_document(const SystemDocument& d) {
  ordered_json j;
  j["schema"] = 1;
  j["kind"] = to_string(d.kind);
  j["label"] = d.label;
  ordered_json payload;
  switch (d.kind) {
    case SystemKind::commutative: {
      const FiniteDynSystem& s = d.commutative();
      payload["points"] = s.n_points;
      payload["delta"] = s.delta;
      payload["gamma"] = s.gamma;
      break;
    }
    case SystemKind::matrix: {
      const MatrixSystem& m = d.matrix();
      payload["blocks"] = m.blocks;
      payload["endo"] = doc::dump_matrix(m.endo);
      break;
    }
    case SystemKind::isometry: {
      const IsometryFamily& f = d.isometry();
      payload["n"] = f.n;
      payload["d"] = f.d;
      payload["D"] = f.D;
      ordered_json iso = ordered_json::array();
      for (const Matrix& u : f.U) iso.push_back(doc::dump_matrix(u));
      payload["isometries"] = std::move(iso);
      break;
    }
  }
  j["payload"] = std::move(payload);
  return j;
}

inline OperatorDocument parse_operator_document(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw input_error(std::string("document is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw input_error("document: expected a JSON object");
  if (doc::field(j, "schema", "document") != 1)
    throw input_error("document: unsupported schema version");
  if (doc::field(j, "kind", "document") != "operator")
    throw input_error("document: expected kind \"operator\"");
  OperatorDocument out;
  out.label = doc::field(j, "label", "document").get<std::string>();
  out.matrix = doc::parse_matrix(doc::field(doc::field(j, "payload", "document"), "matrix", "payload"),
                                 "payload.matrix");
  return out;
}

inline ordered_json emit_operator_document(const std::string& label, const Matrix& m) {
  ordered_json j;
  j["schema"] = 1;
  j["kind"] = "operator";
  j["label"] = label;
  j["payload"] = ordered_json{{"matrix", doc::dump_matrix(m)}};
  return j;
}

/// The verified endomorphism described by a document.
inline OperatorMap endo_from_document(const SystemDocument& d, const Tolerance& tol = {}) {
  switch (d.kind) {
    case SystemKind::commutative: return endo_from_system(d.commutative(), tol);
    case SystemKind::matrix: {
      const MatrixSystem& m = d.matrix();
      const BlockAlgebra alg(m.blocks);
      return verify_star_homomorphism(OperatorMap(alg, alg, m.endo), tol);
    }
    default: return endo_from_isometries(d.isometry(), tol);
  }
}

}  // namespace transferlab

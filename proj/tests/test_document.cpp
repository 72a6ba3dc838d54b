#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>

#include <transferlab/document.hpp>

#include "systems.hpp"

using namespace transferlab;
using namespace testsys;

namespace {

std::string canonical(const std::string& text) {
  return emit_system_document(parse_system_document(text)).dump();
}

}  // namespace

TEST_CASE("commutative documents parse and reach a serialization fixed point") {
  const std::string text = R"({
    "schema": 1,
    "kind": "commutative",
    "label": "sys-a",
    "payload": {"points": 3, "delta": [0, 1, 2], "gamma": [0, 0, 2]}
  })";
  const SystemDocument d = parse_system_document(text);
  CHECK(d.kind == SystemKind::commutative);
  CHECK(d.label == "sys-a");
  CHECK(d.commutative().n_points == 3);
  CHECK(d.commutative().delta == std::vector<int>{0, 1, 2});
  CHECK(d.commutative().gamma == std::vector<int>{0, 0, 2});

  const std::string once = canonical(text);
  CHECK(canonical(once) == once);
}

TEST_CASE("matrix documents round-trip") {
  SystemDocument d;
  d.kind = SystemKind::matrix;
  d.label = "sys-d";
  d.payload = MatrixSystem{{2, 1}, sys_d_endo_matrix()};

  const std::string once = emit_system_document(d).dump();
  const SystemDocument back = parse_system_document(once);
  CHECK(back.kind == SystemKind::matrix);
  CHECK(back.matrix().blocks == std::vector<int>{2, 1});
  CHECK(distance_max_abs(back.matrix().endo, sys_d_endo_matrix()) == 0.0);
  CHECK(emit_system_document(back).dump() == once);
}

TEST_CASE("isometry documents round-trip") {
  SystemDocument d;
  d.kind = SystemKind::isometry;
  d.label = "sys-c";
  d.payload = sys_c();

  const std::string once = emit_system_document(d).dump();
  const SystemDocument back = parse_system_document(once);
  CHECK(back.kind == SystemKind::isometry);
  CHECK(back.isometry().n == 2);
  CHECK(back.isometry().d == 1);
  CHECK(back.isometry().D == 2);
  CHECK(emit_system_document(back).dump() == once);
}

TEST_CASE("floating-point entries survive serialization exactly") {
  Matrix m(1, 2);
  m(0, 0) = cplx(1.0 / 3.0, -std::sqrt(2.0));
  m(0, 1) = cplx(6.02214076e23, 1e-17);
  const Matrix back = doc::parse_matrix(doc::dump_matrix(m), "payload");
  CHECK(back(0, 0) == m(0, 0));
  CHECK(back(0, 1) == m(0, 1));
}

TEST_CASE("operator documents round-trip") {
  const ordered_json j = emit_operator_document("sys-a-lambda", Matrix{{cplx(0.3, 0.0), cplx(0.7, 0.0)}});
  const OperatorDocument d = parse_operator_document(j.dump());
  CHECK(d.label == "sys-a-lambda");
  CHECK(d.matrix(0, 1) == cplx(0.7, 0.0));
  CHECK(emit_operator_document(d.label, d.matrix).dump() == j.dump());
}

TEST_CASE("documents produce verified endomorphisms") {
  SystemDocument comm;
  comm.kind = SystemKind::commutative;
  comm.label = "a";
  comm.payload = sys_a();
  CHECK(map_distance(endo_from_document(comm), endo_from_system(sys_a())) == 0.0);

  SystemDocument mat;
  mat.kind = SystemKind::matrix;
  mat.label = "d";
  mat.payload = MatrixSystem{{2, 1}, sys_d_endo_matrix()};
  CHECK(map_distance(endo_from_document(mat), sys_d_endo()) == 0.0);

  SystemDocument iso;
  iso.kind = SystemKind::isometry;
  iso.label = "c";
  iso.payload = sys_c();
  const OperatorMap endo = endo_from_document(iso);
  CHECK(endo.flags().endomorphism);
  CHECK(corner_projection(endo).trace() == cplx(2.0, 0.0));
}

TEST_CASE("malformed documents are rejected with located messages") {
  using Catch::Matchers::ContainsSubstring;
  using Catch::Matchers::MessageMatches;

  CHECK_THROWS_MATCHES(parse_system_document("not json"), input_error,
                       MessageMatches(ContainsSubstring("not valid JSON")));
  CHECK_THROWS_MATCHES(parse_system_document("[1, 2]"), input_error,
                       MessageMatches(ContainsSubstring("expected a JSON object")));
  CHECK_THROWS_MATCHES(parse_system_document(R"({"schema": 2, "kind": "commutative", "label": "x", "payload": {}})"),
                       input_error, MessageMatches(ContainsSubstring("unsupported schema")));
  CHECK_THROWS_MATCHES(parse_system_document(R"({"schema": 1, "kind": "mystery", "label": "x", "payload": {}})"),
                       input_error, MessageMatches(ContainsSubstring("unknown kind")));
  CHECK_THROWS_MATCHES(parse_system_document(R"({"schema": 1, "kind": "commutative", "payload": {}})"),
                       input_error, MessageMatches(ContainsSubstring("missing field \"label\"")));
  CHECK_THROWS_MATCHES(
      parse_system_document(
          R"({"schema": 1, "kind": "commutative", "label": "x", "payload": {"points": 2, "delta": [0], "gamma": [5]}})"),
      input_error, MessageMatches(ContainsSubstring("gamma image out of range")));
  CHECK_THROWS_MATCHES(
      parse_system_document(
          R"({"schema": 1, "kind": "matrix", "label": "x", "payload": {"blocks": [1], "endo": [[[1, 0]], [[0, 0]]]}})"),
      input_error, MessageMatches(ContainsSubstring("matrix must be 1x1")));
  CHECK_THROWS_MATCHES(
      parse_system_document(
          R"({"schema": 1, "kind": "matrix", "label": "x", "payload": {"blocks": [2], "endo": [[[1, 0], [0, 0]], [[0, 0]]]}})"),
      input_error, MessageMatches(ContainsSubstring("ragged rows")));
  CHECK_THROWS_MATCHES(
      parse_system_document(
          R"({"schema": 1, "kind": "matrix", "label": "x", "payload": {"blocks": [1], "endo": [[1]]}})"),
      input_error, MessageMatches(ContainsSubstring("[re, im]")));

  const std::string iso_prefix = R"({"schema": 1, "kind": "isometry", "label": "x", "payload": )";
  CHECK_THROWS_MATCHES(
      parse_system_document(iso_prefix +
                            R"({"n": 2, "d": 1, "isometries": [[[[1.0, 0.0]]], [[[0.0, 1.0]]]]}})"),
      input_error, MessageMatches(ContainsSubstring("expected a 2x1 matrix")));
  CHECK_THROWS_MATCHES(
      parse_system_document(iso_prefix +
                            R"({"n": 2, "d": 1, "isometries": [[[[1.0, 0.0]], [[0.0, 0.0]]], [[[1.0, 0.0]], [[0.0, 0.0]]]]}})"),
      input_error,
      MessageMatches(ContainsSubstring("not orthonormal") && ContainsSubstring("Gram residual")));
  CHECK_THROWS_MATCHES(parse_system_document(iso_prefix + R"({"n": 2, "d": 1, "isometries": []}})"),
                       input_error, MessageMatches(ContainsSubstring("expected 2 matrices")));

  CHECK_THROWS_MATCHES(
      parse_operator_document(R"({"schema": 1, "kind": "commutative", "label": "x", "payload": {}})"),
      input_error, MessageMatches(ContainsSubstring("expected kind \"operator\"")));
  CHECK_THROWS_MATCHES(
      parse_operator_document(R"({"schema": 1, "kind": "operator", "label": "x", "payload": {"matrix": []}})"),
      input_error, MessageMatches(ContainsSubstring("non-empty array of rows")));
}

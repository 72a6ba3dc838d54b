#pragma once

#include <iomanip>
#include <optional>
#include <sstream>
#include <string>

#include "transferlab/bimodule.hpp"
#include "transferlab/document.hpp"

namespace transferlab {

struct AnalysisReport {
  std::string label;
  SystemKind kind = SystemKind::commutative;
  Tolerance tol;
  std::vector<int> domain_blocks;
  std::vector<int> codomain_blocks;

  std::vector<int> kernel_block_idx;
  AlgebraElement kernel_unit;
  std::vector<int> annihilator_block_idx;
  bool hereditary = false;

  std::optional<Matrix> complete_matrix;
  double complete_residual = 0.0;
  std::optional<bool> imprimitivity;
  double imprimitivity_residual = 0.0;
  std::string no_complete_reason;

  std::optional<int> parameter_dimension;
  std::optional<Section> section;  // commutative only

  // Present when a density was supplied for an isometry system.
  std::optional<Matrix> transfer_matrix;
  std::optional<double> transfer_norm_value;
  std::optional<double> coordinate_norm_estimate;
  std::optional<bool> nondegenerate;
  double transfer_residual = 0.0;
};

inline AnalysisReport run_analyze(const SystemDocument& d, const Tolerance& tol = {},
                                  const std::optional<DensityMatrix>& rho = {}) {
  AnalysisReport r;
  r.label = d.label;
  r.kind = d.kind;
  r.tol = tol;

  const OperatorMap endo = endo_from_document(d, tol);
  r.domain_blocks = endo.domain().block_dims();
  r.codomain_blocks = endo.codomain().block_dims();

  const IdealBlocks kernel = kernel_blocks(endo, tol);
  r.kernel_block_idx = kernel.blocks;
  r.kernel_unit = kernel.unit();
  r.annihilator_block_idx = kernel.complement().blocks;

  r.hereditary = is_hereditary_range(endo, tol);
  if (r.hereditary) {
    const TransferOperator ct = complete_transfer(endo, tol);
    r.complete_matrix = ct.map.matrix();
    r.complete_residual = ct.max_residual;
    const Correspondence c = build_correspondence(endo, tol);
    const LeftInner li = left_inner_from_transfer(c, ct, tol);
    const ImprimitivityReport imp = check_imprimitivity(c, li, tol);
    r.imprimitivity = imp.holds;
    r.imprimitivity_residual = imp.max_residual;
  } else {
    r.no_complete_reason = "range of the endomorphism is not hereditary";
  }

  switch (d.kind) {
    case SystemKind::commutative: {
      r.parameter_dimension = nondegenerate_parameter_space(d.commutative()).total_dimension;
      r.section = section_check(d.commutative());
      break;
    }
    case SystemKind::isometry: {
      const int n = d.isometry().n;
      r.parameter_dimension = n * n - 1;
      break;
    }
    case SystemKind::matrix:
      break;
  }

  if (rho) {
    if (d.kind != SystemKind::isometry)
      throw input_error("a density matrix only applies to isometry systems");
    const TransferOperator t = transfer_from_density(d.isometry(), *rho, tol);
    r.transfer_matrix = t.map.matrix();
    r.transfer_norm_value = transfer_norm(t);
    r.coordinate_norm_estimate = operator_norm_estimate(t.map.matrix());
    r.nondegenerate = t.nondegenerate;
    r.transfer_residual = t.max_residual;
  }
  return r;
}

struct VerifyReport {
  std::string system_label;
  std::string operator_label;
  bool transfer_ok = false;
  std::string failure;
  std::optional<PositivityKind> positivity;
  std::optional<bool> nondegenerate;
  double max_residual = 0.0;
};

inline VerifyReport run_verify(const SystemDocument& sd, const OperatorDocument& od,
                               const Tolerance& tol = {}) {
  const OperatorMap endo = endo_from_document(sd, tol);
  if (od.matrix.rows() != endo.domain().dim() || od.matrix.cols() != endo.codomain().dim())
    throw input_error("operator matrix must be " + std::to_string(endo.domain().dim()) + "x" +
                      std::to_string(endo.codomain().dim()) + " for this system");
  VerifyReport r;
  r.system_label = sd.label;
  r.operator_label = od.label;
  const OperatorMap cand(endo.codomain(), endo.domain(), od.matrix);
  try {
    const TransferOperator t = verify_transfer(endo, cand, tol);
    r.transfer_ok = true;
    r.positivity = t.positivity.kind;
    r.max_residual = t.max_residual;
    r.nondegenerate = is_nondegenerate(t, tol);
  } catch (const verification_error& e) {
    r.transfer_ok = false;
    r.failure = e.what();
  }
  return r;
}

namespace detail {

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

inline std::string format_complex(cplx z) {
  std::ostringstream os;
  os << std::setprecision(6) << z.real();
  if (z.imag() != 0.0) os << (z.imag() < 0 ? "-" : "+") << std::setprecision(6) << std::abs(z.imag()) << "i";
  return os.str();
}

inline std::string format_matrix_inline(const Matrix& m) {
  std::ostringstream os;
  os << "[";
  for (int i = 0; i < m.rows(); ++i) {
    if (i) os << "; ";
    for (int j = 0; j < m.cols(); ++j) {
      if (j) os << ", ";
      os << format_complex(m(i, j));
    }
  }
  os << "]";
  return os.str();
}

inline std::string format_element(const AlgebraElement& a) {
  std::ostringstream os;
  for (int k = 0; k < a.algebra().num_blocks(); ++k) {
    if (k) os << " + ";
    os << format_matrix_inline(a.block(k));
  }
  return os.str();
}

inline std::string format_int_set(const std::vector<int>& v) {
  std::ostringstream os;
  os << "{";
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) os << ", ";
    os << v[i];
  }
  os << "}";
  return os.str();
}

inline void human_line(std::ostream& os, const std::string& key, const std::string& value) {
  os << std::left << std::setw(22) << key << value << "\n";
}

}  // namespace detail

inline ordered_json machine_report(const AnalysisReport& r) {
  ordered_json j;
  j["schema"] = 1;
  j["command"] = "analyze";
  j["label"] = r.label;
  j["kind"] = to_string(r.kind);
  j["tolerance"] = ordered_json{{"eq_tol", r.tol.eq_tol}, {"psd_tol", r.tol.psd_tol}};
  j["algebra"] = ordered_json{{"domain_blocks", r.domain_blocks}, {"codomain_blocks", r.codomain_blocks}};
  j["kernel"] = ordered_json{{"blocks", r.kernel_block_idx}, {"unit", doc::dump_element(r.kernel_unit)}};
  j["annihilator"] = ordered_json{{"blocks", r.annihilator_block_idx}};
  j["hereditary"] = r.hereditary;
  j["complete"] = r.hereditary;
  if (r.complete_matrix) {
    j["complete_transfer"] = doc::dump_matrix(*r.complete_matrix);
    j["complete_residual"] = r.complete_residual;
    j["imprimitivity"] =
        ordered_json{{"holds", *r.imprimitivity}, {"residual", r.imprimitivity_residual}};
  } else {
    j["complete_reason"] = r.no_complete_reason;
  }
  j["parameter_dimension"] = r.parameter_dimension ? ordered_json(*r.parameter_dimension) : ordered_json(nullptr);
  if (r.section) {
    j["section"] = ordered_json{{"image", r.section->image_points}, {"fibers", r.section->phi}};
  }
  if (r.transfer_matrix) {
    j["transfer"] = ordered_json{{"matrix", doc::dump_matrix(*r.transfer_matrix)},
                                 {"norm", *r.transfer_norm_value},
                                 {"coordinate_norm_estimate", *r.coordinate_norm_estimate},
                                 {"nondegenerate", *r.nondegenerate},
                                 {"residual", r.transfer_residual}};
  }
  return j;
}

inline std::string human_report(const AnalysisReport& r) {
  std::ostringstream os;
  detail::human_line(os, "system", r.label + " (" + to_string(r.kind) + ")");
  detail::human_line(os, "domain blocks", detail::format_int_set(r.domain_blocks));
  detail::human_line(os, "codomain blocks", detail::format_int_set(r.codomain_blocks));
  detail::human_line(os, "kernel blocks", detail::format_int_set(r.kernel_block_idx));
  detail::human_line(os, "kernel unit", detail::format_element(r.kernel_unit));
  detail::human_line(os, "annihilator blocks", detail::format_int_set(r.annihilator_block_idx));
  detail::human_line(os, "hereditary range", r.hereditary ? "yes" : "no");
  detail::human_line(os, "complete transfer", r.hereditary ? "yes" : ("no (" + r.no_complete_reason + ")"));
  if (r.complete_matrix) {
    detail::human_line(os, "transfer map", detail::format_matrix_inline(*r.complete_matrix));
    detail::human_line(os, "transfer residual", detail::format_double(r.complete_residual));
    detail::human_line(os, "imprimitivity",
                       std::string(*r.imprimitivity ? "holds" : "fails") + " (residual " +
                           detail::format_double(r.imprimitivity_residual) + ")");
  }
  if (r.parameter_dimension)
    detail::human_line(os, "parameter dimension", std::to_string(*r.parameter_dimension));
  if (r.section) {
    std::ostringstream sec;
    for (size_t i = 0; i < r.section->image_points.size(); ++i) {
      if (i) sec << "  ";
      sec << r.section->image_points[i] << " <- "
          << detail::format_int_set(r.section->phi[i]);
    }
    detail::human_line(os, "section", r.section->image_points.empty() ? "(empty image)" : sec.str());
  }
  if (r.transfer_matrix) {
    detail::human_line(os, "transfer map", detail::format_matrix_inline(*r.transfer_matrix));
    detail::human_line(os, "transfer norm", detail::format_double(*r.transfer_norm_value));
    detail::human_line(os, "coordinate norm", detail::format_double(*r.coordinate_norm_estimate));
    detail::human_line(os, "non-degenerate", *r.nondegenerate ? "yes" : "no");
    detail::human_line(os, "transfer residual", detail::format_double(r.transfer_residual));
  }
  return os.str();
}

inline ordered_json machine_report(const VerifyReport& r) {
  ordered_json j;
  j["schema"] = 1;
  j["command"] = "verify";
  j["system"] = r.system_label;
  j["operator"] = r.operator_label;
  j["transfer"] = r.transfer_ok;
  j["failure"] = r.transfer_ok ? ordered_json(nullptr) : ordered_json(r.failure);
  j["positivity"] = r.positivity ? ordered_json(to_string(*r.positivity)) : ordered_json(nullptr);
  j["nondegenerate"] = r.nondegenerate ? ordered_json(*r.nondegenerate) : ordered_json(nullptr);
  j["max_residual"] = r.max_residual;
  return j;
}

inline std::string human_report(const VerifyReport& r) {
  std::ostringstream os;
  detail::human_line(os, "system", r.system_label);
  detail::human_line(os, "operator", r.operator_label);
  detail::human_line(os, "transfer axioms", r.transfer_ok ? "pass" : "FAIL");
  if (!r.transfer_ok) detail::human_line(os, "failure", r.failure);
  if (r.positivity) detail::human_line(os, "positivity", to_string(*r.positivity));
  if (r.nondegenerate) detail::human_line(os, "non-degenerate", *r.nondegenerate ? "yes" : "no");
  detail::human_line(os, "max residual", detail::format_double(r.max_residual));
  return os.str();
}

}  // namespace transferlab

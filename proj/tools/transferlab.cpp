#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <transferlab/transferlab.hpp>

namespace {

using namespace transferlab;

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream os;
    os << std::cin.rdbuf();
    return os.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open input file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << "\n";
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot open output file: " + path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << "\n";
}

Tolerance make_tolerance(double eq_tol) { return Tolerance(eq_tol, std::min(eq_tol / 10.0, 1e-10)); }

uint64_t default_seed() {
  if (const char* env = std::getenv("TRANSFERLAB_SEED")) {
    try {
      return std::stoull(env);
    } catch (...) {
      throw input_error("TRANSFERLAB_SEED must be a nonnegative integer");
    }
  }
  return 1;
}

std::vector<double> parse_number_list(const std::string& s, const std::string& what) {
  std::istringstream is(s);
  std::vector<double> out;
  double v;
  while (is >> v) out.push_back(v);
  if (!is.eof() || out.empty()) throw input_error(what + ": expected a space-separated list of numbers");
  return out;
}

DensityMatrix parse_rho_spec(const std::string& spec, int n, const Tolerance& tol) {
  DensityMatrix r;
  if (spec.rfind("diag ", 0) == 0) {
    const std::vector<double> w = parse_number_list(spec.substr(5), "--rho");
    if (static_cast<int>(w.size()) != n)
      throw input_error("--rho: expected " + std::to_string(n) + " diagonal entries");
    r.rho = Matrix(n, n);
    for (int i = 0; i < n; ++i) r.rho(i, i) = w[i];
  } else {
    r.rho = parse_operator_document(read_input(spec)).matrix;
  }
  r.validate(n, tol);
  return r;
}

BasisUnitary parse_unitary_spec(const std::string& spec, int n, uint64_t seed,
                                const Tolerance& tol) {
  BasisUnitary u;
  if (spec == "identity") {
    u.u = Matrix::identity(n);
  } else if (spec == "fourier") {
    u.u = Matrix(n, n);
    const double root = 1.0 / std::sqrt(static_cast<double>(n));
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double phase = 2.0 * 3.14159265358979323846 * j * k / n;
        u.u(j, k) = cplx(std::cos(phase), std::sin(phase)) * root;
      }
  } else if (spec == "random") {
    Rng rng(seed ^ 0x756e6974617279ULL);
    const PivotedQR qr(rng.gaussian_matrix(n, n));
    u.u = qr.q_columns(n);
  } else {
    u.u = parse_operator_document(read_input(spec)).matrix;
  }
  u.validate(n, tol);
  return u;
}

struct CommonOpts {
  double tol = 1e-9;
  std::string format = "human";
  std::string output;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--tol", o.tol, "equality tolerance (default 1e-9)");
  cmd->add_option("--format", o.format, "output format: human or machine")
      ->check(CLI::IsMember({"human", "machine"}));
  cmd->add_option("-o,--output", o.output, "output file (default stdout)");
}

void emit(const ordered_json& machine, const std::string& human, const CommonOpts& o) {
  write_output(o.format == "machine" ? machine.dump(2) : human, o.output);
}

int cmd_analyze(const std::string& system_path, const std::string& rho_spec, const CommonOpts& o) {
  const Tolerance tol = make_tolerance(o.tol);
  const SystemDocument sd = parse_system_document(read_input(system_path), tol);
  std::optional<DensityMatrix> rho;
  if (!rho_spec.empty()) {
    if (sd.kind != SystemKind::isometry)
      throw input_error("--rho only applies to isometry systems");
    rho = parse_rho_spec(rho_spec, sd.isometry().n, tol);
  }
  const AnalysisReport r = run_analyze(sd, tol, rho);
  emit(machine_report(r), human_report(r), o);
  return 0;
}

int cmd_verify(const std::string& system_path, const std::string& operator_path,
               bool require_nondegenerate, const CommonOpts& o) {
  const Tolerance tol = make_tolerance(o.tol);
  const SystemDocument sd = parse_system_document(read_input(system_path), tol);
  const OperatorDocument od = parse_operator_document(read_input(operator_path));
  const VerifyReport r = run_verify(sd, od, tol);
  emit(machine_report(r), human_report(r), o);
  if (!r.transfer_ok) return 2;
  if (require_nondegenerate && !(r.nondegenerate && *r.nondegenerate)) return 2;
  return 0;
}

int cmd_construct_complete(const std::string& system_path, const CommonOpts& o) {
  const Tolerance tol = make_tolerance(o.tol);
  const SystemDocument sd = parse_system_document(read_input(system_path), tol);
  const OperatorMap endo = endo_from_document(sd, tol);
  const TransferOperator t = complete_transfer(endo, tol);

  std::ostringstream human;
  human << "complete transfer operator for " << sd.label << "\n";
  human << "matrix " << detail::format_matrix_inline(t.map.matrix()) << "\n";
  human << "max residual " << detail::format_double(t.max_residual) << "\n";
  emit(emit_operator_document(sd.label + "-complete", t.map.matrix()), human.str(), o);
  return 0;
}

int cmd_construct_from_expectation(const std::string& system_path, const std::string& exp_path,
                                   const CommonOpts& o) {
  const Tolerance tol = make_tolerance(o.tol);
  const SystemDocument sd = parse_system_document(read_input(system_path), tol);
  const OperatorDocument od = parse_operator_document(read_input(exp_path));
  const OperatorMap endo = endo_from_document(sd, tol);
  const int m = endo.codomain().dim();
  if (od.matrix.rows() != m || od.matrix.cols() != m)
    throw input_error("expectation matrix must be " + std::to_string(m) + "x" + std::to_string(m));
  const ConditionalExpectation e = verify_expectation(
      OperatorMap(endo.codomain(), endo.codomain(), od.matrix), orthonormal_range(endo.matrix()), tol);
  const TransferOperator t = transfer_from_expectation(endo, e, tol);

  std::ostringstream human;
  human << "transfer operator recovered from expectation " << od.label << "\n";
  human << "matrix " << detail::format_matrix_inline(t.map.matrix()) << "\n";
  human << "max residual " << detail::format_double(t.max_residual) << "\n";
  emit(emit_operator_document(sd.label + "-from-expectation", t.map.matrix()), human.str(), o);
  return 0;
}

int cmd_enumerate(int points, const CommonOpts& o) {
  if (points < 1 || points > 5)
    throw input_error("--points must be between 1 and 5 for enumeration");
  const Tolerance tol = make_tolerance(o.tol);
  const std::vector<FiniteDynSystem> systems = enumerate_systems(points);

  ordered_json out;
  out["schema"] = 1;
  out["command"] = "enumerate";
  out["points"] = points;
  out["count"] = systems.size();
  ordered_json list = ordered_json::array();
  int hereditary_count = 0;
  std::ostringstream human;
  human << systems.size() << " systems on " << points << " points\n";
  for (const FiniteDynSystem& s : systems) {
    const bool hereditary = complete_exists_commutative(s, tol);
    const int dim = nondegenerate_parameter_space(s).total_dimension;
    hereditary_count += hereditary ? 1 : 0;
    list.push_back(ordered_json{{"delta", s.delta},
                                {"gamma", s.gamma},
                                {"hereditary", hereditary},
                                {"parameter_dimension", dim}});
    human << "delta=" << detail::format_int_set(s.delta) << " gamma=" << detail::format_int_set(s.gamma)
          << " hereditary=" << (hereditary ? "yes" : "no") << " dim=" << dim << "\n";
  }
  out["hereditary_count"] = hereditary_count;
  out["systems"] = std::move(list);
  std::ostringstream header;
  header << "hereditary " << hereditary_count << "/" << systems.size() << "\n";
  emit(out, human.str() + header.str(), o);
  return 0;
}

int cmd_sample(const std::string& system_path, uint64_t seed, const CommonOpts& o) {
  const Tolerance tol = make_tolerance(o.tol);
  const SystemDocument sd = parse_system_document(read_input(system_path), tol);
  if (sd.kind != SystemKind::commutative)
    throw input_error("sample requires a commutative system document");
  const FiniteDynSystem& s = sd.commutative();
  const TransferOperator t = sample_nondegenerate(s, seed, tol);
  const FiberWeights w = weights_from_transfer(s, t, tol);

  ordered_json out;
  out["schema"] = 1;
  out["command"] = "sample";
  out["label"] = sd.label;
  out["seed"] = seed;
  out["weights"] = w.rho;
  out["transfer"] = doc::dump_matrix(t.map.matrix());
  out["nondegenerate"] = true;
  out["parameter_dimension"] = nondegenerate_parameter_space(s).total_dimension;

  std::ostringstream human;
  human << "sampled non-degenerate transfer operator for " << sd.label << " (seed " << seed << ")\n";
  human << "weights";
  for (double v : w.rho) human << " " << detail::format_double(v);
  human << "\nmatrix " << detail::format_matrix_inline(t.map.matrix()) << "\n";
  emit(out, human.str(), o);
  return 0;
}

int cmd_bh_demo(int n, int d, int big_d, uint64_t seed, const std::string& rho_spec,
                const std::string& mu_spec, const std::string& unitary_spec, const CommonOpts& o) {
  const Tolerance tol = make_tolerance(o.tol);
  const IsometryFamily f = make_isometry_family(n, d, seed, big_d);

  DensityMatrix rho;
  std::string rho_origin;
  if (!rho_spec.empty() && !mu_spec.empty())
    throw input_error("--rho and --mu are mutually exclusive");
  if (!unitary_spec.empty() && mu_spec.empty())
    throw input_error("--unitary requires --mu");
  if (!rho_spec.empty()) {
    rho = parse_rho_spec(rho_spec, n, tol);
    rho_origin = "explicit";
  } else if (!mu_spec.empty()) {
    const std::vector<double> w = parse_number_list(mu_spec, "--mu");
    if (static_cast<int>(w.size()) != n)
      throw input_error("--mu: expected " + std::to_string(n) + " weights");
    DiagonalWeights mu{w};
    mu.validate(n);
    if (!unitary_spec.empty()) {
      const BasisUnitary u = parse_unitary_spec(unitary_spec, n, seed, tol);
      rho.rho = u.u * mu.as_density().rho * u.u.adjoint();
      rho_origin = "rotated diagonal";
    } else {
      rho = mu.as_density();
      rho_origin = "diagonal";
    }
  } else {
    rho.rho = Matrix::identity(n) * cplx(1.0 / n, 0.0);
    rho_origin = "maximally mixed (default)";
  }
  rho.validate(n, tol);

  const TransferOperator t = transfer_from_density(f, rho, tol);
  const StateFunctional omega = state_from_transfer(f, t, tol);
  const double state_residual = distance_max_abs(omega.density, rho.rho);

  Rng rng(seed ^ 0x636f726e6572ULL);
  Matrix p(f.D, f.D);
  for (int i = 0; i < n; ++i) p += f.U[i] * f.U[i].adjoint();
  const Matrix corner_elem = p * rng.gaussian_matrix(f.D, f.D) * p;
  const double tensor_residual =
      distance_max_abs(tensor_join(f, tensor_split(f, corner_elem, tol)), corner_elem);

  std::optional<double> expectation_residual;
  if (std::abs(rho.trace_real() - 1.0) <= tol.eq_tol) {
    const ConditionalExpectation e = expectation_from_state(f, rho, tol);
    const OperatorMap endo = endo_from_isometries(f, tol);
    expectation_residual = map_distance(e.map, compose(endo, t.map));
  }

  ordered_json out;
  out["schema"] = 1;
  out["command"] = "bh-demo";
  out["n"] = n;
  out["d"] = d;
  out["D"] = f.D;
  out["seed"] = seed;
  out["rho"] = doc::dump_matrix(rho.rho);
  out["rho_origin"] = rho_origin;
  out["transfer"] = doc::dump_matrix(t.map.matrix());
  out["norm"] = transfer_norm(t);
  out["coordinate_norm_estimate"] = operator_norm_estimate(t.map.matrix());
  out["nondegenerate"] = t.nondegenerate && *t.nondegenerate;
  out["transfer_residual"] = t.max_residual;
  out["omega_density"] = doc::dump_matrix(omega.density);
  out["state_roundtrip_residual"] = state_residual;
  out["tensor_roundtrip_residual"] = tensor_residual;
  out["expectation_residual"] =
      expectation_residual ? ordered_json(*expectation_residual) : ordered_json(nullptr);

  std::ostringstream human;
  human << "isometry family n=" << n << " d=" << d << " D=" << f.D << " seed=" << seed << "\n";
  human << "rho (" << rho_origin << ") " << detail::format_matrix_inline(rho.rho) << "\n";
  human << "transfer norm " << detail::format_double(transfer_norm(t)) << "   non-degenerate "
        << ((t.nondegenerate && *t.nondegenerate) ? "yes" : "no") << "\n";
  human << "transfer residual " << detail::format_double(t.max_residual) << "\n";
  human << "state round-trip residual " << detail::format_double(state_residual) << "\n";
  human << "tensor round-trip residual " << detail::format_double(tensor_residual) << "\n";
  if (expectation_residual)
    human << "expectation residual " << detail::format_double(*expectation_residual) << "\n";
  emit(out, human.str(), o);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transferlab: transfer operators of finite C*-dynamical systems"};
  app.require_subcommand(1);

  CommonOpts analyze_opts, verify_opts, complete_opts, fromexp_opts, enum_opts, sample_opts, demo_opts;

  std::string analyze_system, analyze_rho;
  CLI::App* analyze = app.add_subcommand("analyze", "analyze a system document");
  analyze->add_option("system", analyze_system, "system document (path or -)")->required();
  analyze->add_option("--rho", analyze_rho, "density: 'diag w1 ... wn' or operator-document path");
  add_common(analyze, analyze_opts);

  std::string verify_system, verify_operator;
  bool require_nondeg = false;
  CLI::App* verify = app.add_subcommand("verify", "verify a transfer-operator candidate");
  verify->add_option("system", verify_system, "system document (path or -)")->required();
  verify->add_option("operator", verify_operator, "operator document (path or -)")->required();
  verify->add_flag("--require-nondegenerate", require_nondeg, "also fail (exit 2) when degenerate");
  add_common(verify, verify_opts);

  CLI::App* construct = app.add_subcommand("construct", "construct transfer operators");
  construct->require_subcommand(1);
  std::string complete_system;
  CLI::App* complete = construct->add_subcommand("complete", "the complete transfer operator");
  complete->add_option("system", complete_system, "system document (path or -)")->required();
  add_common(complete, complete_opts);
  std::string fromexp_system, fromexp_operator;
  CLI::App* fromexp = construct->add_subcommand("from-expectation", "recover from an expectation");
  fromexp->add_option("system", fromexp_system, "system document (path or -)")->required();
  fromexp->add_option("expectation", fromexp_operator, "expectation operator document")->required();
  add_common(fromexp, fromexp_opts);

  CLI::App* commutative = app.add_subcommand("commutative", "finite dynamical systems on points");
  commutative->require_subcommand(1);
  int enum_points = 3;
  CLI::App* enumerate = commutative->add_subcommand("enumerate", "list all systems on N points");
  enumerate->add_option("--points", enum_points, "number of points (1..5)")->required();
  add_common(enumerate, enum_opts);
  std::string sample_system;
  uint64_t sample_seed = 0;
  bool sample_seed_set = false;
  CLI::App* sample = commutative->add_subcommand("sample", "sample a non-degenerate operator");
  sample->add_option("system", sample_system, "commutative system document")->required();
  sample->add_option("--seed", sample_seed, "rng seed (default: TRANSFERLAB_SEED or 1)")
      ->each([&](const std::string&) { sample_seed_set = true; });
  add_common(sample, sample_opts);

  CLI::App* bh = app.add_subcommand("bh", "isometry-family models");
  bh->require_subcommand(1);
  int demo_n = 2, demo_d = 1, demo_D = 0;
  uint64_t demo_seed = 0;
  bool demo_seed_set = false;
  std::string demo_rho, demo_mu, demo_unitary;
  CLI::App* demo = bh->add_subcommand("demo", "build a family and exercise its transfer operators");
  demo->add_option("--n", demo_n, "number of isometries")->required();
  demo->add_option("--d", demo_d, "domain dimension")->required();
  demo->add_option("--D", demo_D, "codomain dimension (default n*d)");
  demo->add_option("--seed", demo_seed, "rng seed (default: TRANSFERLAB_SEED or 1)")
      ->each([&](const std::string&) { demo_seed_set = true; });
  demo->add_option("--rho", demo_rho, "density: 'diag w1 ... wn' or operator-document path");
  demo->add_option("--mu", demo_mu, "diagonal weights: 'w1 ... wn'");
  demo->add_option("--unitary", demo_unitary, "basis rotation: identity, fourier, random, or path");
  add_common(demo, demo_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 1;
  }

  try {
    if (*analyze) return cmd_analyze(analyze_system, analyze_rho, analyze_opts);
    if (*verify) return cmd_verify(verify_system, verify_operator, require_nondeg, verify_opts);
    if (*complete) return cmd_construct_complete(complete_system, complete_opts);
    if (*fromexp) return cmd_construct_from_expectation(fromexp_system, fromexp_operator, fromexp_opts);
    if (*enumerate) return cmd_enumerate(enum_points, enum_opts);
    if (*sample)
      return cmd_sample(sample_system, sample_seed_set ? sample_seed : default_seed(), sample_opts);
    if (*demo)
      return cmd_bh_demo(demo_n, demo_d, demo_D, demo_seed_set ? demo_seed : default_seed(), demo_rho,
                         demo_mu, demo_unitary, demo_opts);
    std::cerr << "error: no command selected\n";
    return 1;
  } catch (const transferlab::verification_error& e) {
    std::cerr << "verification failure: " << e.what() << "\n";
    return 2;
  } catch (const transferlab::structural_error& e) {
    std::cerr << "structural failure: " << e.what() << "\n";
    return 2;
  } catch (const transferlab::input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

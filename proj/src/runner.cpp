#include "helmdd/runner.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "helmdd/operators.hpp"

namespace helmdd {

namespace {

const Complex i_unit(0.0, 1.0);

using nlohmann::json;

[[noreturn]] void config_fail(const std::string& path, const std::string& what) {
  throw ConfigError("config." + path + ": " + what);
}

const json& require_field(const json& doc, const std::string& path, const char* key) {
  if (!doc.contains(key)) config_fail(path.empty() ? key : path + "." + key, "missing field");
  return doc.at(key);
}

Complex parse_complex(const json& value, const std::string& path) {
  if (!value.is_array() || value.size() != 2 || !value[0].is_number() || !value[1].is_number())
    config_fail(path, "expected [re, im]");
  return {value[0].get<double>(), value[1].get<double>()};
}

ImpedanceSpec parse_impedance(const json& doc) {
  const std::string kind = require_field(doc, "impedance", "kind").get<std::string>();
  if (kind == "identity") return ImpedanceSpec::identity();
  if (kind == "second_order") return ImpedanceSpec::second_order();
  if (kind == "scaled_mass")
    return ImpedanceSpec::scaled_mass(parse_complex(require_field(doc, "impedance", "z"), "impedance.z"));
  if (kind == "rotated_second_order")
    return ImpedanceSpec::rotated_second_order(
        require_field(doc, "impedance", "theta").get<double>());
  if (kind == "scaled_reference") {
    const std::string ref = require_field(doc, "impedance", "reference").get<std::string>();
    ReferenceKind reference;
    if (ref == "identity")
      reference = ReferenceKind::IdentityD;
    else if (ref == "mass")
      reference = ReferenceKind::Mass;
    else if (ref == "second_order")
      reference = ReferenceKind::SecondOrder;
    else
      config_fail("impedance.reference", "unknown reference '" + ref + "'");
    return ImpedanceSpec::scaled_reference(
        parse_complex(require_field(doc, "impedance", "z"), "impedance.z"), reference);
  }
  if (kind == "per_subdomain_scaled_mass") {
    const json& zs = require_field(doc, "impedance", "z");
    if (!zs.is_array()) config_fail("impedance.z", "expected an array of [re, im]");
    std::vector<Complex> values;
    for (std::size_t i = 0; i < zs.size(); ++i)
      values.push_back(parse_complex(zs[i], "impedance.z[" + std::to_string(i) + "]"));
    return ImpedanceSpec::per_subdomain_scaled_mass(std::move(values));
  }
  config_fail("impedance.kind", "unknown kind '" + kind + "'");
}

std::string impedance_label(const ImpedanceSpec& spec) {
  std::ostringstream out;
  switch (spec.kind) {
    case ImpedanceKind::IdentityD:
      out << "identity";
      break;
    case ImpedanceKind::ScaledMass:
      out << "scaled_mass(z=" << spec.z.real() << "+" << spec.z.imag() << "i)";
      break;
    case ImpedanceKind::SecondOrder:
      out << "second_order";
      break;
    case ImpedanceKind::RotatedSecondOrder:
      out << "rotated_second_order(theta=" << spec.theta << ")";
      break;
    case ImpedanceKind::ScaledReference:
      out << "scaled_reference(z=" << spec.z.real() << "+" << spec.z.imag() << "i)";
      break;
    case ImpedanceKind::PerSubdomainScaledMass:
      out << "per_subdomain_scaled_mass[" << spec.z_per_subdomain.size() << "]";
      break;
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out << content;
  if (!out) throw Error("write failed: " + path);
}

}  // namespace

MediumSpec RunConfig::medium() const {
  MediumSpec m;
  m.kappa = Complex(2.0 * M_PI / wavelength, absorption);
  m.mu = mu;
  return m;
}

void RunConfig::validate() const {
  if (!(wavelength > 0.0)) config_fail("medium.wavelength", "must be positive");
  if (absorption < 0.0) config_fail("medium.absorption", "must be nonnegative");
  if (!(mu > 0.0)) config_fail("medium.mu", "must be positive");
  if (!partition_path && subdomains < 1) config_fail("partition.subdomains", "must be >= 1");
  if (mode == RunMode::SweepTheta) {
    if (theta_steps < 1) config_fail("sweep.steps", "must be >= 1");
    if (!(theta_max >= theta_min)) config_fail("sweep.theta_max", "must be >= theta_min");
  }
  solver.validate();
  if (const auto* wave = std::get_if<PlaneWaveSource>(&source)) {
    if (std::abs(std::hypot(wave->dx, wave->dy) - 1.0) > 1e-12)
      config_fail("source.plane_wave", "direction must have unit norm");
  }
}

RunConfig RunConfig::from_json(const json& doc) {
  RunConfig config;

  const json& mesh = require_field(doc, "", "mesh");
  config.mesh_path = require_field(mesh, "mesh", "path").get<std::string>();
  const std::string format = mesh.value("format", std::string("native"));
  if (format == "native")
    config.mesh_format = MeshFormat::Native;
  else if (format == "msh2")
    config.mesh_format = MeshFormat::Msh2;
  else
    config_fail("mesh.format", "unknown format '" + format + "'");

  if (doc.contains("partition")) {
    const json& part = doc.at("partition");
    if (part.contains("path")) {
      config.partition_path = part.at("path").get<std::string>();
    } else {
      config.subdomains = require_field(part, "partition", "subdomains").get<int>();
      config.partition_seed = part.value("seed", 0);
    }
  }

  if (doc.contains("medium")) {
    const json& medium = doc.at("medium");
    config.wavelength = require_field(medium, "medium", "wavelength").get<double>();
    config.absorption = medium.value("absorption", 1.0);
    config.mu = medium.value("mu", 1.0);
  }

  if (doc.contains("impedance")) config.impedance = parse_impedance(doc.at("impedance"));

  if (doc.contains("solver")) {
    const json& solver = doc.at("solver");
    const std::string method = solver.value("method", std::string("richardson"));
    if (method == "richardson")
      config.solver.method = SolveConfig::Method::Richardson;
    else if (method == "gmres")
      config.solver.method = SolveConfig::Method::Gmres;
    else
      config_fail("solver.method", "unknown method '" + method + "'");
    config.solver.relax = solver.value("relax", config.solver.relax);
    config.solver.tol = solver.value("tol", config.solver.tol);
    config.solver.maxit = solver.value("maxit", config.solver.maxit);
    config.solver.restart = solver.value("restart", config.solver.restart);
  }

  if (doc.contains("source")) {
    const json& source = doc.at("source");
    if (source.contains("plane_wave")) {
      Complex d = parse_complex(source.at("plane_wave"), "source.plane_wave");
      config.source = PlaneWaveSource{d.real(), d.imag()};
    } else if (source.contains("volume_constant")) {
      config.source =
          VolumeConstantSource{parse_complex(source.at("volume_constant"), "source.volume_constant")};
    } else {
      config_fail("source", "expected plane_wave or volume_constant");
    }
  }

  config.output_dir = doc.value("output_dir", std::string("."));

  const std::string mode = doc.value("mode", std::string("solve"));
  if (mode == "solve")
    config.mode = RunMode::Solve;
  else if (mode == "verify")
    config.mode = RunMode::Verify;
  else if (mode == "constants")
    config.mode = RunMode::Constants;
  else if (mode == "sweep_theta")
    config.mode = RunMode::SweepTheta;
  else
    config_fail("mode", "unknown mode '" + mode + "'");

  if (doc.contains("sweep")) {
    const json& sweep = doc.at("sweep");
    config.theta_min = sweep.value("theta_min", config.theta_min);
    config.theta_max = sweep.value("theta_max", config.theta_max);
    config.theta_steps = sweep.value("steps", config.theta_steps);
  }

  config.seed = doc.value("seed", 1);
  config.field_of_values_samples = doc.value("field_of_values_samples", 500);
  config.dump_operators = doc.value("dump_operators", false);
  config.write_vtk = doc.value("write_vtk", false);
  config.validate();
  return config;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  return from_json(doc);
}

namespace {

struct Assembled {
  Mesh mesh;
  Partition partition;
  SubdomainTopology topo;
  std::unique_ptr<TraceSpaces> spaces;
  FemSystem fem;
};

Assembled assemble_from_config(const RunConfig& config) {
  Assembled a;
  a.mesh = load_mesh_file(config.mesh_path, config.mesh_format);
  a.partition = config.partition_path
                    ? load_partition_file(*config.partition_path, a.mesh)
                    : build_partition(a.mesh, config.subdomains, config.partition_seed);
  a.topo = extract_topology(a.mesh, a.partition);
  a.spaces = std::make_unique<TraceSpaces>(a.topo);
  a.fem = assemble_system(a.topo, config.medium());
  return a;
}

json mesh_metadata(const RunConfig& config, const Assembled& a) {
  json meta;
  meta["path"] = config.mesh_path;
  meta["vertices"] = a.mesh.vertex_count();
  meta["triangles"] = a.mesh.triangle_count();
  meta["subdomains"] = a.partition.subdomain_count;
  meta["skeleton_dofs"] = static_cast<int>(a.topo.skeleton_dofs.size());
  meta["multi_trace_dofs"] = a.spaces->trace_layout().total();
  meta["wavelength"] = config.wavelength;
  meta["absorption"] = config.absorption;
  meta["mu"] = config.mu;
  meta["impedance"] = impedance_label(config.impedance);
  return meta;
}

RunArtifacts execute_solve(const RunConfig& config, Assembled& a) {
  ImpedanceOperator t = build_impedance(config.impedance, *a.spaces, a.fem);
  ExchangeOperator pi(t);
  ScatteringOperator s(a.fem, t);
  SkeletonSystem system(pi, s);

  BrokenVector f = assemble_load(a.topo, *a.spaces, a.fem.medium, config.source);
  MultiTraceDual g = system.compute_rhs(f);
  SolveResult result = solve(system, g, config.solver);

  Reconstruction rec = reconstruct(system, result.solution, f);
  GlueResult glued = glue(*a.spaces, rec.volume);
  ComplexVector oracle = monolithic_solve(a.mesh, a.fem.medium, config.source);
  const double h1_error = relative_h1_error(a.fem, *a.spaces, rec.volume, oracle);

  RunArtifacts artifacts;
  artifacts.history = result.history;
  artifacts.solution = glued.conforming;
  artifacts.exit_code = result.history.converged ? 0 : 2;

  json& summary = artifacts.report;
  summary["mode"] = "solve";
  summary["mesh"] = mesh_metadata(config, a);
  summary["method"] =
      config.solver.method == SolveConfig::Method::Richardson ? "richardson" : "gmres";
  summary["relax"] = config.solver.relax;
  summary["tol"] = config.solver.tol;
  summary["converged"] = result.history.converged;
  summary["iterations"] = result.history.iterations;
  summary["final_residual"] = result.history.residuals.back().second;
  summary["oracle_h1_error"] = h1_error;
  summary["max_interface_jump"] = glued.max_jump;
  return artifacts;
}

RunArtifacts execute_verify(const RunConfig& config, Assembled& a) {
  ImpedanceOperator t = build_impedance(config.impedance, *a.spaces, a.fem);
  auto suites = run_verify_suites(a.mesh, *a.spaces, a.fem, t, config.seed);

  RunArtifacts artifacts;
  bool all_pass = true;
  json list = json::array();
  for (const auto& suite : suites) {
    json entry;
    entry["name"] = suite.name;
    entry["pass"] = suite.pass;
    entry["max_residual"] = suite.max_residual;
    list.push_back(entry);
    all_pass = all_pass && suite.pass;
  }
  artifacts.report["mode"] = "verify";
  artifacts.report["mesh"] = mesh_metadata(config, a);
  artifacts.report["suites"] = list;
  artifacts.report["all_pass"] = all_pass;
  artifacts.exit_code = all_pass ? 0 : 3;
  return artifacts;
}

RunArtifacts execute_constants(const RunConfig& config, Assembled& a) {
  ImpedanceOperator t = build_impedance(config.impedance, *a.spaces, a.fem);
  ExchangeOperator pi(t);
  ScatteringOperator s(a.fem, t);
  SkeletonSystem system(pi, s);

  ConstantsReport report = compute_constants(a.mesh, a.fem, *a.spaces, t, system);

  Rng rng(config.seed);
  auto field = sample_field_of_values(system, config.field_of_values_samples, rng);

  RunArtifacts artifacts;
  json& doc = artifacts.report;
  doc["mode"] = "constants";
  doc["mesh"] = mesh_metadata(config, a);
  doc["t_minus"] = report.t_minus;
  doc["t_plus"] = report.t_plus;
  doc["t_star"] = report.t_star;
  doc["alpha_h"] = report.alpha_h;
  doc["beta_h"] = report.beta_h;
  doc["norm_a"] = report.norm_a;
  doc["gamma_exact"] = report.gamma_exact;
  doc["gamma_bound_thm"] = report.gamma_bound_thm;
  if (report.gamma_bound_hpd) doc["gamma_bound_hpd"] = *report.gamma_bound_hpd;
  doc["norm_p"] = report.norm_p;
  doc["tolerances"] = {{"bound_slack", 1e-9},
                       {"field_of_values_slack", 1e-10},
                       {"hermitian_detection", 1e-13}};
  json fov = json::array();
  for (const Complex& lambda : field) fov.push_back({lambda.real(), lambda.imag()});
  doc["field_of_values"] = fov;
  return artifacts;
}

RunArtifacts execute_sweep(const RunConfig& config, Assembled& a) {
  RunArtifacts artifacts;
  SweepResult sweep;
  for (int step = 0; step < config.theta_steps; ++step) {
    const double theta =
        config.theta_steps == 1
            ? config.theta_min
            : config.theta_min +
                  (config.theta_max - config.theta_min) * step / (config.theta_steps - 1.0);
    ImpedanceOperator t =
        build_impedance(ImpedanceSpec::rotated_second_order(theta), *a.spaces, a.fem);
    ExchangeOperator pi(t);
    ScatteringOperator s(a.fem, t);
    SkeletonSystem system(pi, s);
    BrokenVector f = assemble_load(a.topo, *a.spaces, a.fem.medium, config.source);
    MultiTraceDual g = system.compute_rhs(f);
    SolveResult result = richardson_solve(system, g, config.solver);
    sweep.entries.emplace_back(theta,
                               result.history.converged ? result.history.iterations : -1);
  }
  artifacts.report["mode"] = "sweep_theta";
  artifacts.report["mesh"] = mesh_metadata(config, a);
  artifacts.sweep = std::move(sweep);
  return artifacts;
}

}  // namespace

RunArtifacts execute(const RunConfig& config) {
  config.validate();
  Assembled a = assemble_from_config(config);
  switch (config.mode) {
    case RunMode::Solve:
      return execute_solve(config, a);
    case RunMode::Verify:
      return execute_verify(config, a);
    case RunMode::Constants:
      return execute_constants(config, a);
    case RunMode::SweepTheta:
      return execute_sweep(config, a);
  }
  throw ConfigError("unreachable mode");
}

int run(const RunConfig& config) {
  namespace fs = std::filesystem;
  RunArtifacts artifacts = execute(config);

  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) throw Error("cannot create output directory " + config.output_dir + ": " + ec.message());
  const auto path = [&](const char* name) { return (fs::path(config.output_dir) / name).string(); };

  if (artifacts.history) {
    std::ostringstream csv;
    write_history_csv(csv, *artifacts.history);
    write_text_file(path("residual_history.csv"), csv.str());
  }
  if (artifacts.solution) {
    std::ostringstream csv;
    write_solution_csv(csv, *artifacts.solution);
    write_text_file(path("solution.csv"), csv.str());
    if (config.write_vtk) {
      Mesh mesh = load_mesh_file(config.mesh_path, config.mesh_format);
      std::ostringstream vtk;
      write_solution_vtk(vtk, mesh, *artifacts.solution);
      write_text_file(path("solution.vtk"), vtk.str());
    }
  }
  if (artifacts.sweep) {
    std::ostringstream csv;
    csv << "theta,n_theta\n";
    char buf[64];
    for (const auto& [theta, count] : artifacts.sweep->entries) {
      std::snprintf(buf, sizeof buf, "%.17g,%d\n", theta, count);
      csv << buf;
    }
    write_text_file(path("sweep.csv"), csv.str());
  }

  const char* report_name = "summary.json";
  if (config.mode == RunMode::Verify) report_name = "verify.json";
  if (config.mode == RunMode::Constants) report_name = "constants.json";
  if (config.mode == RunMode::SweepTheta) report_name = "sweep_summary.json";
  write_text_file(path(report_name), artifacts.report.dump(2) + "\n");

  if (config.dump_operators && config.mode == RunMode::Solve) {
    Assembled a = assemble_from_config(config);
    ImpedanceOperator t = build_impedance(config.impedance, *a.spaces, a.fem);
    if (a.spaces->trace_layout().total() <= densify_cap) {
      ExchangeOperator pi(t);
      ScatteringOperator s(a.fem, t);
      std::ostringstream pi_txt, swap_txt, s_txt;
      write_dense_operator(pi_txt, pi.dense());
      write_dense_operator(swap_txt, local_swap_matrix(*a.spaces));
      write_dense_operator(s_txt, s.dense());
      write_text_file(path("exchange_operator.txt"), pi_txt.str());
      write_text_file(path("local_swap.txt"), swap_txt.str());
      write_text_file(path("scattering_operator.txt"), s_txt.str());
    }
  }
  return artifacts.exit_code;
}

}  // namespace helmdd

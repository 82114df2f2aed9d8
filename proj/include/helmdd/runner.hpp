#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "helmdd/constants.hpp"

namespace helmdd {

enum class RunMode { Solve, Verify, Constants, SweepTheta };

/// One JSON document drives a run; no environment variables affect numerics.
struct RunConfig {
  std::string mesh_path;
  MeshFormat mesh_format = MeshFormat::Native;

  std::optional<std::string> partition_path;  // else built from (subdomains, seed)
  int subdomains = 1;
  std::uint64_t partition_seed = 0;

  double wavelength = 0.2;  // kappa = 2 pi / wavelength + i * absorption
  double absorption = 1.0;
  double mu = 1.0;

  ImpedanceSpec impedance;
  SolveConfig solver;
  SourceSpec source = PlaneWaveSource{1.0 / 1.4142135623730951, 1.0 / 1.4142135623730951};

  std::string output_dir = ".";
  RunMode mode = RunMode::Solve;

  double theta_min = -0.4;  // sweep_theta mode
  double theta_max = 0.5;
  int theta_steps = 19;

  std::uint64_t seed = 1;  // randomized verification suites
  int field_of_values_samples = 500;
  bool dump_operators = false;
  bool write_vtk = false;

  MediumSpec medium() const;
  void validate() const;

  static RunConfig from_json(const nlohmann::json& doc);
  static RunConfig from_file(const std::string& path);
};

struct SweepResult {
  // (theta, iterations to reach tol); iterations = -1 flags a maxit stop
  std::vector<std::pair<double, int>> entries;
};

struct VerifySuite {
  std::string name;
  bool pass = false;
  double max_residual = 0.0;
};

/// Everything a run produces, before serialization.
struct RunArtifacts {
  nlohmann::json report;  // summary.json / verify.json / constants.json
  std::optional<ConvergenceHistory> history;
  std::optional<ComplexVector> solution;  // glued conforming coefficients
  std::optional<SweepResult> sweep;
  int exit_code = 0;
};

/// Execute a configured run without touching the filesystem.
RunArtifacts execute(const RunConfig& config);

/// Execute and write the mode's artifacts under config.output_dir.
/// Returns the process exit status (nonzero on solver non-convergence,
/// with partial artifacts retained).
int run(const RunConfig& config);

/// The randomized invariant suites behind verify mode.
std::vector<VerifySuite> run_verify_suites(const Mesh& mesh, const TraceSpaces& spaces,
                                           const FemSystem& fem, const ImpedanceOperator& t,
                                           std::uint64_t seed);

}  // namespace helmdd

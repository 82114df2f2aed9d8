#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "helmdd/runner.hpp"

namespace {

int run_mode(const std::string& config_path, helmdd::RunMode mode) {
  helmdd::RunConfig config = helmdd::RunConfig::from_file(config_path);
  config.mode = mode;
  return helmdd::run(config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Skeleton-formulation Helmholtz domain-decomposition laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  auto* solve = app.add_subcommand("solve", "solve the skeleton formulation and export artifacts");
  solve->add_option("--config", config_path, "JSON run configuration")->required();
  auto* verify = app.add_subcommand("verify", "run the randomized operator-identity suites");
  verify->add_option("--config", config_path, "JSON run configuration")->required();
  auto* constants = app.add_subcommand("constants", "compute the convergence-theory constants");
  constants->add_option("--config", config_path, "JSON run configuration")->required();
  auto* sweep = app.add_subcommand("sweep-theta", "iteration counts over a range of impedance angles");
  sweep->add_option("--config", config_path, "JSON run configuration")->required();

  int cells = 20;
  double side = 2.0;
  std::string mesh_out;
  auto* make_mesh = app.add_subcommand("make-mesh", "write a structured square mesh (native format)");
  make_mesh->add_option("--cells", cells, "cells per side")->required();
  make_mesh->add_option("--side", side, "side length (centered at the origin)");
  make_mesh->add_option("--out", mesh_out, "output path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (make_mesh->parsed()) {
      helmdd::Mesh mesh = helmdd::generate_structured_square(cells, side);
      std::ofstream out(mesh_out);
      if (!out) throw helmdd::Error("cannot open for writing: " + mesh_out);
      helmdd::write_mesh(out, mesh);
      std::printf("wrote %d vertices, %d triangles to %s\n", mesh.vertex_count(),
                  mesh.triangle_count(), mesh_out.c_str());
      return 0;
    }
    if (solve->parsed()) return run_mode(config_path, helmdd::RunMode::Solve);
    if (verify->parsed()) return run_mode(config_path, helmdd::RunMode::Verify);
    if (constants->parsed()) return run_mode(config_path, helmdd::RunMode::Constants);
    if (sweep->parsed()) return run_mode(config_path, helmdd::RunMode::SweepTheta);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

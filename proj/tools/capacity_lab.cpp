#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "caplab/experiment.hpp"

namespace {

using namespace caplab;

struct Flags {
  std::string n, n1, n2, boundary = "open", representation = "auto", op = "standard", one_vertex_n;
  std::string checkpoint;
  std::uint64_t checkpoint_every = 0;
};

void add_model_flags(CLI::App* cmd, ExperimentConfig& cfg) {
  cmd->add_option("--model", cfg.model, "builtin model name or a system file")->capture_default_str();
  cmd->add_option("--model-file", cfg.model_file, "constraint system file");
  cmd->add_option("--d", cfg.model_d, "monomer-dimer dimension")->capture_default_str();
  cmd->add_flag("!--literal-dimers", cfg.same_axis_chain, "omit the same-axis chaining edge for monomer-dimer");
}

void add_spectral_flags(CLI::App* cmd, ExperimentConfig& cfg, Flags& f) {
  auto& it = cfg.iteration;
  cmd->add_option("--n", f.n, "2D strip widths: 5, 2..12, 2,4,6");
  cmd->add_option("--n1", f.n1, "3D slab sides along axis 1");
  cmd->add_option("--n2", f.n2, "3D slab sides along axis 2");
  cmd->add_option("--boundary", f.boundary, "open | periodic | b1/b2")->capture_default_str();
  cmd->add_option("--representation", f.representation, "auto | lists | bitset | matrix-free")->capture_default_str();
  cmd->add_option("--precision", it.precision_digits, "working precision in decimal digits")->capture_default_str();
  cmd->add_option("--tol", it.tolerance, "relative Collatz-Wielandt gap (default 10^-(precision-8))");
  cmd->add_option("--max-iter", it.max_iterations, "iteration cap")->capture_default_str();
  cmd->add_option("--shift", it.shift, "diagonal shift (default 1)");
  cmd->add_option("--check-interval", it.check_interval, "steps between enclosure checks")->capture_default_str();
  cmd->add_option("--checkpoint", f.checkpoint, "checkpoint file");
  cmd->add_option("--checkpoint-every", f.checkpoint_every, "checkpoint every N steps (0: only at the end)");
  cmd->add_flag("--resume", it.resume, "resume from --checkpoint");
  cmd->add_option("--workers", it.workers, "threads used by operator apply")->capture_default_str();
}

void add_output_flags(CLI::App* cmd, ExperimentConfig& cfg) {
  cmd->add_option("--out", cfg.out, "result file (default stdout)");
  cmd->add_option("--format", cfg.format, "csv | json")->capture_default_str();
  cmd->add_flag("--timing", cfg.timing, "fill the seconds column");
}

BoundaryDescriptor parse_boundaries(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) {
    const Boundary b = parse_boundary(text);
    return {b, b};
  }
  return {parse_boundary(text.substr(0, slash)), parse_boundary(text.substr(slash + 1))};
}

void finish(ExperimentConfig& cfg, const Flags& f) {
  if (!f.n.empty()) cfg.n = parse_int_list(f.n);
  if (!f.n1.empty()) cfg.n1 = parse_int_list(f.n1);
  if (!f.n2.empty()) cfg.n2 = parse_int_list(f.n2);
  if (!f.one_vertex_n.empty()) cfg.one_vertex_n = parse_int_list(f.one_vertex_n);
  cfg.boundary = parse_boundaries(f.boundary);
  cfg.representation = parse_representation(f.representation);
  cfg.op = parse_op_kind(f.op);
  cfg.iteration.checkpoint_path = f.checkpoint;
  cfg.iteration.checkpoint_interval = f.checkpoint_every;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"capacity-lab: capacities of multidimensional constraints"};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  Flags f;

  auto* spectrum = app.add_subcommand("spectrum", "Perron root of one operator");
  auto* sweep = app.add_subcommand("sweep", "Perron roots over a range of sizes");
  for (auto* cmd : {spectrum, sweep}) {
    add_model_flags(cmd, cfg);
    add_spectral_flags(cmd, cfg, f);
    add_output_flags(cmd, cfg);
    cmd->add_option("--op", f.op, "standard | periodic | one-vertex")->capture_default_str();
  }

  auto* bounds = app.add_subcommand("bounds", "entropy bounds from a range of strip operators");
  add_model_flags(bounds, cfg);
  add_spectral_flags(bounds, cfg, f);
  add_output_flags(bounds, cfg);
  bounds->add_option("--one-vertex-n", f.one_vertex_n, "1-vertex sizes for the heuristic bracket");

  auto* oracle = app.add_subcommand("oracle-check", "counting identities against brute force");
  add_model_flags(oracle, cfg);
  oracle->add_option("--max-n", cfg.max_n, "largest side checked")->capture_default_str();
  oracle->add_option("--out", cfg.out, "report file (default stdout)");

  app.add_subcommand("list-models", "builtin models");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_code::ok : exit_code::config;
  }

  if (app.got_subcommand("list-models")) {
    std::cout << list_models();
    return exit_code::ok;
  }
  if (app.got_subcommand(spectrum)) cfg.task = Task::spectrum;
  if (app.got_subcommand(sweep)) cfg.task = Task::sweep;
  if (app.got_subcommand(bounds)) cfg.task = Task::bounds;
  if (app.got_subcommand(oracle)) cfg.task = Task::oracle_check;

  try {
    finish(cfg, f);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::config;
  }
  return run_experiment(cfg, std::cout, std::cerr);
}

#pragma once

// The pipeline behind the command-line tool: model selection, operator
// construction, spectral runs, bound assembly and report emission.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "caplab/constraint.hpp"
#include "caplab/spectral.hpp"
#include "caplab/transfer.hpp"

namespace caplab {

enum class Task { spectrum, sweep, bounds, oracle_check };
enum class OpKind { standard, periodic, one_vertex };

const char* to_string(OpKind k);
OpKind parse_op_kind(const std::string& text);
Representation parse_representation(const std::string& text);

namespace exit_code {
constexpr int ok = 0;
constexpr int failed_check = 1;
constexpr int config = 2;
constexpr int capacity = 3;
constexpr int not_converged = 4;
}  // namespace exit_code

struct ExperimentConfig {
  Task task = Task::spectrum;
  std::string model = "hard-square";
  int model_d = 2;  // monomer-dimer dimension
  bool same_axis_chain = true;
  std::filesystem::path model_file;

  OpKind op = OpKind::standard;
  std::vector<int> n;   // 2D sizes
  std::vector<int> n1;  // 3D slab sizes
  std::vector<int> n2;
  /// 2D: b1 only. 3D: in-layer boundaries along axes 1 and 2.
  BoundaryDescriptor boundary;
  Representation representation = Representation::automatic;
  IterationConfig iteration;
  /// bounds: sizes of the 1-vertex operators used for the heuristic bracket.
  std::vector<int> one_vertex_n;
  int max_n = 4;  // oracle-check

  std::filesystem::path out;  // empty: stdout
  std::string format = "csv";
  bool timing = false;

  void validate() const;
};

/// Resolves the configured model to a system.
ConstraintSystem resolve_model(const ExperimentConfig& cfg);
std::string model_label(const ExperimentConfig& cfg);

/// "5", "2..12", "2,4,6" or mixtures like "2..4,8".
std::vector<int> parse_int_list(const std::string& text);

/// Runs the task, writes results to cfg.out (or `out`), diagnostics to
/// `log`, and returns one of the exit codes above.
int run_experiment(const ExperimentConfig& cfg, std::ostream& out, std::ostream& log);

std::string list_models();

}  // namespace caplab

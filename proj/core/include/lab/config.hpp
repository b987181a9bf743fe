#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lab/control.hpp"
#include "lab/domain.hpp"
#include "lab/grid.hpp"
#include "lab/hammerstein.hpp"
#include "lab/ocp.hpp"
#include "lab/study.hpp"

namespace lab {

/// Data functions are restricted to a small expression table (sums of
/// separable factors) or a flat binary file, so configs stay hashable.
struct DataAxis {
  enum class Fn { constant, sin, cos, poly };
  Fn fn = Fn::constant;
  double k = 0.0;  // frequency for sin/cos (times pi), degree for poly
};

struct DataTerm {
  double coef = 1.0;
  DataAxis x, y;
};

struct DataSpec {
  std::vector<DataTerm> terms;
  std::string file;  // nx*ny little-endian f64, row-major; exclusive with terms
};

NodeField evaluate(const DataSpec& spec, const GridSpec& grid);

/// Fully-defaulted, schema-checked problem configuration. `effective` is
/// the canonical JSON (defaults filled, keys sorted) whose hash pins every
/// numerical output.
struct ProblemConfig {
  GridSpec grid;
  ClassParams params;
  std::optional<ShapeSpec> domain;
  std::optional<ShapeSpec> domain_b;
  std::optional<FamilySpec> family;
  DataSpec f, g, z_d;
  KernelSpec kernel;
  int n1 = 4, n2 = 4;
  std::vector<double> control_init;  // empty = box midpoint
  SolverOptions solver;
  HammersteinOptions hammerstein;
  OptimizerOptions optimizer;
  StudyOptions study;
  std::uint64_t seed = 1;
  std::string effective;  // canonical JSON after defaulting

  std::uint64_t hash() const;
  /// Seed overrides participate in the canonical form (they change outputs).
  void set_seed(std::uint64_t s);
};

/// Parses and validates a config file. Throws ConfigError carrying every
/// schema violation found (not just the first); duplicate keys and
/// malformed JSON are rejected outright.
ProblemConfig parse_config(const std::string& path);
ProblemConfig parse_config_text(const std::string& text);

/// Runs one CLI command end to end, writing artifacts and a run manifest
/// under out_dir. Returns the process exit code (0 ok, 1 numerical failure,
/// 2 usage error); failures leave a machine-readable error.json.
int dispatch(const std::string& command, const ProblemConfig& config,
             const std::string& out_dir);

const std::vector<std::string>& known_commands();

}  // namespace lab

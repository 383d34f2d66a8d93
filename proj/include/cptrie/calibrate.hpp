#pragma once

// Coarse-to-fine grid search for the parameter whose average risk over a
// node set lands within a tolerance of a target value.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cptrie/metrics.hpp"
#include "cptrie/samplers.hpp"

namespace cptrie {

struct ParameterRange {
  double lo = 0.0;
  double hi = 0.0;
};

enum class GridSpacing { integer, linear, log };

ParameterRange default_range(Method method);
GridSpacing grid_spacing(Method method);

// Ascending, deduplicated grid over [lo, hi] with at most `points` values.
// Integer grids hold every integer in range when they fit.
std::vector<double> make_grid(Method method, ParameterRange range, std::size_t points);

struct CalibrationSpec {
  Method method = Method::top_k;
  double target_risk = 1.0;
  double tolerance = 0.1;
  std::size_t grid_points = 2000;
  std::size_t max_refinements = 4;
  std::optional<ParameterRange> range;  // default_range(method) when unset
};

struct Probe {
  double theta = 0.0;
  bool achievable = false;
  double average_risk = 0.0;
  double average_recall = 0.0;
  double rse = 0.0;
  std::string failure;  // why the probe is unachievable
};

struct CalibrationResult {
  Method method = Method::top_k;
  double target_risk = 0.0;
  double tolerance = 0.0;
  double theta = 0.0;
  double achieved_risk = 0.0;
  double achieved_ar = 0.0;
  double achieved_rse = 0.0;
  std::size_t refinement_depth = 0;
  bool feasible = false;
  std::size_t n_nodes = 0;
  std::size_t probes_evaluated = 0;
  std::size_t degenerate_zipf_fallbacks = 0;
  // Both sides of the final bracket when integer granularity prevents a
  // feasible value.
  std::vector<Probe> neighbors;
  std::vector<ParameterRange> intervals;  // searched interval per round
  std::vector<std::string> warnings;
  std::vector<ExcludedNode> excluded_nodes;
};

// A probe hitting RankOverflow is marked unachievable rather than failing
// the search. Ties between equally close probes go to the smaller theta.
CalibrationResult calibrate(const CalibrationSpec& spec, const PreparedSet& prepared);

Probe run_probe(const PreparedSet& prepared, Method method, double theta);

std::string calibration_to_json(const CalibrationResult& result);

}  // namespace cptrie

#include "cptrie/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "cptrie/error.hpp"
#include "cptrie/parallel.hpp"

namespace cptrie {
namespace {

double distance(const Probe& p, double target) { return std::abs(p.average_risk - target); }

// Index of the achievable probe closest to target; probes are ascending in
// theta, so keeping the first strict improvement favours the smaller theta.
std::optional<std::size_t> closest(const std::vector<Probe>& probes, double target) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    if (!probes[i].achievable) continue;
    if (!best || distance(probes[i], target) < distance(probes[*best], target)) best = i;
  }
  return best;
}

// Adjacent achievable probes whose risks straddle the target. When several
// pairs bracket (non-monotone rules), the one with the nearer endpoint wins.
std::optional<std::size_t> bracket(const std::vector<Probe>& probes, double target) {
  std::optional<std::size_t> best;
  double best_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < probes.size(); ++i) {
    const Probe& a = probes[i];
    const Probe& b = probes[i + 1];
    if (!a.achievable || !b.achievable) continue;
    if ((a.average_risk - target) * (b.average_risk - target) >= 0.0) continue;
    const double gap = std::min(distance(a, target), distance(b, target));
    if (gap < best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  return best;
}

void accept(CalibrationResult& result, const Probe& p) {
  result.theta = p.theta;
  result.achieved_risk = p.average_risk;
  result.achieved_ar = p.average_recall;
  result.achieved_rse = p.rse;
}

nlohmann::ordered_json probe_json(const Probe& p) {
  nlohmann::ordered_json j;
  j["theta"] = p.theta;
  j["achievable"] = p.achievable;
  if (p.achievable) {
    j["average_risk"] = p.average_risk;
    j["average_recall"] = p.average_recall;
    j["rse"] = p.rse;
  } else {
    j["failure"] = p.failure;
  }
  return j;
}

}  // namespace

ParameterRange default_range(Method method) {
  switch (method) {
    case Method::top_k: return {1.0, 2000.0};
    case Method::top_p: return {0.01, 1.0};
    case Method::eta: return {1e-6, 1.0};
    case Method::adaptive: return {1e-7, 1e-2};
    case Method::mirostat: return {0.5, 10.0};
  }
  return {0.0, 1.0};
}

GridSpacing grid_spacing(Method method) {
  switch (method) {
    case Method::top_k: return GridSpacing::integer;
    case Method::eta:
    case Method::adaptive: return GridSpacing::log;
    case Method::top_p:
    case Method::mirostat: return GridSpacing::linear;
  }
  return GridSpacing::linear;
}

std::vector<double> make_grid(Method method, ParameterRange range, std::size_t points) {
  if (!(range.lo < range.hi)) throw Error(ErrorCode::invalid_argument, "parameter range needs lo < hi");
  if (points < 2) throw Error(ErrorCode::invalid_argument, "grid needs at least 2 points");
  std::vector<double> grid;
  grid.reserve(points);
  const double steps = static_cast<double>(points - 1);
  switch (grid_spacing(method)) {
    case GridSpacing::integer: {
      const double lo = std::ceil(range.lo);
      const double hi = std::floor(range.hi);
      if (lo > hi) throw Error(ErrorCode::invalid_argument, "integer range contains no integers");
      if (hi - lo + 1.0 <= static_cast<double>(points)) {
        for (double k = lo; k <= hi; k += 1.0) grid.push_back(k);
      } else {
        for (std::size_t i = 0; i < points; ++i) grid.push_back(std::round(lo + (hi - lo) * static_cast<double>(i) / steps));
      }
      break;
    }
    case GridSpacing::linear:
      for (std::size_t i = 0; i < points; ++i) grid.push_back(range.lo + (range.hi - range.lo) * static_cast<double>(i) / steps);
      grid.back() = range.hi;
      break;
    case GridSpacing::log: {
      if (!(range.lo > 0.0)) throw Error(ErrorCode::invalid_argument, "log-spaced range needs lo > 0");
      const double a = std::log(range.lo);
      const double b = std::log(range.hi);
      for (std::size_t i = 0; i < points; ++i) grid.push_back(std::exp(a + (b - a) * static_cast<double>(i) / steps));
      grid.front() = range.lo;
      grid.back() = range.hi;
      break;
    }
  }
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

Probe run_probe(const PreparedSet& prepared, Method method, double theta) {
  Probe probe;
  probe.theta = theta;
  try {
    const AggregateReport report = evaluate(prepared, SamplerConfig{method, theta});
    probe.achievable = true;
    probe.average_risk = report.average_risk;
    probe.average_recall = report.average_recall;
    probe.rse = report.rse;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::rank_overflow && e.code() != ErrorCode::invalid_argument) throw;
    probe.failure = e.what();
  }
  return probe;
}

CalibrationResult calibrate(const CalibrationSpec& spec, const PreparedSet& prepared) {
  if (!(spec.target_risk >= 0.0)) throw Error(ErrorCode::invalid_argument, "target risk must be non-negative");
  if (!(spec.tolerance >= 0.0)) throw Error(ErrorCode::invalid_argument, "tolerance must be non-negative");
  if (prepared.nodes.empty()) throw Error(ErrorCode::uncovered_support, "every node was excluded");

  CalibrationResult result;
  result.method = spec.method;
  result.target_risk = spec.target_risk;
  result.tolerance = spec.tolerance;
  result.n_nodes = prepared.nodes.size();
  result.excluded_nodes = prepared.excluded;
  for (const auto& e : prepared.excluded) {
    result.warnings.push_back("excluded \"" + e.prefix_id + "\" (" + e.reason + ")");
  }

  ParameterRange range = spec.range.value_or(default_range(spec.method));
  std::optional<Probe> best;
  for (std::size_t depth = 0; depth <= spec.max_refinements; ++depth) {
    result.refinement_depth = depth;
    result.intervals.push_back(range);
    const std::vector<double> grid = make_grid(spec.method, range, spec.grid_points);
    std::vector<Probe> probes(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) { probes[i] = run_probe(prepared, spec.method, grid[i]); });
    result.probes_evaluated += probes.size();

    if (const auto i = closest(probes, spec.target_risk)) {
      const Probe& p = probes[*i];
      const bool better = !best || distance(p, spec.target_risk) < distance(*best, spec.target_risk) ||
                          (distance(p, spec.target_risk) == distance(*best, spec.target_risk) && p.theta < best->theta);
      if (better) best = p;
    }
    if (best && distance(*best, spec.target_risk) <= spec.tolerance) {
      accept(result, *best);
      result.feasible = true;
      break;
    }

    const auto b = bracket(probes, spec.target_risk);
    if (!b) {
      result.warnings.push_back("target risk outside the achievable range of the searched interval");
      break;
    }
    const Probe& left = probes[*b];
    const Probe& right = probes[*b + 1];
    if (grid_spacing(spec.method) == GridSpacing::integer && right.theta - left.theta <= 1.0) {
      result.neighbors = {left, right};
      result.warnings.push_back("consecutive integer parameters straddle the tolerance band");
      break;
    }
    range = ParameterRange{left.theta, right.theta};
    if (depth == spec.max_refinements) {
      result.neighbors = {left, right};
      result.warnings.push_back("refinement budget exhausted");
    }
  }

  if (!result.feasible) {
    if (!best) throw Error(ErrorCode::rank_overflow, "no probe was achievable; re-export with a larger top-N");
    accept(result, *best);
  }

  if (spec.method == Method::mirostat) {
    result.degenerate_zipf_fallbacks = evaluate(prepared, SamplerConfig{spec.method, result.theta}).degenerate_zipf_fallbacks;
    if (result.degenerate_zipf_fallbacks > 0)
      result.warnings.push_back(std::to_string(result.degenerate_zipf_fallbacks) +
                                " node(s) with a degenerate Zipf fit scored at full listed size");
  }
  return result;
}

std::string calibration_to_json(const CalibrationResult& result) {
  nlohmann::ordered_json j;
  j["method"] = std::string(method_name(result.method));
  j["theta"] = result.theta;
  j["n_nodes"] = result.n_nodes;
  j["average_recall"] = result.achieved_ar;
  j["average_risk"] = result.achieved_risk;
  j["rse"] = result.achieved_rse;
  j["target_risk"] = result.target_risk;
  j["tolerance"] = result.tolerance;
  j["feasible"] = result.feasible;
  j["refinement_depth"] = result.refinement_depth;
  j["probes_evaluated"] = result.probes_evaluated;
  auto& intervals = j["intervals"] = nlohmann::ordered_json::array();
  for (const auto& r : result.intervals) intervals.push_back({r.lo, r.hi});
  auto& neighbors = j["neighbors"] = nlohmann::ordered_json::array();
  for (const auto& p : result.neighbors) neighbors.push_back(probe_json(p));
  auto& excluded = j["excluded_nodes"] = nlohmann::ordered_json::array();
  for (const auto& e : result.excluded_nodes) {
    excluded.push_back({{"prefix_id", e.prefix_id}, {"reason", e.reason}, {"uncovered_support", e.uncovered_support}});
  }
  j["degenerate_zipf_fallbacks"] = result.degenerate_zipf_fallbacks;
  j["warnings"] = result.warnings;
  return j.dump(2);
}

}  // namespace cptrie

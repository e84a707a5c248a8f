#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "fairbench/format.hpp"
#include "fairbench/generator.hpp"
#include "fairbench/measures.hpp"

namespace fairbench {

class CalibrationRangeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CalibrationOptions {
  std::size_t reps = 5;
  double beta_max = 12.0;
  double tolerance = 0.02;      // accepted |mean assortativity - target|
  double stop_tolerance = 0.005;  // bisection stops early inside this band
  std::size_t max_probes = 40;
};

struct CalibrationResult {
  double beta = 0.0;
  double assortativity = 0.0;  // mean over the probe graphs at `beta`
  std::size_t probes = 0;
};

/// Mean assortativity over `reps` graphs; seeds derived from config.seed so
/// every probe shares the same random streams.
inline double mean_assortativity(GenConfig config, double beta, std::size_t reps) {
  config.beta = beta;
  const std::uint64_t base = config.seed;
  double acc = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    config.seed = derive_seed(base, {0xCA11B8A7EULL, r});
    auto gen = generate(config);
    acc += assortativity(gen.graph, gen.labels);
  }
  return acc / static_cast<double>(reps);
}

/// Bisection on beta in [0, beta_max] for a target mean assortativity.
/// Throws CalibrationRangeError if the target is outside the reachable range.
inline CalibrationResult calibrate_beta(const GenConfig& config, double target, const CalibrationOptions& opt = {}) {
  if (opt.reps == 0) throw InputError("calibration needs at least one repetition");
  CalibrationResult best;
  double best_err = INFINITY;
  auto probe = [&](double beta) {
    double a = mean_assortativity(config, beta, opt.reps);
    ++best.probes;
    if (std::abs(a - target) < best_err) {
      best_err = std::abs(a - target);
      best.beta = beta;
      best.assortativity = a;
    }
    return a;
  };

  double lo = 0.0, hi = opt.beta_max;
  double f_lo = probe(lo);
  if (std::abs(f_lo - target) <= opt.stop_tolerance) return best;
  if (target < f_lo - opt.tolerance) {
    throw CalibrationRangeError("target assortativity " + format_double(target) + " is below the beta=0 level " +
                                format_double(f_lo));
  }
  double f_hi = probe(hi);
  if (target > f_hi + opt.tolerance) {
    throw CalibrationRangeError("target assortativity " + format_double(target) + " exceeds the beta=" +
                                format_double(hi) + " level " + format_double(f_hi));
  }
  if (std::abs(f_hi - target) <= opt.stop_tolerance) return best;

  while (best.probes < opt.max_probes && best_err > opt.stop_tolerance && hi - lo > 1e-4) {
    double mid = 0.5 * (lo + hi);
    double f = probe(mid);
    if (f < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (best_err > opt.tolerance) {
    throw CalibrationRangeError("bisection ended " + format_double(best_err) + " away from target " +
                                format_double(target));
  }
  return best;
}

}  // namespace fairbench

#pragma once

#include <map>
#include <string>
#include <vector>

#include "artkit/evaluate.hpp"

namespace artkit {

/// Success proportion with a normal-approximation (Wald) 95% interval.
struct Rate {
  std::size_t successes = 0;
  std::size_t total = 0;
  double rate = 0.0;        // successes / total
  double half_width = 0.0;  // 1.96 * sqrt(p(1-p)/n)
};

Rate wald_rate(std::size_t successes, std::size_t total);

struct MeanSd {
  std::size_t count = 0;
  double mean = 0.0;
  double sd = 0.0;  // population standard deviation
};

struct AggregateStats {
  std::size_t objects = 0;
  Rate link_success;
  Rate joint_success;
  /// Failure kind -> number of objects whose failure is that kind.
  std::map<std::string, std::size_t> failure_counts;
  /// Failure kind -> percentage of all objects. Kinds with no failures are omitted.
  std::map<std::string, double> failure_percent;
  MeanSd position_error, orientation_error, axis_error, origin_error, limit_range_error, limit_direction_error,
      chamfer;
};

/// Folds per-object reports. Throws EvalError on empty input.
AggregateStats aggregate(const std::vector<EvalReport>& reports);

std::string stats_to_json(const AggregateStats& stats);
std::string stats_to_text(const AggregateStats& stats);

struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double accuracy = 0.0;
};

/// Critic verdicts (predicted) against ground-truth verdicts. Throws EvalError
/// on length mismatch.
ConfusionMatrix critic_agreement(const std::vector<bool>& critic, const std::vector<bool>& gt);

}  // namespace artkit

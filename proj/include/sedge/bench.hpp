#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sedge/labels.hpp"
#include "sedge/tensor.hpp"

namespace sedge {

// Zhang-Suen skeletonization: two-subiteration parallel thinning run to
// convergence, 8-connected, unit width. Running to convergence makes the
// operation idempotent by construction.
BinaryMap thin(const BinaryMap& m);

struct MatchResult {
  long long tp = 0, fp = 0, fn = 0;
  // (pred pixel, gt pixel) as row-major linear indices.
  std::vector<std::pair<int, int>> pairs;
};

// Exact maximum-cardinality one-to-one matching between predicted and
// ground-truth pixels under Euclidean distance <= max_dist, via augmenting
// paths over the distance-feasible graph. Candidate edges are visited
// nearest-first in a fixed order, so results are deterministic.
MatchResult match_boundaries(const BinaryMap& pred, const BinaryMap& gt,
                             double max_dist);

struct ThresholdCounts {
  long long tp = 0, fp = 0, fn = 0;
};

// Per-class (threshold, TP, FP, FN) aggregates over a dataset.
struct PRTable {
  std::vector<double> thresholds;  // strictly increasing
  std::vector<std::vector<ThresholdCounts>> per_class;  // [class][threshold]
  std::vector<long long> gt_totals;                     // per class

  int num_classes() const { return static_cast<int>(per_class.size()); }
};

// Counts for one image: binarize at every threshold, thin, match. The
// probability planes are (1, K, H, W); the ground truth must already be
// single-pixel wide. Halving (when enabled) downsamples probabilities
// bilinearly and OR-pools + re-thins the ground truth first.
std::vector<std::vector<ThresholdCounts>> pr_counts_for_image(
    const Tensor& probs, const EdgeLabelStack& gt_eval,
    const std::vector<double>& thresholds, double tolerance_frac, bool halve);

class PrAccumulator {
 public:
  PrAccumulator(int num_classes, std::vector<double> thresholds,
                double tolerance_frac, bool halve);

  void add_image(const Tensor& probs, const EdgeLabelStack& gt_eval);
  void add_counts(const std::vector<std::vector<ThresholdCounts>>& counts,
                  const EdgeLabelStack& gt_eval, bool halve_applied);

  const PRTable& table() const { return table_; }
  double tolerance_frac() const { return tolerance_frac_; }
  bool halve() const { return halve_; }

 private:
  PRTable table_;
  double tolerance_frac_;
  bool halve_;
};

std::vector<double> uniform_thresholds(int count);  // i/(count+1), i=1..count

struct ClassScore {
  double mf = 0.0;             // maximum F at the optimal dataset threshold
  double ods_threshold = 0.0;  // the threshold attaining it
  double ap = 0.0;
  long long gt_count = 0;      // total ground-truth pixels over the dataset
  bool included = false;       // false when the class never appears
};

// F(t) = 2 P R / (P + R) on dataset-aggregated counts; 0/0 gives F = 0.
// One optimal threshold per class over the whole dataset.
std::vector<ClassScore> mf_ods(const PRTable& table);

// Area under the precision-recall envelope: points sorted by recall, each
// precision replaced by the running maximum at >= that recall, integrated
// as rectangles from R = 0.
std::vector<double> ap_scores(const PRTable& table);

struct EvalReport {
  std::vector<std::string> class_names;
  std::vector<ClassScore> classes;  // mf/ap merged per class
  double mean_mf = 0.0;
  double mean_ap = 0.0;
  std::vector<double> thresholds;
  double tolerance_frac = 0.0;
  bool halve = false;
};

EvalReport summarize(const PRTable& table, std::vector<std::string> names,
                     double tolerance_frac, bool halve);

}  // namespace sedge

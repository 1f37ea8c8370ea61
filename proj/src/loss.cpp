#include "sedge/loss.hpp"

namespace sedge {

double compute_beta(const EdgeLabelStack& gt) {
  const std::size_t total = gt.data.size();
  check_config(total > 0, "beta: empty ground truth");
  return 1.0 - static_cast<double>(gt.count()) / static_cast<double>(total);
}

double compute_beta_binary(const BinaryMap& gt_any) {
  const std::size_t total = gt_any.v.size();
  check_config(total > 0, "beta: empty ground truth");
  return 1.0 -
         static_cast<double>(gt_any.count()) / static_cast<double>(total);
}

double compute_beta_multiclass(const SegMap& gt_labels) {
  const std::size_t total = gt_labels.ids.size();
  check_config(total > 0, "beta: empty ground truth");
  std::size_t zeros = 0;
  for (uint8_t v : gt_labels.ids) zeros += v == 0;
  return static_cast<double>(zeros) / static_cast<double>(total);
}

}  // namespace sedge

#include "sedge/bench.hpp"

#include <algorithm>
#include <cmath>

namespace sedge {

namespace {

// Neighborhood P2..P9, clockwise from north.
constexpr int kDy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr int kDx[8] = {0, 1, 1, 1, 0, -1, -1, -1};

inline int neighbor(const BinaryMap& m, int y, int x, int i) {
  int ny = y + kDy[i], nx = x + kDx[i];
  if (ny < 0 || ny >= m.h || nx < 0 || nx >= m.w) return 0;
  return m.at(ny, nx) ? 1 : 0;
}

// One parallel sub-iteration; `phase` 0 uses (P2*P4*P6, P4*P6*P8),
// phase 1 uses (P2*P4*P8, P2*P6*P8). Returns the number of deletions.
int thin_subiteration(BinaryMap& m, int phase) {
  std::vector<int> doomed;
  for (int y = 0; y < m.h; ++y) {
    for (int x = 0; x < m.w; ++x) {
      if (!m.at(y, x)) continue;
      int p[8];
      int b = 0;
      for (int i = 0; i < 8; ++i) b += p[i] = neighbor(m, y, x, i);
      if (b < 2 || b > 6) continue;
      int a = 0;
      for (int i = 0; i < 8; ++i) a += (p[i] == 0 && p[(i + 1) % 8] == 1);
      if (a != 1) continue;
      // p[0]=P2 p[2]=P4 p[4]=P6 p[6]=P8
      int c1 = phase == 0 ? p[0] * p[2] * p[4] : p[0] * p[2] * p[6];
      int c2 = phase == 0 ? p[2] * p[4] * p[6] : p[0] * p[4] * p[6];
      if (c1 == 0 && c2 == 0) doomed.push_back(y * m.w + x);
    }
  }
  for (int idx : doomed) m.v[idx] = 0;
  return static_cast<int>(doomed.size());
}

}  // namespace

BinaryMap thin(const BinaryMap& m) {
  BinaryMap out = m;
  for (auto& b : out.v) b = b ? 1 : 0;
  while (thin_subiteration(out, 0) + thin_subiteration(out, 1) > 0) {
  }
  return out;
}

namespace {

struct Pixel {
  int y, x;
};

std::vector<Pixel> collect(const BinaryMap& m) {
  std::vector<Pixel> px;
  for (int y = 0; y < m.h; ++y)
    for (int x = 0; x < m.w; ++x)
      if (m.at(y, x)) px.push_back({y, x});
  return px;
}

// Kuhn's augmenting path search over the precomputed candidate lists.
bool try_augment(int p, const std::vector<std::vector<int>>& cand,
                 std::vector<char>& visited, std::vector<int>& gt_match) {
  for (int g : cand[p]) {
    if (visited[g]) continue;
    visited[g] = 1;
    if (gt_match[g] < 0 || try_augment(gt_match[g], cand, visited, gt_match)) {
      gt_match[g] = p;
      return true;
    }
  }
  return false;
}

}  // namespace

MatchResult match_boundaries(const BinaryMap& pred, const BinaryMap& gt,
                             double max_dist) {
  check_config(pred.h == gt.h && pred.w == gt.w,
               "match: map size mismatch");
  MatchResult r;
  std::vector<Pixel> ps = collect(pred);
  std::vector<Pixel> gs = collect(gt);
  if (ps.empty() || gs.empty()) {
    r.fp = static_cast<long long>(ps.size());
    r.fn = static_cast<long long>(gs.size());
    return r;
  }

  // Spatial binning: cell edge >= max_dist, so all candidates of a pixel
  // live in the 3x3 cell neighborhood.
  const int cell = std::max(1, static_cast<int>(std::ceil(max_dist)));
  const int gw = (gt.w + cell - 1) / cell;
  const int gh = (gt.h + cell - 1) / cell;
  std::vector<std::vector<int>> bins(static_cast<size_t>(gw) * gh);
  for (int i = 0; i < static_cast<int>(gs.size()); ++i)
    bins[(gs[i].y / cell) * gw + gs[i].x / cell].push_back(i);

  const double max_d2 = max_dist * max_dist;
  std::vector<std::vector<int>> cand(ps.size());
  std::vector<std::pair<double, int>> scored;
  for (int i = 0; i < static_cast<int>(ps.size()); ++i) {
    scored.clear();
    int cy = ps[i].y / cell, cx = ps[i].x / cell;
    for (int by = std::max(0, cy - 1); by <= std::min(gh - 1, cy + 1); ++by) {
      for (int bx = std::max(0, cx - 1); bx <= std::min(gw - 1, cx + 1);
           ++bx) {
        for (int gi : bins[static_cast<size_t>(by) * gw + bx]) {
          double dy = ps[i].y - gs[gi].y, dx = ps[i].x - gs[gi].x;
          double d2 = dy * dy + dx * dx;
          if (d2 <= max_d2) scored.emplace_back(d2, gi);
        }
      }
    }
    std::sort(scored.begin(), scored.end());
    cand[i].reserve(scored.size());
    for (auto& [d2, gi] : scored) cand[i].push_back(gi);
  }

  std::vector<int> gt_match(gs.size(), -1);
  std::vector<char> visited(gs.size(), 0);
  long long matched = 0;
  for (int i = 0; i < static_cast<int>(ps.size()); ++i) {
    std::fill(visited.begin(), visited.end(), 0);
    if (try_augment(i, cand, visited, gt_match)) ++matched;
  }

  r.tp = matched;
  r.fp = static_cast<long long>(ps.size()) - matched;
  r.fn = static_cast<long long>(gs.size()) - matched;
  for (int g = 0; g < static_cast<int>(gs.size()); ++g)
    if (gt_match[g] >= 0)
      r.pairs.emplace_back(ps[gt_match[g]].y * pred.w + ps[gt_match[g]].x,
                           gs[g].y * gt.w + gs[g].x);
  return r;
}

std::vector<double> uniform_thresholds(int count) {
  check_config(count >= 1, "thresholds: count must be >= 1");
  std::vector<double> t(count);
  for (int i = 1; i <= count; ++i)
    t[i - 1] = static_cast<double>(i) / (count + 1);
  return t;
}

std::vector<std::vector<ThresholdCounts>> pr_counts_for_image(
    const Tensor& probs, const EdgeLabelStack& gt_eval,
    const std::vector<double>& thresholds, double tolerance_frac,
    bool halve) {
  check_data(probs.c == gt_eval.k && probs.h == gt_eval.h &&
                 probs.w == gt_eval.w && probs.n == 1,
             "pr: prediction/ground-truth shape mismatch");
  Tensor p = halve ? bilinear_half(probs) : probs;
  const int h = p.h, w = p.w;
  const double max_dist =
      tolerance_frac * std::sqrt(static_cast<double>(h) * h +
                                 static_cast<double>(w) * w);

  std::vector<std::vector<ThresholdCounts>> counts(
      gt_eval.k, std::vector<ThresholdCounts>(thresholds.size()));
  BinaryMap bin(h, w);
  for (int k = 0; k < gt_eval.k; ++k) {
    BinaryMap gt_thin = halve ? thin(or_pool_half(gt_eval.channel(k)))
                              : thin(gt_eval.channel(k));
    const float* plane = p.plane(0, k);
    for (size_t ti = 0; ti < thresholds.size(); ++ti) {
      const float t = static_cast<float>(thresholds[ti]);
      for (size_t i = 0; i < bin.v.size(); ++i) bin.v[i] = plane[i] >= t;
      MatchResult m = match_boundaries(thin(bin), gt_thin, max_dist);
      counts[k][ti] = {m.tp, m.fp, m.fn};
    }
  }
  return counts;
}

PrAccumulator::PrAccumulator(int num_classes, std::vector<double> thresholds,
                             double tolerance_frac, bool halve)
    : tolerance_frac_(tolerance_frac), halve_(halve) {
  check_config(num_classes >= 1, "pr: need at least one class");
  check_config(!thresholds.empty(), "pr: empty threshold grid");
  for (size_t i = 0; i + 1 < thresholds.size(); ++i)
    check_config(thresholds[i] < thresholds[i + 1],
                 "pr: thresholds must be strictly increasing");
  table_.thresholds = std::move(thresholds);
  table_.per_class.assign(
      num_classes, std::vector<ThresholdCounts>(table_.thresholds.size()));
  table_.gt_totals.assign(num_classes, 0);
}

void PrAccumulator::add_image(const Tensor& probs,
                              const EdgeLabelStack& gt_eval) {
  add_counts(pr_counts_for_image(probs, gt_eval, table_.thresholds,
                                 tolerance_frac_, halve_),
             gt_eval, halve_);
}

void PrAccumulator::add_counts(
    const std::vector<std::vector<ThresholdCounts>>& counts,
    const EdgeLabelStack& gt_eval, bool halve_applied) {
  check_data(static_cast<int>(counts.size()) == table_.num_classes(),
             "pr: class count mismatch");
  for (int k = 0; k < table_.num_classes(); ++k) {
    for (size_t ti = 0; ti < table_.thresholds.size(); ++ti) {
      table_.per_class[k][ti].tp += counts[k][ti].tp;
      table_.per_class[k][ti].fp += counts[k][ti].fp;
      table_.per_class[k][ti].fn += counts[k][ti].fn;
    }
    BinaryMap gt_thin = halve_applied
                            ? thin(or_pool_half(gt_eval.channel(k)))
                            : thin(gt_eval.channel(k));
    table_.gt_totals[k] += gt_thin.count();
  }
}

namespace {

inline double precision(const ThresholdCounts& c) {
  long long denom = c.tp + c.fp;
  return denom == 0 ? 0.0 : static_cast<double>(c.tp) / denom;
}

inline double recall(const ThresholdCounts& c) {
  long long denom = c.tp + c.fn;
  return denom == 0 ? 0.0 : static_cast<double>(c.tp) / denom;
}

inline double fmeasure(double p, double r) {
  return (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

}  // namespace

std::vector<ClassScore> mf_ods(const PRTable& table) {
  check_config(!table.per_class.empty() && !table.thresholds.empty(),
               "mf: empty table");
  std::vector<ClassScore> out(table.num_classes());
  for (int k = 0; k < table.num_classes(); ++k) {
    ClassScore& s = out[k];
    s.gt_count = table.gt_totals[k];
    s.included = s.gt_count > 0;
    s.ods_threshold = table.thresholds[0];
    for (size_t ti = 0; ti < table.thresholds.size(); ++ti) {
      const auto& c = table.per_class[k][ti];
      double f = fmeasure(precision(c), recall(c));
      if (f > s.mf) {
        s.mf = f;
        s.ods_threshold = table.thresholds[ti];
      }
    }
  }
  return out;
}

std::vector<double> ap_scores(const PRTable& table) {
  check_config(!table.per_class.empty() && !table.thresholds.empty(),
               "ap: empty table");
  std::vector<double> out(table.num_classes(), 0.0);
  for (int k = 0; k < table.num_classes(); ++k) {
    std::vector<std::pair<double, double>> pts;  // (recall, precision)
    pts.reserve(table.thresholds.size());
    for (const auto& c : table.per_class[k])
      pts.emplace_back(recall(c), precision(c));
    std::sort(pts.begin(), pts.end());
    // Precision envelope: running max from the high-recall end.
    for (int i = static_cast<int>(pts.size()) - 2; i >= 0; --i)
      pts[i].second = std::max(pts[i].second, pts[i + 1].second);
    double area = 0.0, prev_r = 0.0;
    for (size_t i = 0; i < pts.size(); ++i) {
      if (i + 1 < pts.size() && pts[i + 1].first == pts[i].first) continue;
      area += (pts[i].first - prev_r) * pts[i].second;
      prev_r = pts[i].first;
    }
    out[k] = area;
  }
  return out;
}

EvalReport summarize(const PRTable& table, std::vector<std::string> names,
                     double tolerance_frac, bool halve) {
  EvalReport rep;
  rep.class_names = std::move(names);
  rep.classes = mf_ods(table);
  std::vector<double> aps = ap_scores(table);
  for (int k = 0; k < table.num_classes(); ++k) rep.classes[k].ap = aps[k];
  rep.thresholds = table.thresholds;
  rep.tolerance_frac = tolerance_frac;
  rep.halve = halve;
  int included = 0;
  for (const auto& c : rep.classes) {
    if (!c.included) continue;
    rep.mean_mf += c.mf;
    rep.mean_ap += c.ap;
    ++included;
  }
  if (included > 0) {
    rep.mean_mf /= included;
    rep.mean_ap /= included;
  }
  return rep;
}

}  // namespace sedge

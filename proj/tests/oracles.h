#pragma once

// Reference implementations used as test oracles. Everything here is written
// the slow, obvious way (linear scans, std::set, hand-rolled linear algebra)
// and deliberately avoids calling into the library code it checks.

#include "irs/model.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace oracle {

using Cell = std::tuple<long, long, long>;
using CellSet = std::set<Cell>;

inline Cell cell_of(double x, double y, double z, double s) {
  return {static_cast<long>(std::floor(x / s)), static_cast<long>(std::floor(y / s)),
          static_cast<long>(std::floor(z / s))};
}

inline CellSet cells(const irs::PointCloud& pts, double s) {
  CellSet out;
  for (const auto& p : pts) out.insert(cell_of(p.x(), p.y(), p.z(), s));
  return out;
}

inline size_t common(const CellSet& a, const CellSet& b) {
  size_t n = 0;
  for (const auto& c : a) n += b.count(c);
  return n;
}

inline double min_overlap(const CellSet& a, const CellSet& b) {
  if (a.empty() || b.empty()) return 0.0;
  return static_cast<double>(common(a, b)) / static_cast<double>(std::min(a.size(), b.size()));
}

inline double iou(const CellSet& a, const CellSet& b) {
  const size_t i = common(a, b);
  const size_t u = a.size() + b.size() - i;
  return u == 0 ? 0.0 : static_cast<double>(i) / static_cast<double>(u);
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline std::vector<double> unit(std::vector<double> v) {
  const double n = std::sqrt(dot(v, v));
  for (auto& x : v) x /= n;
  return v;
}

// --- geometry -------------------------------------------------------------

inline irs::PointCloud box_filter(const irs::PointCloud& cloud, const irs::Vec3& c, double side) {
  irs::PointCloud out;
  for (const auto& p : cloud) {
    if (std::abs(p.x() - c.x()) <= side / 2 && std::abs(p.y() - c.y()) <= side / 2) out.push_back(p);
  }
  return out;
}

inline std::pair<irs::Vec3, irs::Vec3> fold_minmax(const irs::PointCloud& pts) {
  double lo[3] = {1e300, 1e300, 1e300}, hi[3] = {-1e300, -1e300, -1e300};
  for (const auto& p : pts) {
    for (int k = 0; k < 3; ++k) {
      lo[k] = std::min(lo[k], p[k]);
      hi[k] = std::max(hi[k], p[k]);
    }
  }
  return {irs::Vec3(lo[0], lo[1], lo[2]), irs::Vec3(hi[0], hi[1], hi[2])};
}

// Pinhole back-projection, one scalar equation at a time.
inline irs::Vec3 pinhole(double u, double v, double d, double fx, double fy, double cx, double cy,
                         const double R[3][3], const double t[3]) {
  const double xc = (u - cx) * d / fx;
  const double yc = (v - cy) * d / fy;
  const double zc = d;
  double w[3];
  for (int r = 0; r < 3; ++r) w[r] = R[r][0] * xc + R[r][1] * yc + R[r][2] * zc + t[r];
  return {w[0], w[1], w[2]};
}

// Eigenvector of the smallest eigenvalue of the point covariance via cyclic
// Jacobi rotations.
inline std::array<double, 3> smallest_eigenvector(const irs::PointCloud& pts) {
  double mean[3] = {0, 0, 0};
  for (const auto& p : pts) {
    for (int k = 0; k < 3; ++k) mean[k] += p[k];
  }
  for (double& m : mean) m /= static_cast<double>(pts.size());
  double a[3][3] = {};
  for (const auto& p : pts) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) a[i][j] += (p[i] - mean[i]) * (p[j] - mean[j]);
    }
  }
  double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int sweep = 0; sweep < 100; ++sweep) {
    const double off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    if (off < 1e-30) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (int k = 0; k < 3; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i < 3; ++i) {
    if (a[i][i] < a[best][best]) best = i;
  }
  return {v[0][best], v[1][best], v[2][best]};
}

// Plain O(n^2) DBSCAN; returns the indices of the largest cluster (ties: the
// cluster holding the lowest index).
inline std::vector<size_t> largest_cluster(const irs::PointCloud& pts, double eps, int min_pts) {
  const size_t n = pts.size();
  std::vector<std::vector<size_t>> nb(n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if ((pts[i] - pts[j]).norm() <= eps) nb[i].push_back(j);
    }
  }
  std::vector<int> label(n, -1);
  int next = 0;
  for (size_t i = 0; i < n; ++i) {
    if (label[i] != -1 || static_cast<int>(nb[i].size()) < min_pts) continue;
    std::vector<size_t> stack{i};
    label[i] = next;
    while (!stack.empty()) {
      const size_t p = stack.back();
      stack.pop_back();
      if (static_cast<int>(nb[p].size()) < min_pts) continue;
      for (size_t q : nb[p]) {
        if (label[q] == -1) {
          label[q] = next;
          stack.push_back(q);
        }
      }
    }
    ++next;
  }
  int best = -1;
  size_t best_n = 0, best_first = n;
  for (int c = 0; c < next; ++c) {
    size_t cnt = 0, first = n;
    for (size_t i = 0; i < n; ++i) {
      if (label[i] == c) {
        ++cnt;
        first = std::min(first, i);
      }
    }
    if (cnt > best_n || (cnt == best_n && first < best_first)) {
      best = c;
      best_n = cnt;
      best_first = first;
    }
  }
  std::vector<size_t> out;
  for (size_t i = 0; i < n; ++i) {
    if (best >= 0 && label[i] == best) out.push_back(i);
  }
  return out;
}

// --- rooms ------------------------------------------------------------------

struct Box2 {
  int id;
  double x0, y0, x1, y1, volume;
};

// Containing box with the smallest volume, else nearest footprint in xy.
inline int assign_linear(double x, double y, const std::vector<Box2>& boxes) {
  int best = -1;
  double best_vol = 0.0;
  for (const auto& b : boxes) {
    if (x >= b.x0 && x <= b.x1 && y >= b.y0 && y <= b.y1) {
      if (best < 0 || b.volume < best_vol) {
        best = b.id;
        best_vol = b.volume;
      }
    }
  }
  if (best >= 0) return best;
  double best_d = 1e300;
  for (const auto& b : boxes) {
    const double dx = std::max({b.x0 - x, 0.0, x - b.x1});
    const double dy = std::max({b.y0 - y, 0.0, y - b.y1});
    const double d = std::sqrt(dx * dx + dy * dy);
    if (d < best_d) {
      best_d = d;
      best = b.id;
    }
  }
  return best;
}

// --- fusion -----------------------------------------------------------------

struct Obs {
  std::pair<int, int> key;  // (frame, mask)
  int room = 0;
  irs::PointCloud points;
  std::vector<double> feature;  // unit
};

// Exhaustive fusion: every observation is scored against every instance of
// its room (no spatial index); the passer with the largest i1*i2 wins, ties
// to the earliest instance. Returns groups of observation keys.
inline std::vector<std::vector<std::pair<int, int>>> brute_force_fusion(const std::vector<Obs>& obs,
                                                                        double voxel, double tau_g,
                                                                        double tau_s) {
  struct Inst {
    int room;
    CellSet cells;
    std::vector<double> sum;  // point-weighted sum of unit features
    std::vector<std::pair<int, int>> members;
  };
  std::vector<Inst> insts;
  for (const auto& o : obs) {
    const CellSet oc = cells(o.points, voxel);
    int best = -1;
    double best_score = -1.0;
    for (size_t i = 0; i < insts.size(); ++i) {
      if (insts[i].room != o.room) continue;
      const double i1 = min_overlap(insts[i].cells, oc);
      const double i2 = dot(unit(insts[i].sum), o.feature);
      if (i1 >= tau_g && i2 >= tau_s && i1 * i2 > best_score) {
        best = static_cast<int>(i);
        best_score = i1 * i2;
      }
    }
    const double w = static_cast<double>(o.points.size());
    if (best < 0) {
      Inst in{o.room, oc, o.feature, {o.key}};
      for (auto& x : in.sum) x *= w;
      insts.push_back(std::move(in));
    } else {
      auto& in = insts[static_cast<size_t>(best)];
      in.cells.insert(oc.begin(), oc.end());
      for (size_t k = 0; k < in.sum.size(); ++k) in.sum[k] += w * o.feature[k];
      in.members.push_back(o.key);
    }
  }
  std::vector<std::vector<std::pair<int, int>>> groups;
  for (auto& in : insts) {
    std::sort(in.members.begin(), in.members.end());
    groups.push_back(in.members);
  }
  std::sort(groups.begin(), groups.end());
  return groups;
}

// --- evaluation -------------------------------------------------------------

// Highest total IoU over all one-to-one assignments (pairs below thr are not
// allowed). Exponential; for a handful of instances only.
inline double best_assignment_total(const std::vector<std::vector<double>>& iou_matrix, double thr) {
  const size_t np = iou_matrix.size();
  const size_t ng = np == 0 ? 0 : iou_matrix[0].size();
  std::vector<bool> used(ng, false);
  std::function<double(size_t)> rec = [&](size_t p) -> double {
    if (p == np) return 0.0;
    double best = rec(p + 1);
    for (size_t g = 0; g < ng; ++g) {
      if (used[g] || iou_matrix[p][g] < thr) continue;
      used[g] = true;
      best = std::max(best, iou_matrix[p][g] + rec(p + 1));
      used[g] = false;
    }
    return best;
  };
  return rec(0);
}

// AP from a list of (confidence, is_true_positive) with all-point
// interpolation.
inline double average_precision(std::vector<std::pair<double, bool>> dets, size_t n_gt) {
  std::stable_sort(dets.begin(), dets.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<double> prec, rec;
  size_t tp = 0;
  for (size_t i = 0; i < dets.size(); ++i) {
    tp += dets[i].second ? 1 : 0;
    prec.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
    rec.push_back(static_cast<double>(tp) / static_cast<double>(n_gt));
  }
  double ap = 0.0, prev_r = 0.0;
  for (size_t i = 0; i < dets.size(); ++i) {
    double p_interp = 0.0;
    for (size_t j = i; j < dets.size(); ++j) p_interp = std::max(p_interp, prec[j]);
    ap += (rec[i] - prev_r) * p_interp;
    prev_r = rec[i];
  }
  return 100.0 * ap;
}

// 1-based rank of `truth` among labels sorted by similarity (desc), ties by
// list order.
inline size_t rank_of(const std::vector<double>& sims, size_t truth) {
  size_t r = 1;
  for (size_t i = 0; i < sims.size(); ++i) {
    if (i == truth) continue;
    if (sims[i] > sims[truth] || (sims[i] == sims[truth] && i < truth)) ++r;
  }
  return r;
}

}  // namespace oracle

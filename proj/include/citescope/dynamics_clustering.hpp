#pragma once

// Clustering of subfield phase trajectories: DTW distances, Gaussian-kernel
// similarity, Leiden communities.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

#include "citescope/breakthrough_panel.hpp"
#include "citescope/dtw.hpp"
#include "citescope/impact_metrics.hpp"
#include "citescope/leiden.hpp"
#include "citescope/matrix.hpp"

namespace citescope {

struct Trajectory {
  SubfieldId subfield = kUnlabeledSubfield;
  YearRange years;
  std::vector<PhasePoint> points;  // one per year
  std::vector<bool> filled;        // year had no publications; point set to 0
};

inline std::vector<Trajectory> trajectories_from_series(const SeriesSet& set) {
  std::vector<Trajectory> out;
  for (const auto& [id, s] : set.series) {
    Trajectory t;
    t.subfield = id;
    t.years = s.years;
    t.filled = s.no_publications;
    for (std::size_t i = 0; i < s.published.size(); ++i) {
      t.points.push_back({s.scaled_consolidating[i], s.scaled_disruptive[i]});
    }
    out.push_back(std::move(t));
  }
  return out;
}

struct DistanceMatrix {
  std::vector<SubfieldId> labels;
  Matrix values;
};

struct SimilarityMatrix {
  std::vector<SubfieldId> labels;
  Matrix values;
  double sigma = 1.0;
};

inline DistanceMatrix distance_matrix(const std::vector<Trajectory>& trajectories,
                                      DtwCost cost = DtwCost::Euclidean, unsigned threads = 0) {
  const std::size_t n = trajectories.size();
  DistanceMatrix d;
  d.values = Matrix(n, n);
  for (const auto& t : trajectories) d.labels.push_back(t.subfield);
  // Row i fills (i, j > i); each slot has one writer.
  detail::parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      d.values(i, j) = dtw_distance(trajectories[i].points, trajectories[j].points, cost);
    }
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d.values(j, i) = d.values(i, j);
  return d;
}

// Population standard deviation of the off-diagonal distances; 1 when that
// is zero or undefined.
inline double default_sigma(const DistanceMatrix& d) {
  const std::size_t n = d.values.rows();
  std::vector<double> xs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) xs.push_back(d.values(i, j));
  if (xs.empty()) return 1.0;
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / xs.size());
  return sd > 0.0 ? sd : 1.0;
}

inline SimilarityMatrix similarity_matrix(const DistanceMatrix& d, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ArgumentError("kernel width must be positive");
  SimilarityMatrix s;
  s.labels = d.labels;
  s.sigma = sigma;
  s.values = Matrix(d.values.rows(), d.values.cols());
  const double two_var = 2.0 * sigma * sigma;
  for (std::size_t i = 0; i < d.values.rows(); ++i)
    for (std::size_t j = 0; j < d.values.cols(); ++j) {
      const double x = d.values(i, j);
      s.values(i, j) = std::exp(-(x * x) / two_var);
    }
  return s;
}

struct ClusteringResult {
  std::vector<SubfieldId> labels;     // ascending
  std::vector<int> cluster;           // -1 for singletons
  std::vector<bool> singleton;
  std::vector<std::uint32_t> community;
  std::size_t cluster_count = 0;
  std::uint64_t seed = 0;
  double resolution = 1.0;
  double modularity = 0.0;

  std::optional<int> cluster_of(SubfieldId s) const {
    auto it = std::lower_bound(labels.begin(), labels.end(), s);
    if (it == labels.end() || *it != s) return std::nullopt;
    return cluster[static_cast<std::size_t>(it - labels.begin())];
  }
};

// Leiden on the complete graph weighted by similarity, diagonal excluded.
// Nodes are put in ascending label order first, so relabeling the input only
// relabels the output. Communities of size >= 2 are numbered 0.. by
// decreasing size, then smallest member label; size-1 communities are
// flagged singleton.
inline ClusteringResult leiden_clusters(const SimilarityMatrix& s, double resolution,
                                        std::uint64_t seed) {
  const std::size_t n = s.labels.size();
  if (n < 2) throw ArgumentError("clustering needs at least two trajectories");
  if (s.values.rows() != n || s.values.cols() != n) throw ArgumentError("similarity shape mismatch");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (s.values(i, j) != s.values(j, i)) throw ArgumentError("similarity matrix not symmetric");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return s.labels[a] < s.labels[b]; });
  Matrix w(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) w(i, j) = i == j ? 0.0 : s.values(order[i], order[j]);

  LeidenOptions opt;
  opt.resolution = resolution;
  opt.seed = seed;
  auto found = leiden(WeightedGraph::from_matrix(w), opt);

  ClusteringResult r;
  r.seed = seed;
  r.resolution = resolution;
  r.modularity = found.modularity;
  r.community = found.community;
  for (auto i : order) r.labels.push_back(s.labels[i]);

  const std::uint32_t k = *std::max_element(r.community.begin(), r.community.end()) + 1;
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < n; ++i) members[r.community[i]].push_back(i);
  std::vector<std::uint32_t> multi;
  for (std::uint32_t c = 0; c < k; ++c)
    if (members[c].size() >= 2) multi.push_back(c);
  std::sort(multi.begin(), multi.end(), [&](auto a, auto b) {
    if (members[a].size() != members[b].size()) return members[a].size() > members[b].size();
    return members[a].front() < members[b].front();
  });
  r.cluster.assign(n, -1);
  r.singleton.assign(n, true);
  for (std::size_t id = 0; id < multi.size(); ++id) {
    for (auto i : members[multi[id]]) {
      r.cluster[i] = static_cast<int>(id);
      r.singleton[i] = false;
    }
  }
  r.cluster_count = multi.size();
  return r;
}

struct MeanTrajectory {
  int cluster = 0;
  std::vector<SubfieldId> members;
  YearRange years;
  std::vector<PhasePoint> points;
};

inline std::vector<MeanTrajectory> cluster_mean_trajectory(const ClusteringResult& result,
                                                           const std::vector<Trajectory>& trajectories) {
  std::map<SubfieldId, const Trajectory*> by_label;
  for (const auto& t : trajectories) by_label[t.subfield] = &t;
  std::vector<MeanTrajectory> out(result.cluster_count);
  for (std::size_t c = 0; c < out.size(); ++c) out[c].cluster = static_cast<int>(c);
  for (std::size_t i = 0; i < result.labels.size(); ++i) {
    if (result.cluster[i] < 0) continue;
    auto it = by_label.find(result.labels[i]);
    if (it == by_label.end()) throw ArgumentError("no trajectory for a clustered label");
    const Trajectory& t = *it->second;
    auto& m = out[static_cast<std::size_t>(result.cluster[i])];
    if (m.members.empty()) {
      m.years = t.years;
      m.points.assign(t.points.size(), {});
    } else if (t.years != m.years || t.points.size() != m.points.size()) {
      throw ArgumentError("cluster members are on different year grids");
    }
    m.members.push_back(t.subfield);
    for (std::size_t k = 0; k < t.points.size(); ++k) {
      m.points[k].consolidating += t.points[k].consolidating;
      m.points[k].disruptive += t.points[k].disruptive;
    }
  }
  for (auto& m : out) {
    const double n = static_cast<double>(m.members.size());
    for (auto& p : m.points) {
      p.consolidating /= n;
      p.disruptive /= n;
    }
  }
  return out;
}

}  // namespace citescope

#pragma once

// Leiden community detection (local moving, refinement, aggregation) for the
// modularity objective with a resolution parameter, on weighted undirected
// graphs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "citescope/matrix.hpp"
#include "citescope/random.hpp"

namespace citescope {

struct WeightedGraph {
  // Off-diagonal neighbours; self-loop weight kept separately.
  std::vector<std::vector<std::pair<std::uint32_t, double>>> adj;
  std::vector<double> self_loop;
  std::vector<double> degree;  // sum of incident weight, self-loop counted once
  double total = 0.0;          // 2m

  std::size_t size() const { return adj.size(); }

  static WeightedGraph from_matrix(const Matrix& w) {
    if (w.rows() != w.cols()) throw ArgumentError("adjacency must be square");
    WeightedGraph g;
    const std::size_t n = w.rows();
    g.adj.resize(n);
    g.self_loop.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j || w(i, j) == 0.0) continue;
        if (w(i, j) < 0.0) throw ArgumentError("negative edge weight");
        g.adj[i].emplace_back(static_cast<std::uint32_t>(j), w(i, j));
      }
    }
    g.finish();
    return g;
  }

  void finish() {
    degree.assign(size(), 0.0);
    total = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      double k = self_loop[i];
      for (auto& [j, x] : adj[i]) k += x;
      degree[i] = k;
      total += k;
    }
  }
};

struct LeidenOptions {
  double resolution = 1.0;
  std::uint64_t seed = 0;
  double randomness = 0.01;  // θ in the refinement merge probabilities
  int max_levels = 64;
};

struct LeidenResult {
  std::vector<std::uint32_t> community;  // per node, dense ids 0..k-1
  double modularity = 0.0;
};

inline double modularity(const WeightedGraph& g, const std::vector<std::uint32_t>& community,
                         double resolution) {
  if (g.total <= 0.0) return 0.0;
  const std::uint32_t k = community.empty() ? 0 : *std::max_element(community.begin(), community.end()) + 1;
  std::vector<double> internal(k, 0.0), tot(k, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    tot[community[i]] += g.degree[i];
    internal[community[i]] += g.self_loop[i];
    for (auto& [j, w] : g.adj[i]) {
      if (community[j] == community[i]) internal[community[i]] += w;
    }
  }
  double q = 0.0;
  for (std::uint32_t c = 0; c < k; ++c) q += internal[c] - resolution * tot[c] * tot[c] / g.total;
  return q / g.total;
}

namespace detail {

class LeidenRun {
 public:
  LeidenRun(const LeidenOptions& opt) : opt_(opt), rng_(opt.seed) {}

  LeidenResult operator()(const WeightedGraph& base) {
    const std::size_t n = base.size();
    LeidenResult out;
    out.community.resize(n);
    std::iota(out.community.begin(), out.community.end(), 0u);
    if (n == 0) return out;

    WeightedGraph g = base;
    std::vector<std::uint32_t> part(n);
    std::iota(part.begin(), part.end(), 0u);
    // node of the current graph each original node belongs to
    std::vector<std::uint32_t> member(n);
    std::iota(member.begin(), member.end(), 0u);

    for (int level = 0; level < opt_.max_levels; ++level) {
      move_nodes(g, part);
      const std::uint32_t k = renumber(part);
      if (k == g.size()) break;
      std::vector<std::uint32_t> refined = refine(g, part);
      const std::uint32_t kr = renumber(refined);
      if (kr == g.size()) break;
      // Aggregate nodes by refined community; the aggregate starts out in the
      // coarse community of its members.
      std::vector<std::uint32_t> next_part(kr);
      for (std::size_t v = 0; v < g.size(); ++v) next_part[refined[v]] = part[v];
      for (auto& m : member) m = refined[m];
      g = aggregate(g, refined, kr);
      part = std::move(next_part);
    }
    for (std::size_t i = 0; i < n; ++i) out.community[i] = part[member[i]];
    renumber(out.community);
    out.modularity = modularity(base, out.community, opt_.resolution);
    return out;
  }

 private:
  void shuffle(std::vector<std::uint32_t>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng_.below(i)]);
  }

  static std::uint32_t renumber(std::vector<std::uint32_t>& part) {
    std::vector<std::uint32_t> map(part.size() + 1, UINT32_MAX);
    std::uint32_t next = 0;
    for (auto& c : part) {
      if (map[c] == UINT32_MAX) map[c] = next++;
      c = map[c];
    }
    return next;
  }

  // Queue-based local moving of single nodes.
  void move_nodes(const WeightedGraph& g, std::vector<std::uint32_t>& part) {
    const std::size_t n = g.size();
    std::vector<double> tot(n + 1, 0.0);
    std::vector<std::uint32_t> size(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) {
      tot[part[v]] += g.degree[v];
      ++size[part[v]];
    }
    std::vector<std::uint32_t> empty;
    for (std::uint32_t c = static_cast<std::uint32_t>(n); c-- > 0;) {
      if (size[c] == 0) empty.push_back(c);
    }

    std::vector<std::uint32_t> queue(n);
    std::iota(queue.begin(), queue.end(), 0u);
    shuffle(queue);
    std::vector<char> queued(n, 1);
    std::vector<double> link(n + 1, 0.0);
    std::vector<std::uint32_t> touched;
    std::size_t head = 0;

    while (head < queue.size()) {
      const std::uint32_t v = queue[head++];
      queued[v] = 0;
      const std::uint32_t from = part[v];

      touched.clear();
      for (auto& [u, w] : g.adj[v]) {
        const auto c = part[u];
        if (link[c] == 0.0) touched.push_back(c);
        link[c] += w;
      }
      tot[from] -= g.degree[v];
      --size[from];

      const double scale = opt_.resolution * g.degree[v] / g.total;
      std::uint32_t best = from;
      double best_gain = link[from] - scale * tot[from];
      for (auto c : touched) {
        const double gain = link[c] - scale * tot[c];
        if (gain > best_gain) {
          best_gain = gain;
          best = c;
        }
      }
      // An empty community yields gain 0.
      if (best_gain < 0.0) {
        best = size[from] == 0 ? from : empty.back();
      }
      for (auto c : touched) link[c] = 0.0;

      tot[best] += g.degree[v];
      ++size[best];
      if (size[from] == 0 && best != from) empty.push_back(from);
      if (best != from) {
        if (!empty.empty() && empty.back() == best) empty.pop_back();
        part[v] = best;
        for (auto& [u, w] : g.adj[v]) {
          if (part[u] != best && !queued[u]) {
            queued[u] = 1;
            queue.push_back(u);
          }
        }
      }
    }
  }

  // Refinement: within each coarse community, merge singletons into
  // well-connected sub-communities with randomized greedy choices.
  std::vector<std::uint32_t> refine(const WeightedGraph& g, const std::vector<std::uint32_t>& part) {
    const std::size_t n = g.size();
    std::vector<std::uint32_t> ref(n);
    std::iota(ref.begin(), ref.end(), 0u);
    std::vector<double> ref_tot(g.degree);
    std::vector<char> singleton(n, 1);

    const std::uint32_t k = *std::max_element(part.begin(), part.end()) + 1;
    std::vector<double> comm_tot(k, 0.0);
    for (std::size_t v = 0; v < n; ++v) comm_tot[part[v]] += g.degree[v];

    // Weight from each node to the rest of its coarse community, and from each
    // refined community to the rest of its coarse community.
    std::vector<double> ext(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
      for (auto& [u, w] : g.adj[v]) {
        if (part[u] == part[v]) ext[v] += w;
      }
    }
    std::vector<double> ref_ext(ext);

    const double gamma = opt_.resolution;
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    shuffle(order);

    std::vector<double> link(n, 0.0);
    std::vector<std::uint32_t> touched;
    std::vector<double> weights;
    for (auto v : order) {
      if (!singleton[v]) continue;
      const auto C = part[v];
      if (ext[v] < gamma * g.degree[v] * (comm_tot[C] - g.degree[v]) / g.total) continue;

      touched.clear();
      for (auto& [u, w] : g.adj[v]) {
        if (part[u] != C) continue;
        const auto r = ref[u];
        if (link[r] == 0.0) touched.push_back(r);
        link[r] += w;
      }
      const double scale = gamma * g.degree[v] / g.total;
      double best = 0.0;
      std::vector<std::uint32_t> cand;
      weights.clear();
      for (auto r : touched) {
        if (r == ref[v]) continue;
        if (ref_ext[r] < gamma * ref_tot[r] * (comm_tot[C] - ref_tot[r]) / g.total) continue;
        const double gain = link[r] - scale * ref_tot[r];
        if (gain < 0.0) continue;
        cand.push_back(r);
        weights.push_back(gain);
        best = std::max(best, gain);
      }
      for (auto r : touched) link[r] = 0.0;
      if (cand.empty()) continue;

      double sum = 0.0;
      for (auto& w : weights) {
        w = std::exp((w - best) / opt_.randomness);
        sum += w;
      }
      double u = rng_.uniform() * sum;
      std::size_t pick = 0;
      while (pick + 1 < cand.size() && u >= weights[pick]) {
        u -= weights[pick];
        ++pick;
      }
      const auto target = cand[pick];

      // Update the external weight of the target: v's links into it become
      // internal, v's other in-community links become external.
      double to_target = 0.0;
      for (auto& [x, w] : g.adj[v]) {
        if (part[x] == C && ref[x] == target) to_target += w;
      }
      ref_ext[target] += ext[v] - 2.0 * to_target;
      ref_tot[target] += g.degree[v];
      ref_tot[ref[v]] -= g.degree[v];
      ref_ext[ref[v]] = 0.0;
      ref[v] = target;
      // A non-empty refined community always still holds its founding node.
      singleton[v] = 0;
      singleton[target] = 0;
    }
    return ref;
  }

  static WeightedGraph aggregate(const WeightedGraph& g, const std::vector<std::uint32_t>& ref,
                                 std::uint32_t k) {
    WeightedGraph out;
    out.adj.resize(k);
    out.self_loop.assign(k, 0.0);
    std::vector<std::vector<double>> dense;
    std::vector<double> row(k, 0.0);
    std::vector<std::vector<std::uint32_t>> members(k);
    for (std::size_t v = 0; v < g.size(); ++v) members[ref[v]].push_back(static_cast<std::uint32_t>(v));
    std::vector<std::uint32_t> touched;
    for (std::uint32_t c = 0; c < k; ++c) {
      touched.clear();
      for (auto v : members[c]) {
        out.self_loop[c] += g.self_loop[v];
        for (auto& [u, w] : g.adj[v]) {
          const auto d = ref[u];
          if (d == c) {
            out.self_loop[c] += w;
          } else {
            if (row[d] == 0.0) touched.push_back(d);
            row[d] += w;
          }
        }
      }
      std::sort(touched.begin(), touched.end());
      for (auto d : touched) {
        out.adj[c].emplace_back(d, row[d]);
        row[d] = 0.0;
      }
    }
    out.finish();
    return out;
  }

  LeidenOptions opt_;
  Rng rng_;
};

}  // namespace detail

inline LeidenResult leiden(const WeightedGraph& g, const LeidenOptions& opt = {}) {
  if (!(opt.resolution > 0.0)) throw ArgumentError("resolution must be positive");
  if (g.total <= 0.0) {
    LeidenResult r;
    r.community.resize(g.size());
    std::iota(r.community.begin(), r.community.end(), 0u);
    return r;
  }
  return detail::LeidenRun(opt)(g);
}

}  // namespace citescope

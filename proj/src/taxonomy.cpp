#include "advmetrics/taxonomy.hpp"

#include <algorithm>
#include <cstddef>
#include <deque>
#include <unordered_set>

#include "advmetrics/error.hpp"

namespace advmetrics {

int Taxonomy::node_index(const std::string& node) const {
  auto it = index_.find(node);
  if (it == index_.end()) raise(Errc::unknown_node, "node '" + node + "' not in taxonomy");
  return it->second;
}

int Taxonomy::label_node_index(int label) const {
  auto it = label_map_.find(label);
  if (it == label_map_.end())
    raise(Errc::unmapped_label, "label " + std::to_string(label) + " has no taxonomy node");
  return it->second;
}

int Taxonomy::depth(const std::string& node) const { return depths_[node_index(node)]; }

const std::string& Taxonomy::label_node(int label) const {
  return names_[label_node_index(label)];
}

std::vector<int> Taxonomy::labels() const {
  std::vector<int> ids;
  ids.reserve(label_map_.size());
  for (const auto& [label, node] : label_map_) ids.push_back(label);
  std::sort(ids.begin(), ids.end());
  return ids;
}

int Taxonomy::lcs_nodes(int a, int b) const {
  const auto& anc_a = ancestors_[a];
  std::unordered_set<int> set_a(anc_a.begin(), anc_a.end());
  for (int cand : ancestors_[b]) {
    if (set_a.count(cand)) return cand;
  }
  // Unreachable for a validated taxonomy: the root is a common ancestor.
  raise(Errc::invariant_violation, "nodes share no common ancestor");
}

double Taxonomy::wup_nodes(int a, int b) const {
  const int lcs = lcs_nodes(a, b);
  return 2.0 * depths_[lcs] / (depths_[a] + depths_[b]);
}

const std::string& Taxonomy::lowest_common_subsumer(const std::string& a,
                                                    const std::string& b) const {
  return names_[lcs_nodes(node_index(a), node_index(b))];
}

double Taxonomy::wup_similarity(int label_a, int label_b) const {
  return wup_nodes(label_node_index(label_a), label_node_index(label_b));
}

Matrix Taxonomy::pairwise_wup_matrix(const std::vector<int>& label_order) const {
  const std::size_t n = label_order.size();
  std::vector<int> nodes(n);
  for (std::size_t i = 0; i < n; ++i) nodes[i] = label_node_index(label_order[i]);

  Matrix m(n, n);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const auto& anc_i = ancestors_[nodes[i]];
    std::unordered_set<int> set_i(anc_i.begin(), anc_i.end());
    for (std::size_t j = i; j < n; ++j) {
      int lcs = -1;
      for (int cand : ancestors_[nodes[j]]) {
        if (set_i.count(cand)) { lcs = cand; break; }
      }
      const double v = 2.0 * depths_[lcs] / (depths_[nodes[i]] + depths_[nodes[j]]);
      m.at(i, j) = v;
      m.at(j, i) = v;
    }
  }
  return m;
}

Matrix Taxonomy::pairwise_wup_matrix_serial(const std::vector<int>& label_order) const {
  const std::size_t n = label_order.size();
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      m.at(i, j) = wup_similarity(label_order[i], label_order[j]);
  return m;
}

std::vector<std::pair<std::string, std::string>> Taxonomy::edge_list() const {
  std::vector<std::pair<std::string, std::string>> edges;
  for (std::size_t child = 0; child < parents_.size(); ++child)
    for (int parent : parents_[child]) edges.emplace_back(names_[child], names_[parent]);
  std::sort(edges.begin(), edges.end());
  return edges;
}

std::vector<std::pair<int, std::string>> Taxonomy::label_list() const {
  std::vector<std::pair<int, std::string>> out;
  out.reserve(label_map_.size());
  for (const auto& [label, node] : label_map_) out.emplace_back(label, names_[node]);
  std::sort(out.begin(), out.end());
  return out;
}

Taxonomy load_taxonomy(const std::vector<std::pair<std::string, std::string>>& edges,
                       const std::vector<std::pair<int, std::string>>& label_map) {
  if (edges.empty()) raise(Errc::no_root, "empty edge list");

  Taxonomy t;
  auto intern = [&t](const std::string& name) {
    auto [it, inserted] = t.index_.try_emplace(name, static_cast<int>(t.names_.size()));
    if (inserted) t.names_.push_back(name);
    return it->second;
  };

  std::vector<std::pair<int, int>> edge_ids;
  edge_ids.reserve(edges.size());
  for (const auto& [child, parent] : edges) edge_ids.emplace_back(intern(child), intern(parent));

  const std::size_t n = t.names_.size();
  t.parents_.assign(n, {});
  for (auto [child, parent] : edge_ids) t.parents_[child].push_back(parent);
  for (auto& ps : t.parents_) {
    std::sort(ps.begin(), ps.end());
    ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
  }

  // Kahn's algorithm on child->parent edges; a node is popped once all its
  // children are done, so the reverse order lists parents before children.
  std::vector<int> pending_children(n, 0);
  for (std::size_t c = 0; c < n; ++c)
    for (int p : t.parents_[c]) ++pending_children[p];
  std::deque<int> queue;
  for (std::size_t i = 0; i < n; ++i)
    if (pending_children[i] == 0) queue.push_back(static_cast<int>(i));
  std::vector<int> order;
  order.reserve(n);
  while (!queue.empty()) {
    int node = queue.front();
    queue.pop_front();
    order.push_back(node);
    for (int p : t.parents_[node])
      if (--pending_children[p] == 0) queue.push_back(p);
  }
  if (order.size() != n) raise(Errc::cycle_detected, "parent edges contain a cycle");

  std::vector<int> roots;
  for (std::size_t i = 0; i < n; ++i)
    if (t.parents_[i].empty()) roots.push_back(static_cast<int>(i));
  if (roots.empty()) raise(Errc::no_root, "no parentless node");
  if (roots.size() > 1)
    raise(Errc::multiple_roots, "parentless nodes '" + t.names_[roots[0]] + "' and '" +
                                    t.names_[roots[1]] + "'");
  t.root_ = roots[0];

  t.depths_.assign(n, 0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int node = *it;
    if (node == t.root_) {
      t.depths_[node] = 1;
      continue;
    }
    int best = t.depths_[t.parents_[node][0]];
    for (int p : t.parents_[node]) best = std::min(best, t.depths_[p]);
    t.depths_[node] = best + 1;
  }

  t.ancestors_.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    std::unordered_set<int> seen;
    std::deque<int> frontier{static_cast<int>(i)};
    seen.insert(static_cast<int>(i));
    while (!frontier.empty()) {
      int node = frontier.front();
      frontier.pop_front();
      for (int p : t.parents_[node])
        if (seen.insert(p).second) frontier.push_back(p);
    }
    auto& anc = t.ancestors_[i];
    anc.assign(seen.begin(), seen.end());
    std::sort(anc.begin(), anc.end(), [&t](int a, int b) {
      if (t.depths_[a] != t.depths_[b]) return t.depths_[a] > t.depths_[b];
      return t.names_[a] < t.names_[b];
    });
  }

  for (const auto& [label, node] : label_map) {
    auto it = t.index_.find(node);
    if (it == t.index_.end())
      raise(Errc::unmapped_label,
            "label " + std::to_string(label) + " maps to unknown node '" + node + "'");
    if (!t.label_map_.emplace(label, it->second).second)
      raise(Errc::invariant_violation, "duplicate label id " + std::to_string(label));
  }
  return t;
}

}  // namespace advmetrics

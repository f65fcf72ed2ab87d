#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "advmetrics/matrix.hpp"

namespace advmetrics {

/// Rooted acyclic hypernym graph with a class-label -> node mapping.
///
/// Conventions: the root has depth 1 and depth(n) = 1 + min over parents;
/// the lowest common subsumer maximizes depth over all common ancestors
/// (a node is its own ancestor), ties broken by lexicographically smallest
/// node id. Wup(a,b) = 2*depth(lcs) / (depth(a) + depth(b)). On trees this
/// keeps Wup in (0,1] with equality iff the nodes coincide; multi-parent
/// DAGs can place an ancestor deeper than its descendant, in which case the
/// formula is applied as-is.
class Taxonomy {
 public:
  std::size_t node_count() const { return names_.size(); }
  bool has_node(const std::string& node) const { return index_.count(node) != 0; }
  const std::string& root() const { return names_[root_]; }

  /// Depth of a node; root depth is 1. Throws UnknownNode.
  int depth(const std::string& node) const;

  /// Deepest common ancestor of a and b, ties by smallest node id.
  const std::string& lowest_common_subsumer(const std::string& a, const std::string& b) const;

  /// Wu-Palmer similarity between two mapped class labels. Throws UnmappedLabel.
  double wup_similarity(int label_a, int label_b) const;

  bool has_label(int label) const { return label_map_.count(label) != 0; }
  const std::string& label_node(int label) const;
  /// Mapped label ids in ascending order.
  std::vector<int> labels() const;

  /// C x C symmetric Wup matrix over the given label order (OpenMP over rows).
  Matrix pairwise_wup_matrix(const std::vector<int>& label_order) const;
  /// Serial reference: per-pair recomputation through wup_similarity.
  Matrix pairwise_wup_matrix_serial(const std::vector<int>& label_order) const;

  /// Edge list (child, parent) and label map in a deterministic order,
  /// used by the file writer.
  std::vector<std::pair<std::string, std::string>> edge_list() const;
  std::vector<std::pair<int, std::string>> label_list() const;

 private:
  friend Taxonomy load_taxonomy(const std::vector<std::pair<std::string, std::string>>&,
                                const std::vector<std::pair<int, std::string>>&);

  int node_index(const std::string& node) const;
  int label_node_index(int label) const;
  double wup_nodes(int a, int b) const;
  int lcs_nodes(int a, int b) const;

  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::vector<int>> parents_;
  std::vector<int> depths_;
  // Per node: ancestors (including self) sorted by depth descending, then
  // node id ascending, so the first common element is the LCS.
  std::vector<std::vector<int>> ancestors_;
  int root_ = -1;
  std::unordered_map<int, int> label_map_;
};

/// Builds and validates a Taxonomy from a (child, parent) edge list and a
/// (label-id, node-id) map. Throws CycleDetected, MultipleRoots, NoRoot,
/// UnmappedLabel.
Taxonomy load_taxonomy(const std::vector<std::pair<std::string, std::string>>& edges,
                       const std::vector<std::pair<int, std::string>>& label_map);

}  // namespace advmetrics

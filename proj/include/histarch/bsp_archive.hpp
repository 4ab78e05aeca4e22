#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "histarch/types.hpp"

namespace histarch {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

/// A node of the history tree. Internal nodes keep the point they held
/// before they were split (the "virtual" holder of that point).
struct BspNode {
  SearchPoint point;
  NodeId parent = kNoNode;
  NodeId below = kNoNode;  // coords[split_dim] <  split_value
  NodeId above = kNoNode;  // coords[split_dim] >= split_value
  std::size_t split_dim = 0;
  double split_value = 0.0;
  bool blocked = false;
  std::uint64_t last_touch = 0;
  bool live = false;

  bool is_leaf() const { return below == kNoNode; }
};

struct InsertOutcome {
  enum class Kind { NewLeaf, Revisit, Blocked };
  Kind kind;
  NodeId node;  // the new leaf, the revisited leaf, or the blocked node on the path
  int depth;
};

/// A densely sampled sub-region handed to the local optimizer.
struct RoiSuggestion {
  NodeId subroot = kNoNode;
  Region region;
  std::vector<SearchPoint> seeds;
  int subroot_depth = 0;
};

/// On-line search history stored as a binary space partitioning tree over a
/// box domain. Leaves tile the domain; each holds exactly one evaluated point.
///
/// Single-writer: no internal locking.
class BspArchive {
 public:
  BspArchive(Region domain, int lv, int k, double revisit_epsilon = 0.0);

  /// Route `coords` to its leaf and either split that leaf, report a revisit,
  /// or report that the path crosses a blocked node. The stored point's
  /// eval_index is taken from `eval_index`; the overload without it uses the
  /// running count of new leaves.
  InsertOutcome insert(std::span<const double> coords, std::uint64_t eval_index);
  InsertOutcome insert(std::span<const double> coords);

  void set_fitness(NodeId leaf, double fitness);

  Region region_of(NodeId id) const;
  Region mutation_region(NodeId revisited_leaf) const;
  std::optional<RoiSuggestion> roi_trigger(NodeId new_leaf) const;
  void block(NodeId id);

  /// Removes the floor(fraction * n_leaves) least recently touched leaves.
  /// Returns the number removed.
  std::size_t prune_lru(double fraction);

  /// Read-only traversal: true when the path to `coords` crosses a blocked node.
  bool is_blocked(std::span<const double> coords) const;
  /// Leaf reached by traversal, kNoNode when empty.
  NodeId locate(std::span<const double> coords) const;

  const BspNode& node(NodeId id) const;
  int depth(NodeId id) const;
  bool empty() const { return root_ == kNoNode; }
  NodeId root() const { return root_; }
  std::size_t n_points() const { return n_points_; }
  std::size_t dim() const { return domain_.dim(); }
  const Region& domain() const { return domain_; }
  int lv() const { return lv_; }
  int k() const { return k_; }
  double revisit_epsilon() const { return revisit_epsilon_; }

  /// Leaves in pre-order (below before above).
  std::vector<NodeId> leaves() const;
  std::vector<NodeId> leaves_under(NodeId id) const;
  int max_depth() const;

  /// One node per line, pre-order:
  /// `depth kind split_dim split_value blocked coords...`
  void dump(std::ostream& out) const;

 private:
  NodeId allocate(SearchPoint point, NodeId parent);
  void release(NodeId id);
  void check_node(NodeId id) const;
  void splice_out(NodeId leaf);

  Region domain_;
  int lv_;
  int k_;
  double revisit_epsilon_;
  std::vector<BspNode> nodes_;
  std::vector<NodeId> free_;
  NodeId root_ = kNoNode;
  std::size_t n_points_ = 0;
  std::uint64_t clock_ = 0;
  std::uint64_t new_leaves_ = 0;
};

}  // namespace histarch

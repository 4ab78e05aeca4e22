#include "histarch/bsp_archive.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <tuple>

namespace histarch {

BspArchive::BspArchive(Region domain, int lv, int k, double revisit_epsilon)
    : domain_(std::move(domain)), lv_(lv), k_(k), revisit_epsilon_(revisit_epsilon) {
  if (domain_.dim() == 0) throw Error(ErrorKind::Parameter, "archive domain is empty");
  if (lv < 0 || k < 0) throw Error(ErrorKind::Parameter, "lv and k must be non-negative");
  if (!(revisit_epsilon >= 0.0) || !std::isfinite(revisit_epsilon))
    throw Error(ErrorKind::Parameter, "revisit_epsilon must be finite and >= 0");
}

NodeId BspArchive::allocate(SearchPoint point, NodeId parent) {
  NodeId id;
  if (!free_.empty()) {
    id = free_.back();
    free_.pop_back();
  } else {
    id = static_cast<NodeId>(nodes_.size());
    nodes_.emplace_back();
  }
  BspNode& n = nodes_[id];
  n = BspNode{};
  n.point = std::move(point);
  n.parent = parent;
  n.last_touch = clock_;
  n.live = true;
  return id;
}

void BspArchive::release(NodeId id) {
  nodes_[id] = BspNode{};
  free_.push_back(id);
}

void BspArchive::check_node(NodeId id) const {
  if (id >= nodes_.size() || !nodes_[id].live)
    throw Error(ErrorKind::Structure, "node " + std::to_string(id) + " does not belong to the archive");
}

const BspNode& BspArchive::node(NodeId id) const {
  check_node(id);
  return nodes_[id];
}

int BspArchive::depth(NodeId id) const {
  check_node(id);
  int d = 0;
  for (NodeId p = nodes_[id].parent; p != kNoNode; p = nodes_[p].parent) ++d;
  return d;
}

InsertOutcome BspArchive::insert(std::span<const double> coords) {
  return insert(coords, new_leaves_ + 1);
}

InsertOutcome BspArchive::insert(std::span<const double> coords, std::uint64_t eval_index) {
  if (coords.size() != dim())
    throw Error(ErrorKind::Input, "coordinate vector has wrong dimension");
  require_finite(coords, "inserted point");
  if (!domain_.contains(coords)) throw Error(ErrorKind::Domain, "inserted point lies outside the domain");

  ++clock_;
  SearchPoint incoming{std::vector<double>(coords.begin(), coords.end()), 0.0, eval_index};

  if (root_ == kNoNode) {
    root_ = allocate(std::move(incoming), kNoNode);
    ++n_points_;
    ++new_leaves_;
    // A lone point is reported at depth 1, under the (implicit) root holder.
    return {InsertOutcome::Kind::NewLeaf, root_, 1};
  }

  NodeId id = root_;
  int d = 0;
  for (;;) {
    BspNode& n = nodes_[id];
    n.last_touch = clock_;
    if (n.blocked) return {InsertOutcome::Kind::Blocked, id, d};
    if (n.is_leaf()) break;
    id = coords[n.split_dim] < n.split_value ? n.below : n.above;
    ++d;
  }

  const std::vector<double>& held = nodes_[id].point.coords;
  std::size_t split_dim = 0;
  double max_delta = -1.0;
  for (std::size_t j = 0; j < coords.size(); ++j) {
    const double delta = std::abs(coords[j] - held[j]);
    if (delta > max_delta) {
      max_delta = delta;
      split_dim = j;
    }
  }
  if (max_delta <= revisit_epsilon_) return {InsertOutcome::Kind::Revisit, id, d};

  const double lo = std::min(coords[split_dim], held[split_dim]);
  const double hi = std::max(coords[split_dim], held[split_dim]);
  double split_value = lo + 0.5 * (hi - lo);
  if (split_value <= lo) split_value = hi;  // adjacent doubles

  const bool incoming_below = coords[split_dim] < split_value;
  SearchPoint old_copy = nodes_[id].point;
  const NodeId old_leaf = allocate(std::move(old_copy), id);
  const NodeId new_leaf = allocate(std::move(incoming), id);

  BspNode& parent = nodes_[id];
  parent.split_dim = split_dim;
  parent.split_value = split_value;
  parent.below = incoming_below ? new_leaf : old_leaf;
  parent.above = incoming_below ? old_leaf : new_leaf;

  ++n_points_;
  ++new_leaves_;
  return {InsertOutcome::Kind::NewLeaf, new_leaf, d + 1};
}

void BspArchive::set_fitness(NodeId leaf, double fitness) {
  check_node(leaf);
  if (!nodes_[leaf].is_leaf()) throw Error(ErrorKind::Structure, "set_fitness on an internal node");
  nodes_[leaf].point.fitness = fitness;
}

Region BspArchive::region_of(NodeId id) const {
  check_node(id);
  Region r = domain_;
  NodeId child = id;
  for (NodeId p = nodes_[id].parent; p != kNoNode; child = p, p = nodes_[p].parent) {
    const BspNode& n = nodes_[p];
    if (n.below == child)
      r.clip_upper(n.split_dim, std::min(r.upper(n.split_dim), n.split_value));
    else
      r.clip_lower(n.split_dim, std::max(r.lower(n.split_dim), n.split_value));
  }
  return r;
}

Region BspArchive::mutation_region(NodeId revisited_leaf) const {
  check_node(revisited_leaf);
  if (!nodes_[revisited_leaf].is_leaf())
    throw Error(ErrorKind::Structure, "mutation region requested for an internal node");
  return region_of(revisited_leaf);
}

std::vector<NodeId> BspArchive::leaves_under(NodeId id) const {
  std::vector<NodeId> out;
  if (id == kNoNode) return out;
  check_node(id);
  std::vector<NodeId> stack{id};
  while (!stack.empty()) {
    const NodeId cur = stack.back();
    stack.pop_back();
    const BspNode& n = nodes_[cur];
    if (n.is_leaf()) {
      out.push_back(cur);
    } else {
      stack.push_back(n.above);
      stack.push_back(n.below);
    }
  }
  return out;
}

std::vector<NodeId> BspArchive::leaves() const { return leaves_under(root_); }

int BspArchive::max_depth() const {
  int best = 0;
  for (NodeId leaf : leaves()) best = std::max(best, depth(leaf));
  return best;
}

std::optional<RoiSuggestion> BspArchive::roi_trigger(NodeId new_leaf) const {
  const int d = depth(new_leaf);
  if (d < lv_ + k_) return std::nullopt;

  NodeId subroot = new_leaf;
  for (int i = d; i > lv_; --i) subroot = nodes_[subroot].parent;

  RoiSuggestion roi;
  roi.subroot = subroot;
  roi.region = region_of(subroot);
  roi.subroot_depth = lv_;
  for (NodeId leaf : leaves_under(subroot)) roi.seeds.push_back(nodes_[leaf].point);
  return roi;
}

void BspArchive::block(NodeId id) {
  check_node(id);
  nodes_[id].blocked = true;
}

bool BspArchive::is_blocked(std::span<const double> coords) const {
  if (coords.size() != dim()) throw Error(ErrorKind::Input, "coordinate vector has wrong dimension");
  NodeId id = root_;
  while (id != kNoNode) {
    const BspNode& n = nodes_[id];
    if (n.blocked) return true;
    if (n.is_leaf()) return false;
    id = coords[n.split_dim] < n.split_value ? n.below : n.above;
  }
  return false;
}

NodeId BspArchive::locate(std::span<const double> coords) const {
  if (coords.size() != dim()) throw Error(ErrorKind::Input, "coordinate vector has wrong dimension");
  NodeId id = root_;
  while (id != kNoNode && !nodes_[id].is_leaf()) {
    const BspNode& n = nodes_[id];
    id = coords[n.split_dim] < n.split_value ? n.below : n.above;
  }
  return id;
}

// The sibling takes the parent's place, so the parent's cell now belongs to
// the sibling's subtree. Equivalent to the parent adopting the sibling.
void BspArchive::splice_out(NodeId leaf) {
  const NodeId parent = nodes_[leaf].parent;
  BspNode& p = nodes_[parent];
  const NodeId sibling = p.below == leaf ? p.above : p.below;
  const NodeId grand = p.parent;

  nodes_[sibling].parent = grand;
  if (p.blocked) nodes_[sibling].blocked = true;
  if (grand == kNoNode) {
    root_ = sibling;
  } else {
    BspNode& g = nodes_[grand];
    (g.below == parent ? g.below : g.above) = sibling;
  }
  release(parent);
  release(leaf);
  --n_points_;
}

std::size_t BspArchive::prune_lru(double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw Error(ErrorKind::Parameter, "prune fraction must lie in (0, 1)");
  if (empty()) return 0;

  std::vector<NodeId> victims = leaves();
  const auto count = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(victims.size())));
  if (count == 0) return 0;

  std::sort(victims.begin(), victims.end(), [this](NodeId a, NodeId b) {
    const BspNode& x = nodes_[a];
    const BspNode& y = nodes_[b];
    return std::tie(x.last_touch, x.point.eval_index, a) < std::tie(y.last_touch, y.point.eval_index, b);
  });
  victims.resize(count);
  // Splicing never moves a surviving node, so the remaining ids stay valid.
  for (NodeId leaf : victims) splice_out(leaf);
  return count;
}

void BspArchive::dump(std::ostream& out) const {
  if (root_ == kNoNode) return;
  std::vector<std::pair<NodeId, int>> stack{{root_, 0}};
  char buf[64];
  while (!stack.empty()) {
    const auto [id, d] = stack.back();
    stack.pop_back();
    const BspNode& n = nodes_[id];
    out << d << ' ' << (n.is_leaf() ? "leaf" : "internal") << ' ';
    if (n.is_leaf()) {
      out << "- -";
    } else {
      std::snprintf(buf, sizeof buf, "%.17g", n.split_value);
      out << n.split_dim << ' ' << buf;
    }
    out << ' ' << (n.blocked ? 1 : 0);
    for (double c : n.point.coords) {
      std::snprintf(buf, sizeof buf, "%.17g", c);
      out << ' ' << buf;
    }
    out << '\n';
    if (!n.is_leaf()) {
      stack.push_back({n.above, d + 1});
      stack.push_back({n.below, d + 1});
    }
  }
}

}  // namespace histarch

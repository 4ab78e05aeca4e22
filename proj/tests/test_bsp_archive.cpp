#include <sstream>

#include "doctest.h"
#include "histarch/bsp_archive.hpp"
#include "oracles.hpp"

using namespace histarch;
using Kind = InsertOutcome::Kind;

namespace {

BspArchive square(int lv = 17, int k = 4) { return BspArchive(Region::cube(2, 0.0, 10.0), lv, k); }

std::vector<double> random_point(const Region& r, Rng& rng) { return r.sample_uniform(rng); }

// Inserts points closing in on `anchor` along dimension 0, each offset a
// quarter of the previous one so it falls on the anchor's side of the last
// split. Every insert lands one level deeper. Returns the last outcome.
InsertOutcome chain(BspArchive& a, std::vector<double> anchor, double first_offset, int inserts) {
  InsertOutcome last{};
  double off = first_offset;
  for (int i = 0; i < inserts; ++i) {
    auto x = anchor;
    x[0] += off;
    last = a.insert(x);
    off *= 0.25;
  }
  return last;
}

}  // namespace

TEST_CASE("first insert makes a depth-1 leaf") {
  auto a = square();
  const auto r = a.insert(std::vector<double>{2, 5});
  CHECK(r.kind == Kind::NewLeaf);
  CHECK(r.depth == 1);
  CHECK(a.n_points() == 1);
  CHECK(a.region_of(a.root()) == a.domain());
}

TEST_CASE("second insert splits on the widest dimension at the midpoint") {
  auto a = square();
  a.insert(std::vector<double>{2, 5});
  const auto r = a.insert(std::vector<double>{8, 6});
  CHECK(r.kind == Kind::NewLeaf);
  CHECK(r.depth == 1);
  const BspNode& root = a.node(a.root());
  CHECK_FALSE(root.is_leaf());
  CHECK(root.split_dim == 0);
  CHECK(root.split_value == 5.0);
  CHECK(root.point.coords == std::vector<double>{2, 5});  // virtual holder keeps its point
  CHECK(a.node(root.below).point.coords == std::vector<double>{2, 5});
  CHECK(a.node(root.above).point.coords == std::vector<double>{8, 6});
  CHECK(a.depth(root.below) == 1);
  CHECK(a.region_of(root.below) == Region({0, 0}, {5, 10}));
  CHECK(a.region_of(root.above) == Region({5, 0}, {10, 10}));
  CHECK(a.mutation_region(root.below) == Region({0, 0}, {5, 10}));
}

TEST_CASE("ties in the difference pick the lowest dimension") {
  BspArchive a(Region::cube(3, 0.0, 10.0), 5, 2);
  a.insert(std::vector<double>{1, 1, 1});
  a.insert(std::vector<double>{1, 4, 4});
  CHECK(a.node(a.root()).split_dim == 1);
  CHECK(a.node(a.root()).split_value == 2.5);
}

TEST_CASE("identical point is a revisit") {
  auto a = square();
  const auto first = a.insert(std::vector<double>{2, 5});
  const auto r = a.insert(std::vector<double>{2, 5});
  CHECK(r.kind == Kind::Revisit);
  CHECK(r.node == first.node);
  CHECK(a.n_points() == 1);

  a.insert(std::vector<double>{8, 6});
  const auto again = a.insert(std::vector<double>{8, 6});
  CHECK(again.kind == Kind::Revisit);
  CHECK(a.node(again.node).point.coords == std::vector<double>{8, 6});
}

TEST_CASE("revisit epsilon widens the duplicate test") {
  BspArchive a(Region::cube(2, 0.0, 10.0), 5, 2, 0.1);
  a.insert(std::vector<double>{2, 5});
  CHECK(a.insert(std::vector<double>{2.05, 4.95}).kind == Kind::Revisit);
  CHECK(a.insert(std::vector<double>{2.2, 5}).kind == Kind::NewLeaf);
}

TEST_CASE("insert rejects bad input") {
  auto a = square();
  CHECK_THROWS_AS(a.insert(std::vector<double>{11, 5}), Error);
  try {
    a.insert(std::vector<double>{-0.1, 5});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Domain);
  }
  try {
    a.insert(std::vector<double>{std::nan(""), 5});
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Input);
  }
  try {
    a.insert(std::vector<double>{1, 2, 3});
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Input);
  }
  // faces are inside
  CHECK(a.insert(std::vector<double>{10, 0}).kind == Kind::NewLeaf);
  CHECK_THROWS_AS(BspArchive(Region::cube(2, 0, 1), -1, 2), Error);
}

TEST_CASE("random trees keep points in cells, tile the domain and locate like a scan") {
  Rng rng(7);
  BspArchive a(Region::cube(3, -5.0, 5.0), 20, 3);
  for (int i = 1; i <= 600; ++i) {
    a.insert(random_point(a.domain(), rng));
    if (i % 100 == 0) {
      CHECK(oracle::all_points_in_cells(a));
      CHECK(oracle::relative_leaf_volume(a) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(oracle::leaves_disjoint(a));
    }
  }
  CHECK(a.n_points() == 600);
  CHECK(a.leaves().size() == 600);
  for (int i = 0; i < 300; ++i) {
    const auto x = random_point(a.domain(), rng);
    CHECK(a.locate(x) == oracle::brute_locate(a, x));
  }
}

TEST_CASE("split values lie strictly inside the split node's cell") {
  Rng rng(11);
  BspArchive a(Region::cube(2, 0.0, 1.0), 20, 3);
  for (int i = 0; i < 200; ++i) a.insert(random_point(a.domain(), rng));
  std::vector<NodeId> stack{a.root()};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    const BspNode& n = a.node(id);
    if (n.is_leaf()) continue;
    const Region r = a.region_of(id);
    CHECK(n.split_value > r.lower(n.split_dim));
    CHECK(n.split_value < r.upper(n.split_dim));
    CHECK(a.depth(n.below) == a.depth(id) + 1);
    CHECK(a.node(n.below).parent == id);
    stack.push_back(n.below);
    stack.push_back(n.above);
  }
}

TEST_CASE("same insert sequence gives the same tree") {
  auto build = [] {
    Rng rng(3);
    BspArchive a(Region::cube(4, 0.0, 1.0), 10, 2);
    for (int i = 0; i < 300; ++i) a.insert(a.domain().sample_uniform(rng));
    std::ostringstream os;
    a.dump(os);
    return os.str();
  };
  CHECK(build() == build());
}

TEST_CASE("mutation region samples never revisit") {
  Rng rng(5);
  BspArchive a(Region::cube(2, 0.0, 10.0), 20, 3);
  for (int i = 0; i < 200; ++i) a.insert(random_point(a.domain(), rng));
  const NodeId leaf = a.leaves()[37];
  const Region cell = a.mutation_region(leaf);
  CHECK(cell.log_volume() < a.domain().log_volume());
  int revisits = 0;
  for (int i = 0; i < 1000; ++i)
    if (a.insert(cell.sample_uniform(rng)).kind == Kind::Revisit) ++revisits;
  CHECK(revisits == 0);
}

TEST_CASE("roi trigger fires at depth lv + k") {
  BspArchive a(Region::cube(2, 0.0, 1.0), 17, 4);
  a.insert(std::vector<double>{0.1, 0.1});
  a.insert(std::vector<double>{0.9, 0.9});  // depth 1
  const auto at20 = chain(a, {0.1, 0.1}, 0.2, 19);
  REQUIRE(at20.depth == 20);
  CHECK_FALSE(a.roi_trigger(at20.node));

  const auto at21 = chain(a, {0.1, 0.1}, 0.2 * std::pow(0.25, 19), 1);
  REQUIRE(at21.depth == 21);
  const auto roi = a.roi_trigger(at21.node);
  REQUIRE(roi);
  CHECK(a.depth(roi->subroot) == 17);
  CHECK(roi->subroot_depth == 17);
  NodeId up = at21.node;
  for (int i = 0; i < 4; ++i) up = a.node(up).parent;
  CHECK(up == roi->subroot);
  for (const auto& s : roi->seeds) CHECK(roi->region.contains(s.coords));
}

TEST_CASE("a cell split k times hands k + 1 seeds") {
  for (int k = 1; k <= 6; ++k) {
    const int lv = 2;
    BspArchive a(Region::cube(2, 0.0, 1.0), lv, k);
    a.insert(std::vector<double>{0.1, 0.1});
    a.insert(std::vector<double>{0.9, 0.1});  // root split at 0.5
    // one split to reach depth lv, then k more inside the depth-lv cell
    const auto last = chain(a, {0.1, 0.1}, 0.2, k + 1);
    REQUIRE(last.depth == lv + k);
    const auto roi = a.roi_trigger(last.node);
    REQUIRE(roi);
    CHECK(roi->seeds.size() == static_cast<std::size_t>(k + 1));
  }
}

TEST_CASE("blocking") {
  SUBCASE("blocked root rejects everything") {
    auto a = square();
    a.insert(std::vector<double>{2, 5});
    a.block(a.root());
    CHECK(a.insert(std::vector<double>{7, 7}).kind == Kind::Blocked);
    CHECK(a.insert(std::vector<double>{2, 5}).kind == Kind::Blocked);
    CHECK(a.n_points() == 1);
  }
  SUBCASE("block an roi sub-root, then its seed centroid") {
    BspArchive a(Region::cube(2, 0.0, 1.0), 2, 2);
    a.insert(std::vector<double>{0.1, 0.1});
    a.insert(std::vector<double>{0.9, 0.1});
    const auto last = chain(a, {0.1, 0.1}, 0.2, 3);
    const auto roi = a.roi_trigger(last.node);
    REQUIRE(roi);
    a.block(roi->subroot);
    std::vector<double> c(2, 0.0);
    for (const auto& s : roi->seeds)
      for (int d = 0; d < 2; ++d) c[d] += s.coords[d] / static_cast<double>(roi->seeds.size());
    CHECK(a.insert(c).kind == Kind::Blocked);
    CHECK(a.is_blocked(c));
  }
  SUBCASE("blocked exactly inside the sub-root cell") {
    Rng rng(19);
    BspArchive a(Region::cube(2, 0.0, 10.0), 20, 3);
    for (int i = 0; i < 300; ++i) a.insert(random_point(a.domain(), rng));
    NodeId sub = a.leaves()[120];
    for (int i = 0; i < 3; ++i) sub = a.node(sub).parent;
    const Region box = a.region_of(sub);
    a.block(sub);
    int mismatches = 0, inside = 0;
    for (int i = 0; i < 1000; ++i) {
      const auto x = random_point(a.domain(), rng);
      const bool expect = oracle::in_cell(box, a.domain(), x);
      inside += expect;
      if ((a.insert(x).kind == Kind::Blocked) != expect) ++mismatches;
    }
    CHECK(mismatches == 0);
    CHECK(inside > 0);
  }
}

TEST_CASE("pruning") {
  SUBCASE("floor to zero leaves the tree alone") {
    auto a = square();
    a.insert(std::vector<double>{2, 5});
    a.insert(std::vector<double>{8, 6});
    std::ostringstream before, after;
    a.dump(before);
    CHECK(a.prune_lru(0.49) == 0);
    a.dump(after);
    CHECK(before.str() == after.str());
  }
  SUBCASE("four-leaf tree, older side goes first") {
    // a and c share the left cell, b and d the right; d arrives last, so the
    // right side was touched most recently.
    auto a = square();
    a.insert(std::vector<double>{2, 5});    // a
    a.insert(std::vector<double>{8, 6});    // b, root split x = 5
    a.insert(std::vector<double>{2.5, 8});  // c, left split y = 6.5
    a.insert(std::vector<double>{9, 1});    // d, right split y = 3.5
    REQUIRE(a.leaves().size() == 4);
    CHECK(a.prune_lru(0.5) == 2);
    CHECK(a.n_points() == 2);
    std::vector<std::vector<double>> kept;
    for (auto l : a.leaves()) kept.push_back(a.node(l).point.coords);
    CHECK(kept == std::vector<std::vector<double>>{{9, 1}, {8, 6}});
    CHECK(a.region_of(a.leaves()[0]) == Region({0, 0}, {10, 3.5}));
    CHECK(a.region_of(a.leaves()[1]) == Region({0, 3.5}, {10, 10}));
    CHECK(oracle::relative_leaf_volume(a) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("random trees keep tiling") {
    Rng rng(23);
    BspArchive a(Region::cube(3, 0.0, 1.0), 20, 3);
    for (int i = 0; i < 500; ++i) a.insert(random_point(a.domain(), rng));
    CHECK(a.prune_lru(0.5) == 250);
    CHECK(a.n_points() == 250);
    CHECK(a.leaves().size() == 250);
    CHECK(oracle::relative_leaf_volume(a) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(oracle::leaves_disjoint(a));
    CHECK(oracle::all_points_in_cells(a));
    for (int i = 0; i < 500; ++i) a.insert(random_point(a.domain(), rng));
    CHECK(oracle::relative_leaf_volume(a) == doctest::Approx(1.0).epsilon(1e-9));
    for (int i = 0; i < 200; ++i) {
      const auto x = random_point(a.domain(), rng);
      CHECK(a.locate(x) == oracle::brute_locate(a, x));
    }
  }
  SUBCASE("pruned nodes are detached") {
    auto a = square();
    a.insert(std::vector<double>{2, 5});
    a.insert(std::vector<double>{8, 6});
    const NodeId old_left = a.node(a.root()).below;
    a.prune_lru(0.5);
    try {
      a.region_of(old_left);
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Structure);
    }
  }
  SUBCASE("fraction must lie in (0, 1)") {
    auto a = square();
    a.insert(std::vector<double>{2, 5});
    for (double f : {0.0, 1.0, -0.5, 1.5}) {
      try {
        a.prune_lru(f);
        FAIL("no throw");
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parameter);
      }
    }
  }
}

TEST_CASE("dump format") {
  auto a = square();
  a.insert(std::vector<double>{2, 5});
  a.insert(std::vector<double>{8, 6});
  a.block(a.node(a.root()).above);
  std::ostringstream os;
  a.dump(os);
  std::istringstream in(os.str());
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0].rfind("0 internal 0 5 0", 0) == 0);
  CHECK(lines[1].rfind("1 leaf - - 0", 0) == 0);
  CHECK(lines[2].rfind("1 leaf - - 1", 0) == 0);
}

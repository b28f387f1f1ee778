#pragma once

// Finite plane trees: Lukasiewicz coding, Galton-Watson sampling
// (unconditioned and conditioned on total size), spatial location assignment
// and range counting.

#include <cstdint>
#include <vector>

#include "treerange/distributions.hpp"
#include "treerange/point.hpp"
#include "treerange/rng.hpp"

namespace treerange::trees {

using distributions::JumpDistribution;
using distributions::OffspringDistribution;

// Rooted ordered tree stored as child counts in preorder.
struct PlaneTree {
  std::vector<std::int32_t> preorder_children;

  std::size_t size() const { return preorder_children.size(); }
  friend bool operator==(const PlaneTree&, const PlaneTree&) = default;
};

// Plane tree with a lattice location per vertex, aligned with preorder.
struct SpatialTree {
  PlaneTree tree;
  std::vector<Point> locations;
  int dim = 0;
};

// Mutually inverse bijections between trees and Lukasiewicz increments
// (child count - 1 per vertex, preorder). Throws InvalidPath when the walk
// dips below zero early or does not end at -1.
PlaneTree tree_from_lukasiewicz(const std::vector<std::int32_t>& increments);
std::vector<std::int32_t> lukasiewicz(const PlaneTree& tree);

// Unconditioned Galton-Watson tree via the Lukasiewicz walk, aborting with
// CapExceeded when the walk has not hit -1 within size_cap steps.
PlaneTree sample_gw(const OffspringDistribution& mu, RngStream& rng,
                    std::int64_t size_cap = 1000000000);

// Exact sample of GW conditioned on exactly n vertices: rejection on the
// increment sum plus the cycle-lemma rotation. Throws InfeasibleSize when no
// n-vertex tree exists for mu's support.
PlaneTree sample_gw_conditioned_size(const OffspringDistribution& mu,
                                     std::int64_t n, RngStream& rng);

// True if some n-vertex tree has positive probability under mu.
bool size_feasible(const OffspringDistribution& mu, std::int64_t n);

// Uniform plane tree with n vertices (rotated +-1 bridge).
PlaneTree sample_uniform_plane_tree(std::int64_t n, RngStream& rng);

// Dyck path (contour) of a uniform plane tree with n+1 vertices: 2n steps of
// +-1 starting and ending at 0, staying nonnegative.
std::vector<std::int8_t> sample_dyck_path(std::int64_t n, RngStream& rng);

// Root at the origin, each edge an independent theta jump, one preorder pass.
SpatialTree assign_locations(const PlaneTree& tree, const JumpDistribution& theta,
                             RngStream& rng);

// Number of distinct vertex locations.
std::int64_t range_of(const SpatialTree& st);

}  // namespace treerange::trees

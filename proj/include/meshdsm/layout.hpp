#pragma once

// Physical-layout descriptors for logical multi-component arrays: index
// ordering, optional single-level tiling, partitioning across cores
// (block / cyclic / block-cyclic), and component grouping (SoA ... AoS)
// within each core's slab.
//
// The mapping composes in a fixed order:
//   index order -> tiling -> linearization -> partition -> grouping
// Descriptors are immutable after build_layout; every mapping operation is
// pure and freely shareable across threads.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "meshdsm/mesh.hpp"

namespace meshdsm {

enum class IndexOrder { RowMajor, ColMajor };

enum class PartitionKind { Block, Cyclic, BlockCyclic };

struct Partition {
  PartitionKind kind = PartitionKind::Block;
  int64_t block = 1;  // block length for BlockCyclic

  static Partition block_part() { return {PartitionKind::Block, 1}; }
  static Partition cyclic() { return {PartitionKind::Cyclic, 1}; }
  static Partition block_cyclic(int64_t b) { return {PartitionKind::BlockCyclic, b}; }

  friend bool operator==(const Partition&, const Partition&) = default;
};

struct LayoutSpec {
  std::vector<int64_t> shape;  // 1 to 3 extents, each >= 1
  int ncomponents = 1;
  IndexOrder order = IndexOrder::RowMajor;
  // Group sizes over components; must sum to ncomponents. Empty means SoA
  // (all groups of size 1); a single group of size ncomponents is AoS.
  std::vector<int> grouping;
  // Per-dimension tile extents (single level); empty means no tiling.
  std::vector<int64_t> tiles;
  Partition partition;
};

// Where one (component, index...) lands: owning core plus the 0-based
// element slot within that core's slab for this array.
struct Placement {
  CoreId core;
  int64_t elem_offset = 0;

  friend bool operator==(const Placement&, const Placement&) = default;
};

class LayoutDescriptor {
public:
  const LayoutSpec& spec() const { return spec_; }
  int rank() const { return static_cast<int>(spec_.shape.size()); }
  int ncomponents() const { return spec_.ncomponents; }
  int64_t total_elements() const { return n_; }
  int core_count() const { return cores_; }
  int mesh_rows() const { return mesh_rows_; }
  int mesh_cols() const { return mesh_cols_; }
  // ceil(n / P): per-core element capacity of one component slot.
  int64_t elems_per_core() const { return n_local_; }

  // Logical indices -> linear element index in [0, n), honoring index
  // order and tiling. Throws IndexOutOfBounds.
  int64_t linearize(std::span<const int64_t> indices) const;

  // Partition step: linear index -> owning core and per-component slot.
  Placement place(int64_t k) const;

  // Full accessor mapping: linearize, place, then apply grouping within
  // the core slab.
  Placement map_index(int component, std::span<const int64_t> indices) const;

  int64_t footprint_per_core(int elem_bytes) const {
    return n_local_ * spec_.ncomponents * elem_bytes;
  }

private:
  friend LayoutDescriptor build_layout(const LayoutSpec&, const MeshConfig&);

  LayoutSpec spec_;
  int64_t n_ = 0;
  int cores_ = 0;
  int mesh_rows_ = 0;
  int mesh_cols_ = 0;
  int64_t n_local_ = 0;

  // Tiling tables (empty when untiled): tiles per dimension and, for each
  // tile in enumeration order, the count of elements in all earlier tiles.
  std::vector<int64_t> tile_grid_;
  std::vector<int64_t> tile_prefix_;

  // Grouping tables, indexed by component.
  std::vector<int> group_size_of_;   // size of the group containing c
  std::vector<int> rank_in_group_;   // rank of c within its group
  std::vector<int> group_base_of_;   // components in all earlier groups
};

// Validates the spec against the mesh and precomputes the mapping tables.
// Throws InvalidSpec with a reason.
LayoutDescriptor build_layout(const LayoutSpec& spec, const MeshConfig& mesh);

// The layout clauses that are independent of a concrete array shape, as
// written on the command line:
//   order=row|col;group=soa|aos|g1,g2,...;tile=t1[,t2[,t3]];part=block|cyclic|bc:b
// Omitted clauses take the defaults (row, soa, no tile, block).
struct LayoutOptions {
  enum class Grouping { SoA, AoS, Explicit };

  IndexOrder order = IndexOrder::RowMajor;
  Grouping grouping = Grouping::SoA;
  std::vector<int> group_sizes;  // used when grouping == Explicit
  std::vector<int64_t> tiles;
  Partition partition;
};

LayoutOptions parse_layout_options(std::string_view text);

// Canonical string form (all clauses spelled out) for report echoing.
std::string format_layout_options(const LayoutOptions& opts);

// Binds options to a concrete shape and component count.
LayoutSpec make_layout_spec(const LayoutOptions& opts,
                            std::vector<int64_t> shape, int ncomponents);

}  // namespace meshdsm

#include "meshdsm/layout.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <sstream>

namespace meshdsm {

namespace {

// Rank of a multi-index within the given extents. RowMajor runs the last
// dimension fastest, ColMajor the first.
int64_t order_rank(IndexOrder order, std::span<const int64_t> idx,
                   std::span<const int64_t> extents) {
  int64_t k = 0;
  if (order == IndexOrder::RowMajor) {
    for (size_t d = 0; d < idx.size(); ++d) k = k * extents[d] + idx[d];
  } else {
    for (size_t d = idx.size(); d-- > 0;) k = k * extents[d] + idx[d];
  }
  return k;
}

// Inverse of order_rank.
void order_unrank(IndexOrder order, int64_t k, std::span<const int64_t> extents,
                  std::span<int64_t> idx_out) {
  if (order == IndexOrder::RowMajor) {
    for (size_t d = idx_out.size(); d-- > 0;) {
      idx_out[d] = k % extents[d];
      k /= extents[d];
    }
  } else {
    for (size_t d = 0; d < idx_out.size(); ++d) {
      idx_out[d] = k % extents[d];
      k /= extents[d];
    }
  }
}

int64_t ceil_div(int64_t a, int64_t b) { return (a + b - 1) / b; }

}  // namespace

LayoutDescriptor build_layout(const LayoutSpec& spec, const MeshConfig& mesh) {
  validate(mesh);

  const size_t rank = spec.shape.size();
  if (rank < 1 || rank > 3)
    fail(ErrorKind::InvalidSpec, "shape must have 1 to 3 dimensions");
  for (int64_t extent : spec.shape)
    if (extent < 1)
      fail(ErrorKind::InvalidSpec, "every shape extent must be >= 1");
  if (spec.ncomponents < 1)
    fail(ErrorKind::InvalidSpec, "ncomponents must be >= 1");

  if (!spec.grouping.empty()) {
    int sum = 0;
    for (int g : spec.grouping) {
      if (g < 1) fail(ErrorKind::InvalidSpec, "group sizes must be >= 1");
      sum += g;
    }
    if (sum != spec.ncomponents)
      fail(ErrorKind::InvalidSpec, "group sizes must sum to ncomponents");
  }

  if (!spec.tiles.empty()) {
    if (spec.tiles.size() != rank)
      fail(ErrorKind::InvalidSpec, "tile list must match the shape rank");
    for (size_t d = 0; d < rank; ++d) {
      if (spec.tiles[d] < 1)
        fail(ErrorKind::InvalidSpec, "tile extents must be >= 1");
      if (spec.tiles[d] > spec.shape[d])
        fail(ErrorKind::InvalidSpec, "tile extent exceeds the shape extent");
    }
  }

  if (spec.partition.kind == PartitionKind::BlockCyclic && spec.partition.block < 1)
    fail(ErrorKind::InvalidSpec, "block-cyclic block length must be >= 1");

  LayoutDescriptor desc;
  desc.spec_ = spec;
  desc.mesh_rows_ = mesh.rows;
  desc.mesh_cols_ = mesh.cols;
  desc.cores_ = mesh.core_count();
  desc.n_ = 1;
  for (int64_t extent : spec.shape) desc.n_ *= extent;
  desc.n_local_ = ceil_div(desc.n_, desc.cores_);

  // Normalize SoA (empty grouping) to explicit singleton groups.
  std::vector<int> groups = spec.grouping;
  if (groups.empty()) groups.assign(spec.ncomponents, 1);
  desc.spec_.grouping = groups;
  desc.group_size_of_.resize(spec.ncomponents);
  desc.rank_in_group_.resize(spec.ncomponents);
  desc.group_base_of_.resize(spec.ncomponents);
  int comp = 0, base = 0;
  for (int gsz : groups) {
    for (int r = 0; r < gsz; ++r, ++comp) {
      desc.group_size_of_[comp] = gsz;
      desc.rank_in_group_[comp] = r;
      desc.group_base_of_[comp] = base;
    }
    base += gsz;
  }

  // Edge tiles are ragged: each tile contributes exactly its valid
  // elements, so the prefix table keeps linearize a bijection onto [0, n).
  if (!spec.tiles.empty()) {
    desc.tile_grid_.resize(rank);
    for (size_t d = 0; d < rank; ++d)
      desc.tile_grid_[d] = ceil_div(spec.shape[d], spec.tiles[d]);
    const int64_t ntiles = std::accumulate(desc.tile_grid_.begin(),
                                           desc.tile_grid_.end(), int64_t{1},
                                           std::multiplies<>());
    desc.tile_prefix_.resize(ntiles);
    std::vector<int64_t> tile_coord(rank);
    int64_t running = 0;
    for (int64_t t = 0; t < ntiles; ++t) {
      desc.tile_prefix_[t] = running;
      order_unrank(spec.order, t, desc.tile_grid_, tile_coord);
      int64_t count = 1;
      for (size_t d = 0; d < rank; ++d)
        count *= std::min(spec.tiles[d],
                          spec.shape[d] - tile_coord[d] * spec.tiles[d]);
      running += count;
    }
  }

  return desc;
}

int64_t LayoutDescriptor::linearize(std::span<const int64_t> indices) const {
  if (indices.size() != spec_.shape.size())
    fail(ErrorKind::IndexOutOfBounds, "index rank does not match the shape");
  for (size_t d = 0; d < indices.size(); ++d)
    if (indices[d] < 0 || indices[d] >= spec_.shape[d])
      fail(ErrorKind::IndexOutOfBounds,
           "index " + std::to_string(indices[d]) + " outside dimension " +
               std::to_string(d));

  if (spec_.tiles.empty())
    return order_rank(spec_.order, indices, spec_.shape);

  const size_t rank = indices.size();
  int64_t tile_coord[3], within[3], extents[3];
  for (size_t d = 0; d < rank; ++d) {
    tile_coord[d] = indices[d] / spec_.tiles[d];
    within[d] = indices[d] % spec_.tiles[d];
    extents[d] = std::min(spec_.tiles[d],
                          spec_.shape[d] - tile_coord[d] * spec_.tiles[d]);
  }
  const int64_t tile = order_rank(spec_.order, {tile_coord, rank}, tile_grid_);
  const int64_t within_rank =
      order_rank(spec_.order, {within, rank}, {extents, rank});
  return tile_prefix_[tile] + within_rank;
}

Placement LayoutDescriptor::place(int64_t k) const {
  if (k < 0 || k >= n_)
    fail(ErrorKind::IndexOutOfBounds, "linear index outside [0, n)");

  int64_t core_lin = 0;
  int64_t slot = 0;
  switch (spec_.partition.kind) {
    case PartitionKind::Block:
      core_lin = k / n_local_;
      slot = k % n_local_;
      break;
    case PartitionKind::Cyclic:
      core_lin = k % cores_;
      slot = k / cores_;
      break;
    case PartitionKind::BlockCyclic: {
      const int64_t b = spec_.partition.block;
      const int64_t block_index = k / b;
      core_lin = block_index % cores_;
      slot = (block_index / cores_) * b + k % b;
      break;
    }
  }
  const int lin = static_cast<int>(core_lin);
  return Placement{CoreId{lin / mesh_cols_, lin % mesh_cols_}, slot};
}

Placement LayoutDescriptor::map_index(int component,
                                      std::span<const int64_t> indices) const {
  if (component < 0 || component >= spec_.ncomponents)
    fail(ErrorKind::IndexOutOfBounds, "component outside [0, ncomponents)");
  Placement p = place(linearize(indices));
  p.elem_offset = static_cast<int64_t>(group_base_of_[component]) * n_local_ +
                  p.elem_offset * group_size_of_[component] +
                  rank_in_group_[component];
  return p;
}

namespace {

int64_t parse_extent(std::string_view value, const char* what) {
  int64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size() || out < 1)
    fail(ErrorKind::ParseError,
         std::string("bad ") + what + " in layout spec: '" + std::string(value) + "'");
  return out;
}

std::vector<int64_t> parse_extent_list(std::string_view value, const char* what) {
  std::vector<int64_t> out;
  size_t pos = 0;
  while (pos <= value.size()) {
    const size_t comma = value.find(',', pos);
    const std::string_view item =
        value.substr(pos, comma == std::string_view::npos ? std::string_view::npos
                                                          : comma - pos);
    out.push_back(parse_extent(item, what));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

LayoutOptions parse_layout_options(std::string_view text) {
  LayoutOptions opts;
  size_t pos = 0;
  while (pos <= text.size()) {
    const size_t semi = text.find(';', pos);
    const std::string_view clause =
        text.substr(pos, semi == std::string_view::npos ? std::string_view::npos
                                                        : semi - pos);
    pos = semi == std::string_view::npos ? text.size() + 1 : semi + 1;
    if (clause.empty()) continue;

    const size_t eq = clause.find('=');
    if (eq == std::string_view::npos)
      fail(ErrorKind::ParseError,
           "layout clause '" + std::string(clause) + "' is not key=value");
    const std::string_view key = clause.substr(0, eq);
    const std::string_view value = clause.substr(eq + 1);

    if (key == "order") {
      if (value == "row") opts.order = IndexOrder::RowMajor;
      else if (value == "col") opts.order = IndexOrder::ColMajor;
      else fail(ErrorKind::ParseError, "order must be row or col");
    } else if (key == "group") {
      if (value == "soa") {
        opts.grouping = LayoutOptions::Grouping::SoA;
      } else if (value == "aos") {
        opts.grouping = LayoutOptions::Grouping::AoS;
      } else {
        opts.grouping = LayoutOptions::Grouping::Explicit;
        opts.group_sizes.clear();
        for (int64_t g : parse_extent_list(value, "group size"))
          opts.group_sizes.push_back(static_cast<int>(g));
      }
    } else if (key == "tile") {
      opts.tiles = parse_extent_list(value, "tile extent");
      if (opts.tiles.size() > 3)
        fail(ErrorKind::ParseError, "at most 3 tile extents");
    } else if (key == "part") {
      if (value == "block") opts.partition = Partition::block_part();
      else if (value == "cyclic") opts.partition = Partition::cyclic();
      else if (value.starts_with("bc:"))
        opts.partition = Partition::block_cyclic(
            parse_extent(value.substr(3), "block-cyclic length"));
      else fail(ErrorKind::ParseError, "part must be block, cyclic, or bc:b");
    } else {
      fail(ErrorKind::ParseError, "unknown layout clause '" + std::string(key) + "'");
    }
  }
  return opts;
}

std::string format_layout_options(const LayoutOptions& opts) {
  std::ostringstream out;
  out << "order=" << (opts.order == IndexOrder::RowMajor ? "row" : "col");
  out << ";group=";
  switch (opts.grouping) {
    case LayoutOptions::Grouping::SoA: out << "soa"; break;
    case LayoutOptions::Grouping::AoS: out << "aos"; break;
    case LayoutOptions::Grouping::Explicit:
      for (size_t i = 0; i < opts.group_sizes.size(); ++i)
        out << (i ? "," : "") << opts.group_sizes[i];
      break;
  }
  if (!opts.tiles.empty()) {
    out << ";tile=";
    for (size_t i = 0; i < opts.tiles.size(); ++i)
      out << (i ? "," : "") << opts.tiles[i];
  }
  out << ";part=";
  switch (opts.partition.kind) {
    case PartitionKind::Block: out << "block"; break;
    case PartitionKind::Cyclic: out << "cyclic"; break;
    case PartitionKind::BlockCyclic: out << "bc:" << opts.partition.block; break;
  }
  return out.str();
}

LayoutSpec make_layout_spec(const LayoutOptions& opts, std::vector<int64_t> shape,
                            int ncomponents) {
  LayoutSpec spec;
  spec.shape = std::move(shape);
  spec.ncomponents = ncomponents;
  spec.order = opts.order;
  switch (opts.grouping) {
    case LayoutOptions::Grouping::SoA: break;  // empty = all singleton groups
    case LayoutOptions::Grouping::AoS: spec.grouping = {ncomponents}; break;
    case LayoutOptions::Grouping::Explicit: spec.grouping = opts.group_sizes; break;
  }
  spec.tiles = opts.tiles;
  spec.partition = opts.partition;
  return spec;
}

}  // namespace meshdsm

#pragma once

// Model of the 2D RISC core array: core identities, global address
// encoding/decoding, X-Y routing hop distance, and the per-access cycle
// cost model. All operations here are pure functions of their inputs and
// safe to call concurrently.

#include <cstdint>
#include <string>
#include <string_view>

#include "meshdsm/error.hpp"

namespace meshdsm {

struct CoreId {
  int row = 0;
  int col = 0;

  friend bool operator==(const CoreId&, const CoreId&) = default;
};

// Bit split of the flat 64-bit global address word. The upper bits carry
// the core id (row above col), the low offset_bits carry the byte offset
// into that core's local memory.
struct AddressScheme {
  unsigned row_bits = 6;
  unsigned col_bits = 6;
  unsigned offset_bits = 20;

  unsigned total_bits() const { return row_bits + col_bits + offset_bits; }

  friend bool operator==(const AddressScheme&, const AddressScheme&) = default;
};

struct GlobalAddress {
  CoreId core;
  uint64_t offset = 0;

  friend bool operator==(const GlobalAddress&, const GlobalAddress&) = default;
};

enum class AccessKind { Read, Write };

// Cycle costs per access. Remote costs are affine in the hop count.
// Validation enforces remote_read_cost(h) > remote_write_cost(h) for every
// h >= 0: a read is a round trip while a write is posted.
struct CostModel {
  double local_read_cycles = 1.0;
  double local_write_cycles = 1.0;
  double remote_write_base = 2.0;
  double remote_write_per_hop = 1.5;
  double remote_read_base = 6.0;
  double remote_read_per_hop = 3.0;

  double remote_read_cost(int hops) const {
    return remote_read_base + remote_read_per_hop * hops;
  }
  double remote_write_cost(int hops) const {
    return remote_write_base + remote_write_per_hop * hops;
  }

  friend bool operator==(const CostModel&, const CostModel&) = default;
};

struct MeshConfig {
  int rows = 4;
  int cols = 4;
  uint32_t local_mem_bytes = 32768;
  // Portion of local memory usable for DSM data; the rest models the
  // instruction/runtime footprint.
  uint32_t data_budget_bytes = 16384;
  AddressScheme addr_scheme;
  CostModel cost;

  int core_count() const { return rows * cols; }

  bool contains(CoreId c) const {
    return c.row >= 0 && c.row < rows && c.col >= 0 && c.col < cols;
  }

  // Row-major linearization of core ids.
  int linear_id(CoreId c) const { return c.row * cols + c.col; }
  CoreId core_at(int lin) const { return CoreId{lin / cols, lin % cols}; }

  // 4x4 cores, 32 KB local memory of which 16 KB is usable for data.
  static MeshConfig epiphany3();

  friend bool operator==(const MeshConfig&, const MeshConfig&) = default;
};

// Throws InvalidConfig if the mesh geometry, address scheme, or cost model
// violates an invariant.
void validate(const MeshConfig& mesh);

// word = ((row << col_bits | col) << offset_bits) | offset.
// Throws OutOfRange if any field exceeds its bit width.
uint64_t encode_global(const AddressScheme& scheme, const GlobalAddress& addr);

// Exact inverse of encode_global. Throws OutOfRange if the word has bits
// above the scheme's total width.
GlobalAddress decode_global(const AddressScheme& scheme, uint64_t word);

// Decodes with the mesh's scheme and additionally rejects addresses whose
// core lies outside the mesh or whose offset exceeds local memory.
GlobalAddress decode_global(const MeshConfig& mesh, uint64_t word);

// Manhattan distance, i.e. the link traversals of deterministic X-then-Y
// routing.
int hop_distance(CoreId a, CoreId b);

// Cycles for one access: local cost when issuing == target, otherwise the
// remote formula at the routing hop distance.
double access_cost(const CostModel& cost, AccessKind kind, CoreId issuing,
                   CoreId target);

// Plain-text config, one `key = value` per line. Blank lines and lines
// starting with '#' are skipped. Recognized keys: rows, cols,
// local_mem_bytes, data_budget_bytes, row_bits, col_bits, offset_bits,
// local_read, local_write, remote_write_base, remote_write_per_hop,
// remote_read_base, remote_read_per_hop. Unknown keys are an error.
// Values override the corresponding fields of `base`; the result is
// validated before being returned.
MeshConfig parse_mesh_config(std::string_view text,
                             const MeshConfig& base = MeshConfig::epiphany3());
MeshConfig load_mesh_config(const std::string& path,
                            const MeshConfig& base = MeshConfig::epiphany3());

}  // namespace meshdsm

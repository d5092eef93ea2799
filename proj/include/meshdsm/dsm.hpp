#pragma once

// Distributed symmetric storage over per-core local memories, with
// load/store through global addresses and a traffic ledger that attributes
// every access to the simulated core that issued it.
//
// A DsmState is mutated only under exclusive access; the execution engine
// serializes core turns, so there is no internal synchronization.

#include <cstdint>
#include <vector>

#include "meshdsm/mesh.hpp"

namespace meshdsm {

struct TrafficCounters {
  uint64_t local_reads = 0;
  uint64_t local_writes = 0;
  uint64_t remote_reads = 0;
  uint64_t remote_writes = 0;
  // Sums of routing hop distances (local accesses contribute 0).
  uint64_t hop_weighted_reads = 0;
  uint64_t hop_weighted_writes = 0;
  // Sum of access_cost over all accesses issued by this core.
  double estimated_cycles = 0.0;

  uint64_t reads() const { return local_reads + remote_reads; }
  uint64_t writes() const { return local_writes + remote_writes; }

  TrafficCounters& operator+=(const TrafficCounters& o);

  friend bool operator==(const TrafficCounters&, const TrafficCounters&) = default;
};

struct TrafficStats {
  std::vector<TrafficCounters> per_core;  // indexed by linear core id

  TrafficCounters aggregate() const;

  friend bool operator==(const TrafficStats&, const TrafficStats&) = default;
};

// One symmetric slab: the same base offset on every core.
struct Allocation {
  uint32_t base_offset = 0;
  uint32_t bytes_per_core = 0;

  friend bool operator==(const Allocation&, const Allocation&) = default;
};

class DsmState {
public:
  explicit DsmState(const MeshConfig& mesh);

  const MeshConfig& mesh() const { return mesh_; }

  // Reserves bytes_per_core at the common watermark on every core and
  // advances all watermarks by the request rounded up to 8-byte alignment.
  // Throws CapacityExceeded (leaving watermarks unchanged) when the slab
  // does not fit the per-core data budget. There is no free: the modeled
  // programs allocate once at startup.
  Allocation alloc_symmetric(uint32_t bytes_per_core);

  // Instrumented accesses. width is 4 or 8 bytes; values travel in the low
  // bits of a uint64_t. Throws UnmappedAddress for offsets outside any
  // allocation, Misaligned when offset % width != 0, OutOfRange for cores
  // outside the mesh.
  uint64_t load(CoreId issuing, GlobalAddress addr, unsigned width);
  void store(CoreId issuing, GlobalAddress addr, unsigned width, uint64_t value);

  // Functional (diagnostic) accesses: same addressing checks, no traffic
  // accounting. Used by reporting and tests.
  uint64_t peek(GlobalAddress addr, unsigned width) const;
  void poke(GlobalAddress addr, unsigned width, uint64_t value);

  TrafficStats snapshot_stats() const { return stats_; }
  void reset_stats();

  uint32_t watermark(CoreId core) const;

private:
  const std::byte* locate(GlobalAddress addr, unsigned width) const;

  MeshConfig mesh_;
  std::vector<uint32_t> watermarks_;           // one per core, kept identical
  std::vector<std::vector<std::byte>> memory_;  // per-core data region
  TrafficStats stats_;
};

}  // namespace meshdsm

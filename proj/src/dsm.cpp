#include "meshdsm/dsm.hpp"

#include <cstring>

namespace meshdsm {

TrafficCounters& TrafficCounters::operator+=(const TrafficCounters& o) {
  local_reads += o.local_reads;
  local_writes += o.local_writes;
  remote_reads += o.remote_reads;
  remote_writes += o.remote_writes;
  hop_weighted_reads += o.hop_weighted_reads;
  hop_weighted_writes += o.hop_weighted_writes;
  estimated_cycles += o.estimated_cycles;
  return *this;
}

TrafficCounters TrafficStats::aggregate() const {
  TrafficCounters total;
  for (const TrafficCounters& c : per_core) total += c;
  return total;
}

DsmState::DsmState(const MeshConfig& mesh) : mesh_(mesh) {
  validate(mesh_);
  const int p = mesh_.core_count();
  watermarks_.assign(p, 0);
  memory_.assign(p, std::vector<std::byte>(mesh_.data_budget_bytes, std::byte{0}));
  stats_.per_core.assign(p, TrafficCounters{});
}

Allocation DsmState::alloc_symmetric(uint32_t bytes_per_core) {
  if (bytes_per_core == 0)
    fail(ErrorKind::InvalidSpec, "symmetric allocation of zero bytes");
  const uint32_t base = watermarks_[0];
  const uint64_t aligned = (static_cast<uint64_t>(bytes_per_core) + 7u) & ~uint64_t{7};
  if (base + aligned > mesh_.data_budget_bytes)
    fail(ErrorKind::CapacityExceeded,
         "symmetric allocation of " + std::to_string(bytes_per_core) +
             " bytes/core exceeds data budget (" + std::to_string(base) + " of " +
             std::to_string(mesh_.data_budget_bytes) + " bytes in use)");
  for (uint32_t& w : watermarks_) w = base + static_cast<uint32_t>(aligned);
  return Allocation{base, bytes_per_core};
}

const std::byte* DsmState::locate(GlobalAddress addr, unsigned width) const {
  if (width != 4 && width != 8)
    fail(ErrorKind::InvalidSpec, "access width must be 4 or 8 bytes");
  if (!mesh_.contains(addr.core))
    fail(ErrorKind::OutOfRange, "access targets a core outside the mesh");
  // Slabs are bump-allocated from offset 0, so "within an allocation" is
  // exactly "below the watermark".
  const uint32_t mark = watermarks_[mesh_.linear_id(addr.core)];
  if (addr.offset + width > mark)
    fail(ErrorKind::UnmappedAddress,
         "access at offset " + std::to_string(addr.offset) +
             " is outside any allocation");
  if (addr.offset % width != 0)
    fail(ErrorKind::Misaligned, "access offset not aligned to its width");
  return memory_[mesh_.linear_id(addr.core)].data() + addr.offset;
}

uint64_t DsmState::peek(GlobalAddress addr, unsigned width) const {
  const std::byte* src = locate(addr, width);
  uint64_t value = 0;
  std::memcpy(&value, src, width);
  return value;
}

void DsmState::poke(GlobalAddress addr, unsigned width, uint64_t value) {
  std::byte* dst = const_cast<std::byte*>(locate(addr, width));
  std::memcpy(dst, &value, width);
}

uint64_t DsmState::load(CoreId issuing, GlobalAddress addr, unsigned width) {
  if (!mesh_.contains(issuing))
    fail(ErrorKind::OutOfRange, "issuing core outside the mesh");
  const uint64_t value = peek(addr, width);

  TrafficCounters& c = stats_.per_core[mesh_.linear_id(issuing)];
  if (issuing == addr.core) {
    ++c.local_reads;
  } else {
    ++c.remote_reads;
    c.hop_weighted_reads += hop_distance(issuing, addr.core);
  }
  c.estimated_cycles += access_cost(mesh_.cost, AccessKind::Read, issuing, addr.core);
  return value;
}

void DsmState::store(CoreId issuing, GlobalAddress addr, unsigned width,
                     uint64_t value) {
  if (!mesh_.contains(issuing))
    fail(ErrorKind::OutOfRange, "issuing core outside the mesh");
  poke(addr, width, value);

  TrafficCounters& c = stats_.per_core[mesh_.linear_id(issuing)];
  if (issuing == addr.core) {
    ++c.local_writes;
  } else {
    ++c.remote_writes;
    c.hop_weighted_writes += hop_distance(issuing, addr.core);
  }
  c.estimated_cycles += access_cost(mesh_.cost, AccessKind::Write, issuing, addr.core);
}

void DsmState::reset_stats() {
  stats_.per_core.assign(mesh_.core_count(), TrafficCounters{});
}

uint32_t DsmState::watermark(CoreId core) const {
  if (!mesh_.contains(core))
    fail(ErrorKind::OutOfRange, "core outside the mesh");
  return watermarks_[mesh_.linear_id(core)];
}

}  // namespace meshdsm

#include "meshdsm/mesh.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace meshdsm {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::CapacityExceeded: return "CapacityExceeded";
    case ErrorKind::UnmappedAddress: return "UnmappedAddress";
    case ErrorKind::Misaligned: return "Misaligned";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::IndexOutOfBounds: return "IndexOutOfBounds";
    case ErrorKind::InvalidPlan: return "InvalidPlan";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Error";
}

MeshConfig MeshConfig::epiphany3() {
  MeshConfig mesh;
  mesh.rows = 4;
  mesh.cols = 4;
  mesh.local_mem_bytes = 32768;
  mesh.data_budget_bytes = 16384;
  return mesh;
}

namespace {

// Largest value representable in `bits` bits (bits <= 64).
uint64_t field_max(unsigned bits) {
  return bits >= 64 ? ~uint64_t{0} : (uint64_t{1} << bits) - 1;
}

}  // namespace

void validate(const MeshConfig& mesh) {
  if (mesh.rows < 1 || mesh.cols < 1)
    fail(ErrorKind::InvalidConfig, "mesh must have at least one row and column");
  if (mesh.data_budget_bytes > mesh.local_mem_bytes)
    fail(ErrorKind::InvalidConfig, "data_budget_bytes exceeds local_mem_bytes");

  const AddressScheme& s = mesh.addr_scheme;
  if (s.total_bits() > 64)
    fail(ErrorKind::InvalidConfig, "address scheme wider than 64 bits");
  if (static_cast<uint64_t>(mesh.rows) > field_max(s.row_bits) + 1)
    fail(ErrorKind::InvalidConfig, "rows do not fit row_bits");
  if (static_cast<uint64_t>(mesh.cols) > field_max(s.col_bits) + 1)
    fail(ErrorKind::InvalidConfig, "cols do not fit col_bits");
  if (s.offset_bits < 64 &&
      static_cast<uint64_t>(mesh.local_mem_bytes) > (uint64_t{1} << s.offset_bits))
    fail(ErrorKind::InvalidConfig, "local_mem_bytes does not fit offset_bits");

  const CostModel& c = mesh.cost;
  const double params[] = {c.local_read_cycles,  c.local_write_cycles,
                           c.remote_write_base,  c.remote_write_per_hop,
                           c.remote_read_base,   c.remote_read_per_hop};
  for (double p : params)
    if (!(p >= 0.0) || !std::isfinite(p))
      fail(ErrorKind::InvalidConfig, "cost parameters must be finite and nonnegative");
  // Affine in h, so read(h) > write(h) for all h >= 0 iff it holds at h=0
  // and the read slope is no smaller.
  if (!(c.remote_read_base > c.remote_write_base) ||
      c.remote_read_per_hop < c.remote_write_per_hop)
    fail(ErrorKind::InvalidConfig,
         "remote read cost must dominate remote write cost at every hop count");
}

uint64_t encode_global(const AddressScheme& scheme, const GlobalAddress& addr) {
  if (addr.core.row < 0 ||
      static_cast<uint64_t>(addr.core.row) > field_max(scheme.row_bits))
    fail(ErrorKind::OutOfRange, "row exceeds row_bits");
  if (addr.core.col < 0 ||
      static_cast<uint64_t>(addr.core.col) > field_max(scheme.col_bits))
    fail(ErrorKind::OutOfRange, "col exceeds col_bits");
  if (addr.offset > field_max(scheme.offset_bits))
    fail(ErrorKind::OutOfRange, "offset exceeds offset_bits");

  uint64_t word = static_cast<uint64_t>(addr.core.row);
  word = (word << scheme.col_bits) | static_cast<uint64_t>(addr.core.col);
  word = (word << scheme.offset_bits) | addr.offset;
  return word;
}

GlobalAddress decode_global(const AddressScheme& scheme, uint64_t word) {
  if (scheme.total_bits() < 64 && (word >> scheme.total_bits()) != 0)
    fail(ErrorKind::OutOfRange, "word has bits above the address scheme width");

  GlobalAddress addr;
  addr.offset = word & field_max(scheme.offset_bits);
  const uint64_t core_part = word >> scheme.offset_bits;
  addr.core.col = static_cast<int>(core_part & field_max(scheme.col_bits));
  addr.core.row = static_cast<int>(core_part >> scheme.col_bits);
  return addr;
}

GlobalAddress decode_global(const MeshConfig& mesh, uint64_t word) {
  GlobalAddress addr = decode_global(mesh.addr_scheme, word);
  if (!mesh.contains(addr.core))
    fail(ErrorKind::OutOfRange, "decoded core lies outside the mesh");
  if (addr.offset >= mesh.local_mem_bytes)
    fail(ErrorKind::OutOfRange, "decoded offset exceeds local memory");
  return addr;
}

int hop_distance(CoreId a, CoreId b) {
  return std::abs(a.row - b.row) + std::abs(a.col - b.col);
}

double access_cost(const CostModel& cost, AccessKind kind, CoreId issuing,
                   CoreId target) {
  if (issuing == target)
    return kind == AccessKind::Read ? cost.local_read_cycles
                                    : cost.local_write_cycles;
  const int hops = hop_distance(issuing, target);
  return kind == AccessKind::Read ? cost.remote_read_cost(hops)
                                  : cost.remote_write_cost(hops);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

int64_t parse_int(std::string_view value, std::string_view key) {
  int64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    fail(ErrorKind::ParseError,
         "bad integer for key '" + std::string(key) + "': " + std::string(value));
  return out;
}

double parse_real(std::string_view value, std::string_view key) {
  std::string buf(value);
  char* end = nullptr;
  const double out = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || buf.empty())
    fail(ErrorKind::ParseError,
         "bad number for key '" + std::string(key) + "': " + buf);
  return out;
}

}  // namespace

MeshConfig parse_mesh_config(std::string_view text, const MeshConfig& base) {
  MeshConfig mesh = base;
  size_t pos = 0;
  int lineno = 0;
  while (pos <= text.size()) {
    const size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos
                                                 ? std::string_view::npos
                                                 : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++lineno;

    line = trim(line);
    if (line.empty() || line.front() == '#') continue;

    const size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      fail(ErrorKind::ParseError,
           "line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));

    if (key == "rows") mesh.rows = static_cast<int>(parse_int(value, key));
    else if (key == "cols") mesh.cols = static_cast<int>(parse_int(value, key));
    else if (key == "local_mem_bytes")
      mesh.local_mem_bytes = static_cast<uint32_t>(parse_int(value, key));
    else if (key == "data_budget_bytes")
      mesh.data_budget_bytes = static_cast<uint32_t>(parse_int(value, key));
    else if (key == "row_bits")
      mesh.addr_scheme.row_bits = static_cast<unsigned>(parse_int(value, key));
    else if (key == "col_bits")
      mesh.addr_scheme.col_bits = static_cast<unsigned>(parse_int(value, key));
    else if (key == "offset_bits")
      mesh.addr_scheme.offset_bits = static_cast<unsigned>(parse_int(value, key));
    else if (key == "local_read") mesh.cost.local_read_cycles = parse_real(value, key);
    else if (key == "local_write") mesh.cost.local_write_cycles = parse_real(value, key);
    else if (key == "remote_write_base") mesh.cost.remote_write_base = parse_real(value, key);
    else if (key == "remote_write_per_hop") mesh.cost.remote_write_per_hop = parse_real(value, key);
    else if (key == "remote_read_base") mesh.cost.remote_read_base = parse_real(value, key);
    else if (key == "remote_read_per_hop") mesh.cost.remote_read_per_hop = parse_real(value, key);
    else
      fail(ErrorKind::ParseError, "unknown config key '" + std::string(key) + "'");
  }
  validate(mesh);
  return mesh;
}

MeshConfig load_mesh_config(const std::string& path, const MeshConfig& base) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InvalidConfig, "cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_mesh_config(buf.str(), base);
}

}  // namespace meshdsm

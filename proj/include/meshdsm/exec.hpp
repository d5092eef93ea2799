#pragma once

// Iteration intervals, shifted index terms, expression assignment, and
// parallel_for with plans that map iterations onto simulated executing
// cores. Every array access inside a loop body goes through the DSM with
// the executing core as the issuer, so loop bodies never name cores.
//
// parallel_for is logically parallel but executes deterministically:
// cores run in ascending linear id and each core's iterations in
// lexicographic domain order. For race-free bodies this matches any
// concurrent schedule bit-exactly.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "meshdsm/dsm.hpp"
#include "meshdsm/layout.hpp"

namespace meshdsm {

// Half-open integer range [lo, hi). Interval(n) means [0, n).
struct Interval {
  int64_t lo = 0;
  int64_t hi = 0;

  Interval() = default;
  explicit Interval(int64_t n) : lo(0), hi(n) { check(); }
  Interval(int64_t lo_, int64_t hi_) : lo(lo_), hi(hi_) { check(); }

  int64_t length() const { return hi - lo; }

private:
  void check() const {
    if (lo > hi) fail(ErrorKind::InvalidSpec, "interval with lo > hi");
  }
};

// One axis of an array reference: which loop variable plus an integer
// shift, e.g. J-1. Loop variables are identified by their position in the
// iteration domain (0 = outermost).
struct IndexTerm {
  int dim = 0;
  int64_t shift = 0;

  friend IndexTerm operator+(IndexTerm t, int64_t s) { t.shift += s; return t; }
  friend IndexTerm operator-(IndexTerm t, int64_t s) { t.shift -= s; return t; }
};

inline IndexTerm axis(int dim) { return IndexTerm{dim, 0}; }

enum class ElemKind { Real32, Real64 };

inline int elem_bytes(ElemKind kind) { return kind == ElemKind::Real32 ? 4 : 8; }

// A logical multi-component array backed by one symmetric DSM slab.
struct DistArray {
  LayoutDescriptor layout;
  Allocation allocation;
  ElemKind elem = ElemKind::Real32;
};

// Symmetric allocation of footprint_per_core bytes; contents start zeroed.
// Throws CapacityExceeded when the slab does not fit.
DistArray dist_alloc(DsmState& dsm, const LayoutDescriptor& desc, ElemKind kind);

// Transparent accessors: map_index -> global address -> DSM load/store,
// attributed to the issuing core. Real32 stores round the value to float.
double get(DsmState& dsm, const DistArray& a, CoreId issuing, int component,
           std::span<const int64_t> indices);
void set(DsmState& dsm, DistArray& a, CoreId issuing, int component,
         std::span<const int64_t> indices, double value);

// Functional read without traffic accounting (reporting and tests).
double peek_value(const DsmState& dsm, const DistArray& a, int component,
                  std::span<const int64_t> indices);

enum class PlanKind { Serial, BlockRows, CyclicIters, OwnerComputes };

struct Plan {
  PlanKind kind = PlanKind::Serial;
  const DistArray* anchor = nullptr;  // OwnerComputes only

  static Plan serial() { return {PlanKind::Serial, nullptr}; }
  static Plan block_rows() { return {PlanKind::BlockRows, nullptr}; }
  static Plan cyclic_iters() { return {PlanKind::CyclicIters, nullptr}; }
  static Plan owner_computes(const DistArray& anchor) {
    return {PlanKind::OwnerComputes, &anchor};
  }
};

// Which core executes the given domain point.
//   Serial:        core (0,0)
//   BlockRows:     outermost interval split into P contiguous chunks,
//                  chunk p = [floor(p*len/P), floor((p+1)*len/P))
//   CyclicIters:   outermost index r on core (r - lo) mod P
//   OwnerComputes: the core owning the anchor element at the point
// Throws InvalidPlan for an OwnerComputes plan whose anchor does not cover
// the domain or lives on a different mesh.
CoreId iteration_owner(const Plan& plan, std::span<const Interval> domain,
                       std::span<const int64_t> point, const MeshConfig& mesh);

// Access context bound to the executing core for the current iteration.
class ExecContext {
public:
  ExecContext(DsmState& dsm, CoreId issuing) : dsm_(&dsm), issuing_(issuing) {}

  CoreId issuing() const { return issuing_; }

  double get(const DistArray& a, int component,
             std::span<const int64_t> indices) const {
    return meshdsm::get(*dsm_, a, issuing_, component, indices);
  }
  void set(DistArray& a, int component, std::span<const int64_t> indices,
           double value) const {
    meshdsm::set(*dsm_, a, issuing_, component, indices, value);
  }

  template <class... Ix>
  double at(const DistArray& a, int component, Ix... ix) const {
    const int64_t idx[] = {static_cast<int64_t>(ix)...};
    return get(a, component, idx);
  }
  template <class... Ix>
  void put(DistArray& a, int component, double value, Ix... ix) const {
    const int64_t idx[] = {static_cast<int64_t>(ix)...};
    set(a, component, idx, value);
  }

private:
  DsmState* dsm_;
  CoreId issuing_;
};

using LoopBody = std::function<void(ExecContext&, std::span<const int64_t>)>;

// Invokes body exactly once per lattice point of the domain, with the
// issuing core chosen by the plan. Bodies must be race-free: across
// iterations, reads and writes touch disjoint written locations.
void parallel_for(DsmState& dsm, const Plan& plan,
                  std::span<const Interval> domain, const LoopBody& body);

// --- expression trees -----------------------------------------------------
//
// A small runtime expression representation: array references with shifted
// index terms, constants, and arithmetic nodes. Leaves are evaluated left
// to right, exactly once per point, fixing the floating-point operation
// order so results can be compared bit-exactly across layouts and plans.

class Expr;

namespace detail {

enum class ExprOp { Leaf, Constant, Neg, Add, Sub, Mul, Div };

struct ExprNode {
  ExprOp op = ExprOp::Constant;
  double constant = 0.0;
  const DistArray* array = nullptr;
  int component = 0;
  std::vector<IndexTerm> terms;
  std::shared_ptr<const ExprNode> left;
  std::shared_ptr<const ExprNode> right;
};

}  // namespace detail

class Expr {
public:
  Expr() : node_(std::make_shared<detail::ExprNode>()) {}

  static Expr constant(double value);
  static Expr ref(const DistArray& a, int component, std::vector<IndexTerm> terms);

  const detail::ExprNode& node() const { return *node_; }

  friend Expr operator-(const Expr& e);
  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);

private:
  explicit Expr(std::shared_ptr<const detail::ExprNode> node)
      : node_(std::move(node)) {}

  std::shared_ptr<const detail::ExprNode> node_;
};

// Left-hand side of an assignment: destination component plus the
// iteration domain, one interval per array dimension. The destination is
// written at the unshifted domain point.
struct BoundRef {
  DistArray* array = nullptr;
  int component = 0;
  std::vector<Interval> domain;
};

inline BoundRef slice(DistArray& a, int component, std::vector<Interval> domain) {
  return BoundRef{&a, component, std::move(domain)};
}

// dst(point) = eval(expr, point) over the domain, equivalent to a
// parallel_for under the given plan. Throws ShapeMismatch when the domain
// does not conform to the destination or any referenced array.
void assign(DsmState& dsm, const Plan& plan, const BoundRef& dst, const Expr& expr);

}  // namespace meshdsm

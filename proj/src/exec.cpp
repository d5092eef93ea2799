#include "meshdsm/exec.hpp"

#include <bit>
#include <cmath>

namespace meshdsm {

DistArray dist_alloc(DsmState& dsm, const LayoutDescriptor& desc, ElemKind kind) {
  if (desc.core_count() != dsm.mesh().core_count() ||
      desc.mesh_cols() != dsm.mesh().cols)
    fail(ErrorKind::InvalidSpec, "layout was built for a different mesh");
  const int64_t footprint = desc.footprint_per_core(elem_bytes(kind));
  DistArray a;
  a.layout = desc;
  a.allocation = dsm.alloc_symmetric(static_cast<uint32_t>(footprint));
  a.elem = kind;
  return a;
}

namespace {

GlobalAddress element_address(const DistArray& a, int component,
                              std::span<const int64_t> indices) {
  const Placement p = a.layout.map_index(component, indices);
  const uint64_t offset = a.allocation.base_offset +
                          static_cast<uint64_t>(p.elem_offset) * elem_bytes(a.elem);
  return GlobalAddress{p.core, offset};
}

double word_to_value(uint64_t word, ElemKind kind) {
  if (kind == ElemKind::Real32)
    return std::bit_cast<float>(static_cast<uint32_t>(word));
  return std::bit_cast<double>(word);
}

uint64_t value_to_word(double value, ElemKind kind) {
  if (kind == ElemKind::Real32)
    return std::bit_cast<uint32_t>(static_cast<float>(value));
  return std::bit_cast<uint64_t>(value);
}

}  // namespace

double get(DsmState& dsm, const DistArray& a, CoreId issuing, int component,
           std::span<const int64_t> indices) {
  const GlobalAddress addr = element_address(a, component, indices);
  return word_to_value(dsm.load(issuing, addr, elem_bytes(a.elem)), a.elem);
}

void set(DsmState& dsm, DistArray& a, CoreId issuing, int component,
         std::span<const int64_t> indices, double value) {
  const GlobalAddress addr = element_address(a, component, indices);
  dsm.store(issuing, addr, elem_bytes(a.elem), value_to_word(value, a.elem));
}

double peek_value(const DsmState& dsm, const DistArray& a, int component,
                  std::span<const int64_t> indices) {
  const GlobalAddress addr = element_address(a, component, indices);
  return word_to_value(dsm.peek(addr, elem_bytes(a.elem)), a.elem);
}

namespace {

void validate_plan(const Plan& plan, std::span<const Interval> domain,
                   const MeshConfig& mesh) {
  if (plan.kind != PlanKind::OwnerComputes) return;
  if (plan.anchor == nullptr)
    fail(ErrorKind::InvalidPlan, "owner-computes plan without an anchor array");
  const LayoutDescriptor& layout = plan.anchor->layout;
  if (layout.core_count() != mesh.core_count() || layout.mesh_cols() != mesh.cols)
    fail(ErrorKind::InvalidPlan, "anchor layout lives on a different mesh");
  if (static_cast<int>(domain.size()) != layout.rank())
    fail(ErrorKind::InvalidPlan, "domain rank does not match the anchor array");
  for (size_t d = 0; d < domain.size(); ++d)
    if (domain[d].lo < 0 || domain[d].hi > layout.spec().shape[d])
      fail(ErrorKind::InvalidPlan, "domain extends outside the anchor array");
}

}  // namespace

CoreId iteration_owner(const Plan& plan, std::span<const Interval> domain,
                       std::span<const int64_t> point, const MeshConfig& mesh) {
  validate_plan(plan, domain, mesh);
  const int cores = mesh.core_count();
  switch (plan.kind) {
    case PlanKind::Serial:
      return CoreId{0, 0};
    case PlanKind::BlockRows: {
      const int64_t len = domain[0].length();
      const int64_t r = point[0] - domain[0].lo;
      // Owner of r under chunk boundaries floor(p*len/P).
      const int64_t p = ((r + 1) * cores - 1) / len;
      return mesh.core_at(static_cast<int>(p));
    }
    case PlanKind::CyclicIters: {
      const int64_t r = point[0] - domain[0].lo;
      return mesh.core_at(static_cast<int>(r % cores));
    }
    case PlanKind::OwnerComputes:
      return plan.anchor->layout.place(plan.anchor->layout.linearize(point)).core;
  }
  fail(ErrorKind::InvalidPlan, "unknown plan kind");
}

namespace {

// Lexicographic walk of the domain lattice; calls visit(point) for each.
template <class Visit>
void for_each_point(std::span<const Interval> domain, const Visit& visit) {
  const size_t rank = domain.size();
  std::vector<int64_t> point(rank);
  for (size_t d = 0; d < rank; ++d) {
    if (domain[d].length() == 0) return;
    point[d] = domain[d].lo;
  }
  for (;;) {
    visit(std::span<const int64_t>(point));
    size_t d = rank;
    while (d-- > 0) {
      if (++point[d] < domain[d].hi) break;
      point[d] = domain[d].lo;
      if (d == 0) return;
    }
  }
}

}  // namespace

void parallel_for(DsmState& dsm, const Plan& plan,
                  std::span<const Interval> domain, const LoopBody& body) {
  if (domain.empty()) fail(ErrorKind::InvalidPlan, "empty iteration domain");
  validate_plan(plan, domain, dsm.mesh());
  const MeshConfig& mesh = dsm.mesh();

  if (plan.kind == PlanKind::Serial) {
    ExecContext ctx(dsm, CoreId{0, 0});
    for_each_point(domain, [&](std::span<const int64_t> point) { body(ctx, point); });
    return;
  }

  // Core turns in ascending linear id, each core's iterations in
  // lexicographic order.
  for (int lin = 0; lin < mesh.core_count(); ++lin) {
    const CoreId core = mesh.core_at(lin);
    ExecContext ctx(dsm, core);
    for_each_point(domain, [&](std::span<const int64_t> point) {
      if (iteration_owner(plan, domain, point, mesh) == core) body(ctx, point);
    });
  }
}

Expr Expr::constant(double value) {
  auto node = std::make_shared<detail::ExprNode>();
  node->op = detail::ExprOp::Constant;
  node->constant = value;
  return Expr(std::move(node));
}

Expr Expr::ref(const DistArray& a, int component, std::vector<IndexTerm> terms) {
  auto node = std::make_shared<detail::ExprNode>();
  node->op = detail::ExprOp::Leaf;
  node->array = &a;
  node->component = component;
  node->terms = std::move(terms);
  return Expr(std::move(node));
}

namespace {

Expr make_binary(detail::ExprOp op, const Expr& a, const Expr& b) {
  auto node = std::make_shared<detail::ExprNode>();
  node->op = op;
  node->left = std::make_shared<detail::ExprNode>(a.node());
  node->right = std::make_shared<detail::ExprNode>(b.node());
  return Expr::constant(0);  // placeholder, replaced below
}

}  // namespace

Expr operator-(const Expr& e) {
  auto node = std::make_shared<detail::ExprNode>();
  node->op = detail::ExprOp::Neg;
  node->left = std::make_shared<detail::ExprNode>(e.node());
  return Expr(std::move(node));
}

#define MESHDSM_BINARY_OP(sym, opcode)                              \
  Expr operator sym(const Expr& a, const Expr& b) {                \
    auto node = std::make_shared<detail::ExprNode>();              \
    node->op = detail::ExprOp::opcode;                             \
    node->left = std::make_shared<detail::ExprNode>(a.node());     \
    node->right = std::make_shared<detail::ExprNode>(b.node());    \
    return Expr(std::move(node));                                  \
  }

MESHDSM_BINARY_OP(+, Add)
MESHDSM_BINARY_OP(-, Sub)
MESHDSM_BINARY_OP(*, Mul)
MESHDSM_BINARY_OP(/, Div)
#undef MESHDSM_BINARY_OP

namespace {

double eval_expr(const detail::ExprNode& node, ExecContext& ctx,
                 std::span<const int64_t> point, int64_t* scratch) {
  switch (node.op) {
    case detail::ExprOp::Constant:
      return node.constant;
    case detail::ExprOp::Leaf: {
      for (size_t d = 0; d < node.terms.size(); ++d)
        scratch[d] = point[node.terms[d].dim] + node.terms[d].shift;
      return ctx.get(*node.array, node.component, {scratch, node.terms.size()});
    }
    case detail::ExprOp::Neg:
      return -eval_expr(*node.left, ctx, point, scratch);
    case detail::ExprOp::Add: {
      const double l = eval_expr(*node.left, ctx, point, scratch);
      return l + eval_expr(*node.right, ctx, point, scratch);
    }
    case detail::ExprOp::Sub: {
      const double l = eval_expr(*node.left, ctx, point, scratch);
      return l - eval_expr(*node.right, ctx, point, scratch);
    }
    case detail::ExprOp::Mul: {
      const double l = eval_expr(*node.left, ctx, point, scratch);
      return l * eval_expr(*node.right, ctx, point, scratch);
    }
    case detail::ExprOp::Div: {
      const double l = eval_expr(*node.left, ctx, point, scratch);
      return l / eval_expr(*node.right, ctx, point, scratch);
    }
  }
  return 0.0;
}

void validate_leaf(const detail::ExprNode& node, std::span<const Interval> domain) {
  switch (node.op) {
    case detail::ExprOp::Leaf: {
      const LayoutDescriptor& layout = node.array->layout;
      if (static_cast<int>(node.terms.size()) != layout.rank())
        fail(ErrorKind::ShapeMismatch,
             "array reference rank does not match the array");
      if (node.component < 0 || node.component >= layout.ncomponents())
        fail(ErrorKind::ShapeMismatch, "component outside the referenced array");
      for (size_t d = 0; d < node.terms.size(); ++d) {
        const IndexTerm& t = node.terms[d];
        if (t.dim < 0 || t.dim >= static_cast<int>(domain.size()))
          fail(ErrorKind::ShapeMismatch, "index term names a missing loop variable");
        const int64_t lo = domain[t.dim].lo + t.shift;
        const int64_t hi = domain[t.dim].hi + t.shift;
        if (lo < 0 || hi > layout.spec().shape[d])
          fail(ErrorKind::ShapeMismatch,
               "shifted index range falls outside the referenced array");
      }
      return;
    }
    case detail::ExprOp::Constant:
      return;
    default:
      if (node.left) validate_leaf(*node.left, domain);
      if (node.right) validate_leaf(*node.right, domain);
  }
}

}  // namespace

void assign(DsmState& dsm, const Plan& plan, const BoundRef& dst, const Expr& expr) {
  if (dst.array == nullptr) fail(ErrorKind::ShapeMismatch, "assignment without a destination");
  const LayoutDescriptor& layout = dst.array->layout;
  if (static_cast<int>(dst.domain.size()) != layout.rank())
    fail(ErrorKind::ShapeMismatch, "domain rank does not match the destination");
  if (dst.component < 0 || dst.component >= layout.ncomponents())
    fail(ErrorKind::ShapeMismatch, "component outside the destination array");
  for (size_t d = 0; d < dst.domain.size(); ++d)
    if (dst.domain[d].lo < 0 || dst.domain[d].hi > layout.spec().shape[d])
      fail(ErrorKind::ShapeMismatch, "domain extends outside the destination array");
  validate_leaf(expr.node(), dst.domain);

  DistArray* out = dst.array;
  const int component = dst.component;
  const detail::ExprNode& root = expr.node();
  parallel_for(dsm, plan, dst.domain,
               [&](ExecContext& ctx, std::span<const int64_t> point) {
                 int64_t scratch[3];
                 const double value = eval_expr(root, ctx, point, scratch);
                 ctx.set(*out, component, point, value);
               });
}

}  // namespace meshdsm

#include "vgvae/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "vgvae/errors.hpp"
#include "vgvae/kernels.hpp"

namespace vgvae {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

Parameter::Parameter(std::string name, Shape shape)
    : name(std::move(name)), shape(std::move(shape)) {
  for (auto d : this->shape)
    if (d == 0) throw DimensionError("parameter " + this->name + " has a zero dimension");
  value.assign(shape_size(this->shape), 0.0);
  grad.assign(value.size(), 0.0);
}

void Parameter::zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

// ---------------------------------------------------------------------------
// Tensor

const Shape& Tensor::shape() const { return tape_->shape_of(id_); }
std::size_t Tensor::size() const { return shape_size(shape()); }
std::size_t Tensor::rows() const { return rank() == 2 ? shape()[0] : 1; }
std::size_t Tensor::cols() const {
  const auto& s = shape();
  if (s.empty()) return 1;
  return s.back();
}
std::span<const double> Tensor::data() const { return tape_->value(id_); }

std::vector<double> Tensor::grad() const {
  if (!tape_->has_grad(id_)) return std::vector<double>(size(), 0.0);
  auto g = tape_->grad(id_);
  return {g.begin(), g.end()};
}

double Tensor::item() const {
  if (size() != 1) throw ContractError("item() on tensor of shape " + shape_str(shape()));
  return data()[0];
}

// ---------------------------------------------------------------------------
// Tape

Tensor Tape::constant(Shape shape, std::vector<double> values) {
  if (shape_size(shape) != values.size())
    throw DimensionError("constant of shape " + shape_str(shape) + " given " +
                         std::to_string(values.size()) + " values");
  return record(std::move(shape), std::move(values), nullptr);
}

Tensor Tape::constant(std::initializer_list<double> row) {
  return constant({1, row.size()}, std::vector<double>(row));
}

Tensor Tape::scalar(double v) { return record({}, {v}, nullptr); }

Tensor Tape::zeros(Shape shape) {
  const auto n = shape_size(shape);
  return record(std::move(shape), std::vector<double>(n, 0.0), nullptr);
}

Tensor Tape::param(const Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return {this, it->second};
  Node n;
  n.shape = p.shape;
  n.param = &p;
  nodes_.push_back(std::move(n));
  param_nodes_.emplace(&p, nodes_.size() - 1);
  return {this, nodes_.size() - 1};
}

Tensor Tape::record(Shape shape, std::vector<double> values, Backward backward) {
  Node n;
  n.shape = std::move(shape);
  n.value = std::move(values);
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

std::span<const double> Tape::value(std::size_t id) const {
  const Node& n = nodes_[id];
  if (n.param) return n.param->value;
  return n.value;
}

std::span<const double> Tape::grad(std::size_t id) const {
  const Node& n = nodes_[id];
  if (n.param && mode_ == GradMode::accumulate) return n.param->grad;
  return n.grad;
}

std::span<double> Tape::grad_mut(std::size_t id) {
  Node& n = nodes_[id];
  // Only accumulate-mode tapes write into parameters; such tapes are bound
  // to parameters their owner is allowed to mutate.
  if (n.param && mode_ == GradMode::accumulate) return const_cast<Parameter*>(n.param)->grad;
  if (n.grad.empty()) n.grad.assign(shape_size(n.shape), 0.0);
  return n.grad;
}

bool Tape::has_grad(std::size_t id) const {
  const Node& n = nodes_[id];
  return (n.param != nullptr && mode_ == GradMode::accumulate) || !n.grad.empty();
}

void Tape::backward(const Tensor& loss) {
  if (loss.tape() != this) throw ContractError("backward: loss belongs to another tape");
  if (loss.size() != 1)
    throw ContractError("backward: loss must be scalar, got shape " + shape_str(loss.shape()));
  for (Node& n : nodes_)
    if (!n.param || mode_ == GradMode::frozen) n.grad.clear();
  grad_mut(loss.id())[0] += 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.backward && !n.grad.empty()) n.backward(*this, i);
  }
}

// ---------------------------------------------------------------------------
// Primitives

namespace {

Tape& same_tape(const Tensor& a, const Tensor& b) {
  if (!a.valid() || !b.valid()) throw ContractError("operation on an empty tensor handle");
  if (a.tape() != b.tape()) throw ContractError("operands recorded on different tapes");
  return *a.tape();
}

Tape& tape_of(const Tensor& a) {
  if (!a.valid()) throw ContractError("operation on an empty tensor handle");
  return *a.tape();
}

std::string pair_str(const Tensor& a, const Tensor& b) {
  return shape_str(a.shape()) + " and " + shape_str(b.shape());
}

// Unary elementwise op whose derivative is expressed through (x, y).
template <class F, class D>
Tensor unary(const Tensor& a, F f, D dfdx) {
  Tape& t = tape_of(a);
  auto x = a.data();
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  const std::size_t ai = a.id();
  return t.record(a.shape(), std::move(y), [ai, dfdx](Tape& tp, std::size_t self) {
    auto g = tp.grad(self);
    auto x = tp.value(ai);
    auto y = tp.value(self);
    auto ga = tp.grad_mut(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * dfdx(x[i], y[i]);
  });
}

enum class Bin { add, sub, mul, div };

Tensor binary(const Tensor& a, const Tensor& b, Bin op) {
  Tape& t = same_tape(a, b);
  const std::size_t na = a.size(), nb = b.size();
  Shape out_shape;
  if (a.shape() == b.shape() || na == nb) {
    if (a.shape() != b.shape()) throw DimensionError("elementwise shape mismatch: " + pair_str(a, b));
    out_shape = a.shape();
  } else if (nb == 1) {
    out_shape = a.shape();
  } else if (na == 1) {
    out_shape = b.shape();
  } else {
    throw DimensionError("elementwise shape mismatch: " + pair_str(a, b));
  }
  const std::size_t n = shape_size(out_shape);
  auto x = a.data();
  auto y = b.data();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = x[na == 1 ? 0 : i];
    const double v = y[nb == 1 ? 0 : i];
    switch (op) {
      case Bin::add: out[i] = u + v; break;
      case Bin::sub: out[i] = u - v; break;
      case Bin::mul: out[i] = u * v; break;
      case Bin::div: out[i] = u / v; break;
    }
  }
  const std::size_t ai = a.id(), bi = b.id();
  return t.record(std::move(out_shape), std::move(out), [ai, bi, na, nb, op](Tape& tp, std::size_t self) {
    auto g = tp.grad(self);
    auto x = tp.value(ai);
    auto y = tp.value(bi);
    // a and b may be the same node; both spans then alias one buffer
    auto ga = tp.grad_mut(ai);
    auto gb = tp.grad_mut(bi);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const std::size_t ia = na == 1 ? 0 : i;
      const std::size_t ib = nb == 1 ? 0 : i;
      switch (op) {
        case Bin::add:
          ga[ia] += g[i];
          gb[ib] += g[i];
          break;
        case Bin::sub:
          ga[ia] += g[i];
          gb[ib] -= g[i];
          break;
        case Bin::mul:
          ga[ia] += g[i] * y[ib];
          gb[ib] += g[i] * x[ia];
          break;
        case Bin::div:
          ga[ia] += g[i] / y[ib];
          gb[ib] -= g[i] * x[ia] / (y[ib] * y[ib]);
          break;
      }
    }
  });
}

double stable_softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::size_t require_rank2(const Tensor& a, const char* op) {
  if (a.rank() != 2)
    throw DimensionError(std::string(op) + " expects a rank-2 tensor, got " + shape_str(a.shape()));
  return a.shape()[0];
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  Tape& t = same_tape(a, b);
  if (a.rank() != 2 || b.rank() != 2 || a.shape()[1] != b.shape()[0])
    throw DimensionError("matmul shape mismatch: " + pair_str(a, b));
  const std::size_t r = a.shape()[0], k = a.shape()[1], c = b.shape()[1];
  std::vector<double> out(r * c);
  kernels::matmul(a.data(), b.data(), out, r, k, c);
  const std::size_t ai = a.id(), bi = b.id();
  return t.record({r, c}, std::move(out), [ai, bi, r, k, c](Tape& tp, std::size_t self) {
    auto g = tp.grad(self);
    kernels::matmul_grad_a(g, tp.value(bi), tp.grad_mut(ai), r, k, c);
    kernels::matmul_grad_b(tp.value(ai), g, tp.grad_mut(bi), r, k, c);
  });
}

Tensor add(const Tensor& a, const Tensor& b) { return binary(a, b, Bin::add); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary(a, b, Bin::sub); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary(a, b, Bin::mul); }
Tensor div(const Tensor& a, const Tensor& b) { return binary(a, b, Bin::div); }

Tensor neg(const Tensor& a) {
  return unary(a, [](double x) { return -x; }, [](double, double) { return -1.0; });
}

Tensor scale(const Tensor& a, double c) {
  return unary(a, [c](double x) { return c * x; }, [c](double, double) { return c; });
}

Tensor add_scalar(const Tensor& a, double c) {
  return unary(a, [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}

Tensor tanh(const Tensor& a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& a) {
  return unary(a, logistic, [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& a) {
  return unary(a, [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor exp(const Tensor& a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  for (double v : a.data()) {
    if (std::isnan(v)) throw NumericError("log of NaN");
    if (!(v > 0.0)) throw DomainError("log of non-positive value " + std::to_string(v));
  }
  return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor softplus(const Tensor& a) {
  return unary(a, stable_softplus, [](double x, double) { return logistic(x); });
}

Tensor square(const Tensor& a) {
  return unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Tensor elementwise(OpKind kind, const Tensor& a) {
  switch (kind) {
    case OpKind::tanh: return tanh(a);
    case OpKind::sigmoid: return sigmoid(a);
    case OpKind::relu: return relu(a);
    case OpKind::exp: return exp(a);
    case OpKind::log: return log(a);
    case OpKind::neg: return neg(a);
    default: throw ContractError("binary op kind used with one operand");
  }
}

Tensor elementwise(OpKind kind, const Tensor& a, const Tensor& b) {
  switch (kind) {
    case OpKind::add: return add(a, b);
    case OpKind::mul: return mul(a, b);
    default: throw ContractError("unary op kind used with two operands");
  }
}

Tensor sum(const Tensor& a) {
  Tape& t = tape_of(a);
  double s = 0.0;
  for (double v : a.data()) s += v;
  const std::size_t ai = a.id();
  return t.record({}, {s}, [ai](Tape& tp, std::size_t self) {
    const double g = tp.grad(self)[0];
    for (double& v : tp.grad_mut(ai)) v += g;
  });
}

Tensor mean(const Tensor& a) { return scale(sum(a), 1.0 / static_cast<double>(a.size())); }

Tensor log_softmax(const Tensor& a) {
  Tape& t = tape_of(a);
  if (a.size() == 0) throw DimensionError("log_softmax of empty tensor");
  const std::size_t rows = a.rows(), n = a.cols();
  auto x = a.data();
  std::vector<double> y(x.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data() + r * n;
    double m = -INFINITY;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::isnan(xr[j])) throw NumericError("log_softmax of NaN");
      m = std::max(m, xr[j]);
    }
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += std::exp(xr[j] - m);
    const double lse = m + std::log(s);
    for (std::size_t j = 0; j < n; ++j) y[r * n + j] = xr[j] - lse;
  }
  const std::size_t ai = a.id();
  return t.record(a.shape(), std::move(y), [ai, rows, n](Tape& tp, std::size_t self) {
    auto g = tp.grad(self);
    auto y = tp.value(self);
    auto ga = tp.grad_mut(ai);
    for (std::size_t r = 0; r < rows; ++r) {
      double gs = 0.0;
      for (std::size_t j = 0; j < n; ++j) gs += g[r * n + j];
      for (std::size_t j = 0; j < n; ++j) ga[r * n + j] += g[r * n + j] - std::exp(y[r * n + j]) * gs;
    }
  });
}

Tensor concat(const Tensor& a, const Tensor& b, std::size_t axis) {
  Tape& t = same_tape(a, b);
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() != sb.size() || sa.empty())
    throw DimensionError("concat rank mismatch: " + pair_str(a, b));
  if (axis >= sa.size())
    throw DimensionError("concat axis " + std::to_string(axis) + " out of range for " + shape_str(sa));
  for (std::size_t d = 0; d < sa.size(); ++d)
    if (d != axis && sa[d] != sb[d]) throw DimensionError("concat shape mismatch: " + pair_str(a, b));
  // view as outer x inner blocks around the concat axis
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= sa[d];
  for (std::size_t d = axis + 1; d < sa.size(); ++d) inner *= sa[d];
  const std::size_t la = sa[axis] * inner, lb = sb[axis] * inner;
  Shape so = sa;
  so[axis] += sb[axis];
  auto xa = a.data();
  auto xb = b.data();
  std::vector<double> out;
  out.reserve(outer * (la + lb));
  for (std::size_t o = 0; o < outer; ++o) {
    out.insert(out.end(), xa.begin() + o * la, xa.begin() + (o + 1) * la);
    out.insert(out.end(), xb.begin() + o * lb, xb.begin() + (o + 1) * lb);
  }
  const std::size_t ai = a.id(), bi = b.id();
  return t.record(std::move(so), std::move(out), [ai, bi, outer, la, lb](Tape& tp, std::size_t self) {
    auto g = tp.grad(self);
    auto ga = tp.grad_mut(ai);
    auto gb = tp.grad_mut(bi);
    for (std::size_t o = 0; o < outer; ++o) {
      const double* go = g.data() + o * (la + lb);
      for (std::size_t j = 0; j < la; ++j) ga[o * la + j] += go[j];
      for (std::size_t j = 0; j < lb; ++j) gb[o * lb + j] += go[la + j];
    }
  });
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
  Tape& t = tape_of(a);
  const std::size_t rows = require_rank2(a, "slice_cols");
  const std::size_t n = a.cols();
  if (begin >= end || end > n)
    throw DimensionError("slice_cols [" + std::to_string(begin) + "," + std::to_string(end) +
                         ") out of range for " + shape_str(a.shape()));
  const std::size_t w = end - begin;
  auto x = a.data();
  std::vector<double> out(rows * w);
  for (std::size_t r = 0; r < rows; ++r)
    std::copy_n(x.begin() + r * n + begin, w, out.begin() + r * w);
  const std::size_t ai = a.id();
  return t.record({rows, w}, std::move(out), [ai, rows, n, begin, w](Tape& tp, std::size_t self) {
    auto g = tp.grad(self);
    auto ga = tp.grad_mut(ai);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < w; ++j) ga[r * n + begin + j] += g[r * w + j];
  });
}

Tensor row(const Tensor& a, std::size_t r) {
  Tape& t = tape_of(a);
  const std::size_t rows = require_rank2(a, "row");
  if (r >= rows) throw DimensionError("row " + std::to_string(r) + " out of range for " + shape_str(a.shape()));
  const std::size_t n = a.cols();
  auto x = a.data();
  std::vector<double> out(x.begin() + r * n, x.begin() + (r + 1) * n);
  const std::size_t ai = a.id();
  return t.record({1, n}, std::move(out), [ai, r, n](Tape& tp, std::size_t self) {
    auto g = tp.grad(self);
    auto ga = tp.grad_mut(ai);
    for (std::size_t j = 0; j < n; ++j) ga[r * n + j] += g[j];
  });
}

Tensor stack_rows(std::span<const Tensor> rows) {
  if (rows.empty()) throw DimensionError("stack_rows of no rows");
  Tape& t = tape_of(rows[0]);
  const std::size_t n = rows[0].size();
  std::vector<std::size_t> ids;
  std::vector<double> out;
  out.reserve(rows.size() * n);
  for (const Tensor& r : rows) {
    same_tape(rows[0], r);
    if (r.size() != n || r.rows() != 1)
      throw DimensionError("stack_rows: row shape mismatch: " + pair_str(rows[0], r));
    auto x = r.data();
    out.insert(out.end(), x.begin(), x.end());
    ids.push_back(r.id());
  }
  return t.record({rows.size(), n}, std::move(out), [ids = std::move(ids), n](Tape& tp, std::size_t self) {
    auto g = tp.grad(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      auto gk = tp.grad_mut(ids[k]);
      for (std::size_t j = 0; j < n; ++j) gk[j] += g[k * n + j];
    }
  });
}

Tensor gather_rows(const Tensor& table, std::span<const int> ids) {
  Tape& t = tape_of(table);
  const std::size_t rows = require_rank2(table, "gather_rows");
  if (ids.empty()) throw DimensionError("gather_rows with no ids");
  const std::size_t n = table.cols();
  auto x = table.data();
  std::vector<double> out(ids.size() * n);
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (ids[k] < 0 || static_cast<std::size_t>(ids[k]) >= rows)
      throw DimensionError("gather_rows id " + std::to_string(ids[k]) + " out of range for " +
                           shape_str(table.shape()));
    std::copy_n(x.begin() + ids[k] * n, n, out.begin() + k * n);
  }
  std::vector<int> idv(ids.begin(), ids.end());
  const std::size_t ti = table.id();
  return t.record({ids.size(), n}, std::move(out), [ti, idv = std::move(idv), n](Tape& tp, std::size_t self) {
    auto g = tp.grad(self);
    auto gt = tp.grad_mut(ti);
    for (std::size_t k = 0; k < idv.size(); ++k)
      for (std::size_t j = 0; j < n; ++j) gt[idv[k] * n + j] += g[k * n + j];
  });
}

Tensor mean_rows(const Tensor& a) {
  Tape& t = tape_of(a);
  const std::size_t rows = require_rank2(a, "mean_rows");
  const std::size_t n = a.cols();
  auto x = a.data();
  std::vector<double> out(n, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < n; ++j) out[j] += x[r * n + j];
  const double inv = 1.0 / static_cast<double>(rows);
  for (double& v : out) v *= inv;
  const std::size_t ai = a.id();
  return t.record({1, n}, std::move(out), [ai, rows, n, inv](Tape& tp, std::size_t self) {
    auto g = tp.grad(self);
    auto ga = tp.grad_mut(ai);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < n; ++j) ga[r * n + j] += g[j] * inv;
  });
}

Tensor add_rowwise(const Tensor& a, const Tensor& rowv) {
  Tape& t = same_tape(a, rowv);
  const std::size_t rows = require_rank2(a, "add_rowwise");
  const std::size_t n = a.cols();
  if (rowv.size() != n) throw DimensionError("add_rowwise shape mismatch: " + pair_str(a, rowv));
  auto x = a.data();
  auto b = rowv.data();
  std::vector<double> out(x.begin(), x.end());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < n; ++j) out[r * n + j] += b[j];
  const std::size_t ai = a.id(), bi = rowv.id();
  return t.record(a.shape(), std::move(out), [ai, bi, rows, n](Tape& tp, std::size_t self) {
    auto g = tp.grad(self);
    auto ga = tp.grad_mut(ai);
    auto gb = tp.grad_mut(bi);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < n; ++j) {
        ga[r * n + j] += g[r * n + j];
        gb[j] += g[r * n + j];
      }
  });
}

Tensor select_sum(const Tensor& a, std::span<const int> rows, std::span<const int> cols) {
  Tape& t = tape_of(a);
  if (rows.size() != cols.size()) throw DimensionError("select_sum: rows and cols differ in length");
  const std::size_t nr = a.rows(), nc = a.cols();
  auto x = a.data();
  std::vector<std::size_t> flat(rows.size());
  double s = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] < 0 || cols[k] < 0 || static_cast<std::size_t>(rows[k]) >= nr ||
        static_cast<std::size_t>(cols[k]) >= nc)
      throw DimensionError("select_sum index (" + std::to_string(rows[k]) + "," + std::to_string(cols[k]) +
                           ") out of range for " + shape_str(a.shape()));
    flat[k] = static_cast<std::size_t>(rows[k]) * nc + static_cast<std::size_t>(cols[k]);
    s += x[flat[k]];
  }
  const std::size_t ai = a.id();
  return t.record({}, {s}, [ai, flat = std::move(flat)](Tape& tp, std::size_t self) {
    const double g = tp.grad(self)[0];
    auto ga = tp.grad_mut(ai);
    for (std::size_t f : flat) ga[f] += g;
  });
}

Tensor normalize_rows(const Tensor& a) {
  Tape& t = tape_of(a);
  const std::size_t rows = a.rows(), n = a.cols();
  auto x = a.data();
  std::vector<double> out(x.size());
  std::vector<double> norms(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += x[r * n + j] * x[r * n + j];
    norms[r] = std::sqrt(s);
    if (!(norms[r] > 0.0)) throw DomainError("normalize_rows of a zero row");
    for (std::size_t j = 0; j < n; ++j) out[r * n + j] = x[r * n + j] / norms[r];
  }
  const std::size_t ai = a.id();
  return t.record(a.shape(), std::move(out), [ai, rows, n, norms = std::move(norms)](Tape& tp, std::size_t self) {
    // d(x/|x|) = (g - y (y.g)) / |x|
    auto g = tp.grad(self);
    auto y = tp.value(self);
    auto ga = tp.grad_mut(ai);
    for (std::size_t r = 0; r < rows; ++r) {
      double yg = 0.0;
      for (std::size_t j = 0; j < n; ++j) yg += y[r * n + j] * g[r * n + j];
      for (std::size_t j = 0; j < n; ++j) ga[r * n + j] += (g[r * n + j] - y[r * n + j] * yg) / norms[r];
    }
  });
}

Tensor dot(const Tensor& a, const Tensor& b) { return sum(mul(a, b)); }

}  // namespace vgvae

#pragma once

// Define-by-run reverse-mode automatic differentiation over dense row-major
// tensors of doubles. A Tape is built for one forward pass, differentiated
// once (or a few times, accumulating), then discarded. Learned parameters
// live outside any tape in Parameter objects; a tape binds them as leaves
// and backward() accumulates straight into Parameter::grad.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace vgvae {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Persistent learnable array (weights, embeddings). Not tied to a tape.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Shape shape);

  std::size_t size() const { return value.size(); }
  void zero_grad();

  std::string name;
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
};

class Tape;

/// Handle to one recorded value on a Tape. Cheap to copy; valid as long as
/// its Tape is alive.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  bool valid() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }

  const Shape& shape() const;
  std::size_t size() const;
  std::size_t rank() const { return shape().size(); }
  /// Rows of a rank-2 tensor; 1 for rank 0/1.
  std::size_t rows() const;
  /// Columns of a rank-2 tensor; the length for rank 1.
  std::size_t cols() const;

  std::span<const double> data() const;
  /// Gradient after backward(); zeros if the node received none.
  std::vector<double> grad() const;
  double item() const;
  double operator[](std::size_t i) const { return data()[i]; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Whether parameter leaves on a tape route gradients into Parameter::grad
/// (training) or keep them private (read-only evaluation, safe to run
/// concurrently against shared parameters).
enum class GradMode { accumulate, frozen };

class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  explicit Tape(GradMode mode = GradMode::accumulate) : mode_(mode) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Tensor constant(Shape shape, std::vector<double> values);
  Tensor constant(std::initializer_list<double> row);
  Tensor scalar(double v);
  Tensor zeros(Shape shape);
  /// Bind a parameter as a leaf; repeated calls return the same node. In
  /// accumulate mode backward() adds into p.grad.
  Tensor param(const Parameter& p);
  GradMode mode() const { return mode_; }

  /// Record a computed node. `backward` reads grad(self) and adds into the
  /// gradients of its parents via grad_mut().
  Tensor record(Shape shape, std::vector<double> values, Backward backward);

  /// Reverse sweep from a scalar loss. Intermediate gradients are reset
  /// first; parameter gradients accumulate across calls.
  void backward(const Tensor& loss);

  std::size_t size() const { return nodes_.size(); }

  const Shape& shape_of(std::size_t id) const { return nodes_[id].shape; }
  std::span<const double> value(std::size_t id) const;
  std::span<const double> grad(std::size_t id) const;
  /// Gradient buffer of a node, materialized (zero-filled) on first use.
  std::span<double> grad_mut(std::size_t id);
  bool has_grad(std::size_t id) const;

 private:
  struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    const Parameter* param = nullptr;
    Backward backward;
  };

  GradMode mode_;
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
};

// ---------------------------------------------------------------------------
// Primitives. Binary elementwise operations require equal shapes; the only
// broadcast permitted is a single-element operand against any tensor.

Tensor matmul(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& a);
Tensor scale(const Tensor& a, double c);
Tensor add_scalar(const Tensor& a, double c);

Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor exp(const Tensor& a);
/// Throws DomainError on any non-positive entry.
Tensor log(const Tensor& a);
Tensor softplus(const Tensor& a);
Tensor square(const Tensor& a);

enum class OpKind { add, mul, tanh, sigmoid, relu, exp, log, neg };
Tensor elementwise(OpKind kind, const Tensor& a);
Tensor elementwise(OpKind kind, const Tensor& a, const Tensor& b);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
/// Row-wise log-softmax (a rank-1 tensor is one row).
Tensor log_softmax(const Tensor& a);
Tensor concat(const Tensor& a, const Tensor& b, std::size_t axis);
/// Columns [begin, end) of a rank-2 tensor.
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);
Tensor row(const Tensor& a, std::size_t r);
Tensor stack_rows(std::span<const Tensor> rows);
/// Rows of `table` at `ids`, as an ids.size() x cols matrix.
Tensor gather_rows(const Tensor& table, std::span<const int> ids);
/// Column means: n x c -> 1 x c.
Tensor mean_rows(const Tensor& a);
/// Adds a 1 x c row to every row of an n x c matrix (explicit broadcast).
Tensor add_rowwise(const Tensor& a, const Tensor& row);
/// Sum over k of a[rows[k], cols[k]].
Tensor select_sum(const Tensor& a, std::span<const int> rows, std::span<const int> cols);
/// Each row scaled to unit L2 norm.
Tensor normalize_rows(const Tensor& a);
Tensor dot(const Tensor& a, const Tensor& b);

}  // namespace vgvae

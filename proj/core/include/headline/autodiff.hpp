#pragma once

// Tape-based reverse-mode automatic differentiation over dense Tensors.
//
// Every op appends one node holding its output value and the attributes
// needed to recompute it, so a tape can be replayed forward and walked
// backward without closures. Tensors are at most rank 2 inside ops; a rank-1
// tensor is treated as a single row. Broadcasting is limited to adding a
// 1 x n row to every row of an m x n matrix.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "headline/tensor.hpp"

namespace headline::ad {

/// Score written by masked_fill. Large and finite so softmax gradients stay finite.
inline constexpr double kMaskedScore = -1e30;

enum class OpKind : std::uint8_t {
  Parameter,
  Constant,
  MatMul,
  Add,
  Mul,
  Scale,
  Concat,
  Slice,
  RowLookup,
  Sigmoid,
  Tanh,
  SoftmaxLastDim,
  Log,
  MaskedFill,
  Transpose,
  Reshape,
  Sum,
  IndexAdd,
  Pick,
};

std::string_view op_name(OpKind kind);

struct OpAttrs {
  std::vector<std::size_t> indices;  // row_lookup rows, index_add targets, pick index
  std::vector<std::uint8_t> mask;    // masked_fill: 1 = overwrite
  Shape shape;                       // reshape target
  std::size_t axis = 0;              // concat axis
  std::size_t begin = 0;             // slice column range / index_add output width
  std::size_t end = 0;
  double value = 0.0;                // scale factor, fill value, log floor
};

/// Pure forward rule shared by recording and replay.
Tensor evaluate(OpKind kind, std::span<const Tensor* const> inputs, const OpAttrs& attrs);

using GradientMap = std::map<std::string, Tensor>;

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  bool valid() const { return tape_ != nullptr; }
  std::size_t id() const { return id_; }
  Tape& tape() const { return *tape_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  struct Node {
    OpKind kind;
    std::vector<std::size_t> inputs;
    Tensor value;
    OpAttrs attrs;
    std::string name;  // parameters only
    bool needs_grad = false;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Trainable leaf. Gradients are reported under `name`; registering the
  /// same name twice accumulates into one entry.
  Var parameter(std::string name, Tensor value);
  Var constant(Tensor value);
  Var record(OpKind kind, std::span<const Var> inputs, OpAttrs attrs);

  std::size_t size() const { return nodes_.size(); }
  const Node& node(std::size_t id) const { return nodes_.at(id); }

  /// d loss / d parameter for every parameter leaf on the tape. Parameters the
  /// loss does not depend on get all-zero gradients.
  GradientMap backward(Var loss) const;

  /// Recompute every node from the leaves.
  std::vector<Tensor> replay() const;

 private:
  std::vector<Node> nodes_;
};

Var matmul(Var a, Var b);
/// Same-shape elementwise sum, or m x n plus a 1 x n row broadcast over rows.
Var add(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
/// axis 0 stacks rows, axis 1 joins columns.
Var concat(std::span<const Var> parts, std::size_t axis);
Var slice_cols(Var a, std::size_t begin, std::size_t end);
Var row_lookup(Var table, std::vector<std::size_t> rows);
Var sigmoid(Var a);
Var tanh(Var a);
Var softmax_lastdim(Var a);
/// log(max(x, floor)); the gradient is zero where x < floor.
Var log(Var a, double floor = 0.0);
Var masked_fill(Var a, std::vector<std::uint8_t> mask, double value = kMaskedScore);
Var transpose(Var a);
Var reshape(Var a, Shape shape);
Var sum(Var a);
/// out[r, targets[c]] += a[r, c]; output has `out_cols` columns.
Var index_add(Var a, std::vector<std::size_t> targets, std::size_t out_cols);
/// Element at a flat index, as a scalar.
Var pick(Var a, std::size_t flat_index);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }

}  // namespace headline::ad

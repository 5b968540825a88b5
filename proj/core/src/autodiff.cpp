#include "headline/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace headline::ad {

namespace {

[[noreturn]] void shape_error(std::string_view op, const std::string& detail) {
  throw std::invalid_argument(std::string(op) + ": " + detail);
}

void require_matrix(std::string_view op, const Tensor& t) {
  if (t.rank() > 2) shape_error(op, "expected rank 1 or 2, got " + shape_to_string(t.shape()));
}

bool same_extent(const Tensor& a, const Tensor& b) {
  return a.rows() == b.rows() && a.cols() == b.cols();
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor eval_matmul(const Tensor& a, const Tensor& b) {
  require_matrix("matmul", a);
  require_matrix("matmul", b);
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    shape_error("matmul", "inner extents differ: " + shape_to_string(a.shape()) + " vs " +
                              shape_to_string(b.shape()));
  }
  std::vector<double> out(m * n, 0.0);
  auto A = a.data();
  auto B = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = A[i * k + p];
      const double* brow = B.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += av * brow[j];
    }
  }
  return Tensor({m, n}, std::move(out));
}

Tensor eval_add(const Tensor& a, const Tensor& b) {
  require_matrix("add", a);
  require_matrix("add", b);
  auto A = a.data();
  auto B = b.data();
  if (a.size() == b.size() && same_extent(a, b)) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = A[i] + B[i];
    return Tensor(a.shape(), std::move(out));
  }
  if (b.rows() == 1 && b.cols() == a.cols()) {
    const std::size_t n = a.cols();
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = A[i] + B[i % n];
    return Tensor(a.shape(), std::move(out));
  }
  shape_error("add", "cannot add " + shape_to_string(a.shape()) + " and " + shape_to_string(b.shape()));
}

Tensor eval_mul(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size() || !same_extent(a, b)) {
    shape_error("elementwise_mul", "shapes differ: " + shape_to_string(a.shape()) + " vs " +
                                       shape_to_string(b.shape()));
  }
  auto A = a.data();
  auto B = b.data();
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = A[i] * B[i];
  return Tensor(a.shape(), std::move(out));
}

Tensor eval_concat(std::span<const Tensor* const> parts, std::size_t axis) {
  if (parts.empty()) shape_error("concat", "no inputs");
  if (axis > 1) shape_error("concat", "axis must be 0 or 1, got " + std::to_string(axis));
  for (auto* p : parts) require_matrix("concat", *p);
  if (axis == 1) {
    const std::size_t rows = parts[0]->rows();
    std::size_t cols = 0;
    for (auto* p : parts) {
      if (p->rows() != rows) {
        shape_error("concat", "row counts differ: " + shape_to_string(parts[0]->shape()) + " vs " +
                                  shape_to_string(p->shape()));
      }
      cols += p->cols();
    }
    std::vector<double> out(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
      std::size_t offset = r * cols;
      for (auto* p : parts) {
        auto d = p->data();
        const std::size_t c = p->cols();
        std::copy_n(d.begin() + r * c, c, out.begin() + offset);
        offset += c;
      }
    }
    return Tensor({rows, cols}, std::move(out));
  }
  const std::size_t cols = parts[0]->cols();
  std::size_t rows = 0;
  for (auto* p : parts) {
    if (p->cols() != cols) {
      shape_error("concat", "column counts differ: " + shape_to_string(parts[0]->shape()) + " vs " +
                                shape_to_string(p->shape()));
    }
    rows += p->rows();
  }
  std::vector<double> out;
  out.reserve(rows * cols);
  for (auto* p : parts) out.insert(out.end(), p->data().begin(), p->data().end());
  return Tensor({rows, cols}, std::move(out));
}

Tensor eval_slice(const Tensor& a, std::size_t begin, std::size_t end) {
  require_matrix("slice", a);
  if (begin >= end || end > a.cols()) {
    shape_error("slice", "column range [" + std::to_string(begin) + ", " + std::to_string(end) +
                             ") invalid for " + shape_to_string(a.shape()));
  }
  const std::size_t rows = a.rows(), cols = a.cols(), width = end - begin;
  std::vector<double> out(rows * width);
  auto d = a.data();
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(d.begin() + r * cols + begin, width, out.begin() + r * width);
  }
  return Tensor({rows, width}, std::move(out));
}

Tensor eval_row_lookup(const Tensor& table, const std::vector<std::size_t>& rows) {
  require_matrix("row_lookup", table);
  if (rows.empty()) shape_error("row_lookup", "empty index list");
  const std::size_t extent = table.rows(), cols = table.cols();
  std::vector<double> out(rows.size() * cols);
  auto d = table.data();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= extent) {
      shape_error("row_lookup", "index " + std::to_string(rows[i]) + " out of range for extent " +
                                    std::to_string(extent));
    }
    std::copy_n(d.begin() + rows[i] * cols, cols, out.begin() + i * cols);
  }
  return Tensor({rows.size(), cols}, std::move(out));
}

template <typename F>
Tensor map_elements(const Tensor& a, F f) {
  auto d = a.data();
  std::vector<double> out(d.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(d[i]);
  return Tensor(a.shape(), std::move(out));
}

Tensor eval_softmax(const Tensor& a) {
  require_matrix("softmax_lastdim", a);
  const std::size_t rows = a.rows(), cols = a.cols();
  auto d = a.data();
  std::vector<double> out(d.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = d.data() + r * cols;
    double* y = out.data() + r * cols;
    const double mx = *std::max_element(x, x + cols);
    double z = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      y[j] = std::exp(x[j] - mx);
      z += y[j];
    }
    for (std::size_t j = 0; j < cols; ++j) y[j] /= z;
  }
  return Tensor(a.shape(), std::move(out));
}

Tensor eval_masked_fill(const Tensor& a, const std::vector<std::uint8_t>& mask, double value) {
  if (mask.size() != a.size()) {
    shape_error("masked_fill", "mask length " + std::to_string(mask.size()) + " vs tensor " +
                                   shape_to_string(a.shape()));
  }
  auto d = a.data();
  std::vector<double> out(d.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mask[i] ? value : d[i];
  return Tensor(a.shape(), std::move(out));
}

Tensor eval_transpose(const Tensor& a) {
  require_matrix("transpose", a);
  const std::size_t rows = a.rows(), cols = a.cols();
  auto d = a.data();
  std::vector<double> out(d.size());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = d[r * cols + c];
  return Tensor({cols, rows}, std::move(out));
}

Tensor eval_index_add(const Tensor& a, const std::vector<std::size_t>& targets, std::size_t out_cols) {
  require_matrix("index_add", a);
  if (targets.size() != a.cols()) {
    shape_error("index_add", std::to_string(targets.size()) + " targets for " + shape_to_string(a.shape()));
  }
  const std::size_t rows = a.rows(), cols = a.cols();
  std::vector<double> out(rows * out_cols, 0.0);
  auto d = a.data();
  for (std::size_t c = 0; c < cols; ++c) {
    if (targets[c] >= out_cols) {
      shape_error("index_add", "target " + std::to_string(targets[c]) + " out of range for extent " +
                                   std::to_string(out_cols));
    }
  }
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[r * out_cols + targets[c]] += d[r * cols + c];
  return Tensor({rows, out_cols}, std::move(out));
}

std::vector<double>& grad_buffer(std::vector<std::vector<double>>& grads, std::size_t id, std::size_t n) {
  auto& g = grads[id];
  if (g.empty()) g.assign(n, 0.0);
  return g;
}

}  // namespace

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::Parameter: return "parameter";
    case OpKind::Constant: return "constant";
    case OpKind::MatMul: return "matmul";
    case OpKind::Add: return "add";
    case OpKind::Mul: return "elementwise_mul";
    case OpKind::Scale: return "scale";
    case OpKind::Concat: return "concat";
    case OpKind::Slice: return "slice";
    case OpKind::RowLookup: return "row_lookup";
    case OpKind::Sigmoid: return "sigmoid";
    case OpKind::Tanh: return "tanh";
    case OpKind::SoftmaxLastDim: return "softmax_lastdim";
    case OpKind::Log: return "log";
    case OpKind::MaskedFill: return "masked_fill";
    case OpKind::Transpose: return "transpose";
    case OpKind::Reshape: return "reshape";
    case OpKind::Sum: return "sum";
    case OpKind::IndexAdd: return "index_add";
    case OpKind::Pick: return "pick";
  }
  return "unknown";
}

Tensor evaluate(OpKind kind, std::span<const Tensor* const> in, const OpAttrs& attrs) {
  auto arity = [&](std::size_t n) {
    if (in.size() != n) {
      shape_error(op_name(kind), "expected " + std::to_string(n) + " inputs, got " + std::to_string(in.size()));
    }
  };
  switch (kind) {
    case OpKind::Parameter:
    case OpKind::Constant:
      throw std::logic_error("leaf nodes have no forward rule");
    case OpKind::MatMul:
      arity(2);
      return eval_matmul(*in[0], *in[1]);
    case OpKind::Add:
      arity(2);
      return eval_add(*in[0], *in[1]);
    case OpKind::Mul:
      arity(2);
      return eval_mul(*in[0], *in[1]);
    case OpKind::Scale:
      arity(1);
      return map_elements(*in[0], [f = attrs.value](double x) { return x * f; });
    case OpKind::Concat:
      return eval_concat(in, attrs.axis);
    case OpKind::Slice:
      arity(1);
      return eval_slice(*in[0], attrs.begin, attrs.end);
    case OpKind::RowLookup:
      arity(1);
      return eval_row_lookup(*in[0], attrs.indices);
    case OpKind::Sigmoid:
      arity(1);
      return map_elements(*in[0], stable_sigmoid);
    case OpKind::Tanh:
      arity(1);
      return map_elements(*in[0], [](double x) { return std::tanh(x); });
    case OpKind::SoftmaxLastDim:
      arity(1);
      return eval_softmax(*in[0]);
    case OpKind::Log:
      arity(1);
      return map_elements(*in[0], [floor = attrs.value](double x) { return std::log(std::max(x, floor)); });
    case OpKind::MaskedFill:
      arity(1);
      return eval_masked_fill(*in[0], attrs.mask, attrs.value);
    case OpKind::Transpose:
      arity(1);
      return eval_transpose(*in[0]);
    case OpKind::Reshape:
      arity(1);
      if (shape_size(attrs.shape) != in[0]->size()) {
        shape_error("reshape", shape_to_string(in[0]->shape()) + " to " + shape_to_string(attrs.shape));
      }
      return Tensor(attrs.shape, std::vector<double>(in[0]->data().begin(), in[0]->data().end()));
    case OpKind::Sum: {
      arity(1);
      double total = 0.0;
      for (double v : in[0]->data()) total += v;
      return Tensor::scalar(total);
    }
    case OpKind::IndexAdd:
      arity(1);
      return eval_index_add(*in[0], attrs.indices, attrs.begin);
    case OpKind::Pick:
      arity(1);
      if (attrs.indices.size() != 1 || attrs.indices[0] >= in[0]->size()) {
        shape_error("pick", "index out of range for " + shape_to_string(in[0]->shape()));
      }
      return Tensor::scalar((*in[0])[attrs.indices[0]]);
  }
  throw std::logic_error("unhandled op kind");
}

const Tensor& Var::value() const { return tape_->node(id_).value; }

Var Tape::parameter(std::string name, Tensor value) {
  nodes_.push_back(Node{OpKind::Parameter, {}, std::move(value), {}, std::move(name), true});
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{OpKind::Constant, {}, std::move(value), {}, {}, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(OpKind kind, std::span<const Var> inputs, OpAttrs attrs) {
  std::vector<const Tensor*> values;
  std::vector<std::size_t> ids;
  values.reserve(inputs.size());
  ids.reserve(inputs.size());
  bool needs_grad = false;
  for (const auto& v : inputs) {
    if (&v.tape() != this) throw std::invalid_argument(std::string(op_name(kind)) + ": input from another tape");
    values.push_back(&nodes_[v.id()].value);
    ids.push_back(v.id());
    needs_grad = needs_grad || nodes_[v.id()].needs_grad;
  }
  Tensor out = evaluate(kind, values, attrs);
  nodes_.push_back(Node{kind, std::move(ids), std::move(out), std::move(attrs), {}, needs_grad});
  return Var(this, nodes_.size() - 1);
}

std::vector<Tensor> Tape::replay() const {
  std::vector<Tensor> values;
  values.reserve(nodes_.size());
  std::vector<const Tensor*> in;
  for (const auto& n : nodes_) {
    if (n.kind == OpKind::Parameter || n.kind == OpKind::Constant) {
      values.push_back(n.value);
      continue;
    }
    in.clear();
    for (auto id : n.inputs) in.push_back(&values[id]);
    values.push_back(evaluate(n.kind, in, n.attrs));
  }
  return values;
}

GradientMap Tape::backward(Var loss) const {
  if (&loss.tape() != this) throw std::invalid_argument("backward: loss belongs to another tape");
  if (loss.value().size() != 1) {
    throw std::invalid_argument("backward: loss must be scalar, got " + shape_to_string(loss.shape()));
  }
  std::vector<std::vector<double>> grads(loss.id() + 1);
  grads[loss.id()] = {1.0};

  for (std::size_t idx = loss.id() + 1; idx-- > 0;) {
    const Node& n = nodes_[idx];
    if (grads[idx].empty() || !n.needs_grad) continue;
    if (n.kind == OpKind::Parameter || n.kind == OpKind::Constant) continue;
    const std::vector<double>& g = grads[idx];
    const Tensor& y = n.value;

    auto input = [&](std::size_t k) -> const Node& { return nodes_[n.inputs[k]]; };
    auto wants = [&](std::size_t k) { return input(k).needs_grad; };
    auto buf = [&](std::size_t k) -> std::vector<double>& {
      return grad_buffer(grads, n.inputs[k], input(k).value.size());
    };

    switch (n.kind) {
      case OpKind::Parameter:
      case OpKind::Constant:
        break;
      case OpKind::MatMul: {
        const Tensor& a = input(0).value;
        const Tensor& b = input(1).value;
        const std::size_t m = a.rows(), k = a.cols(), cols = b.cols();
        auto A = a.data();
        auto B = b.data();
        if (wants(0)) {
          auto& da = buf(0);
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
              const double* grow = g.data() + i * cols;
              const double* brow = B.data() + p * cols;
              double acc = 0.0;
              for (std::size_t j = 0; j < cols; ++j) acc += grow[j] * brow[j];
              da[i * k + p] += acc;
            }
        }
        if (wants(1)) {
          auto& db = buf(1);
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
              const double av = A[i * k + p];
              const double* grow = g.data() + i * cols;
              double* drow = db.data() + p * cols;
              for (std::size_t j = 0; j < cols; ++j) drow[j] += av * grow[j];
            }
        }
        break;
      }
      case OpKind::Add: {
        if (wants(0)) {
          auto& da = buf(0);
          for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i];
        }
        if (wants(1)) {
          auto& db = buf(1);
          if (db.size() == g.size()) {
            for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i];
          } else {
            const std::size_t cols = db.size();
            for (std::size_t i = 0; i < g.size(); ++i) db[i % cols] += g[i];
          }
        }
        break;
      }
      case OpKind::Mul: {
        auto A = input(0).value.data();
        auto B = input(1).value.data();
        if (wants(0)) {
          auto& da = buf(0);
          for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * B[i];
        }
        if (wants(1)) {
          auto& db = buf(1);
          for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i] * A[i];
        }
        break;
      }
      case OpKind::Scale: {
        auto& da = buf(0);
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * n.attrs.value;
        break;
      }
      case OpKind::Concat: {
        const std::size_t out_cols = y.cols();
        std::size_t offset = 0;  // column offset (axis 1) or flat offset (axis 0)
        for (std::size_t k = 0; k < n.inputs.size(); ++k) {
          const Tensor& part = input(k).value;
          if (n.attrs.axis == 1) {
            if (wants(k)) {
              auto& dp = buf(k);
              const std::size_t c = part.cols();
              for (std::size_t r = 0; r < part.rows(); ++r)
                for (std::size_t j = 0; j < c; ++j) dp[r * c + j] += g[r * out_cols + offset + j];
            }
            offset += part.cols();
          } else {
            if (wants(k)) {
              auto& dp = buf(k);
              for (std::size_t i = 0; i < part.size(); ++i) dp[i] += g[offset + i];
            }
            offset += part.size();
          }
        }
        break;
      }
      case OpKind::Slice: {
        auto& da = buf(0);
        const std::size_t cols = input(0).value.cols(), width = n.attrs.end - n.attrs.begin;
        for (std::size_t r = 0; r < y.rows(); ++r)
          for (std::size_t j = 0; j < width; ++j) da[r * cols + n.attrs.begin + j] += g[r * width + j];
        break;
      }
      case OpKind::RowLookup: {
        auto& dt = buf(0);
        const std::size_t cols = y.cols();
        for (std::size_t i = 0; i < n.attrs.indices.size(); ++i) {
          double* drow = dt.data() + n.attrs.indices[i] * cols;
          for (std::size_t j = 0; j < cols; ++j) drow[j] += g[i * cols + j];
        }
        break;
      }
      case OpKind::Sigmoid: {
        auto& da = buf(0);
        auto Y = y.data();
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * Y[i] * (1.0 - Y[i]);
        break;
      }
      case OpKind::Tanh: {
        auto& da = buf(0);
        auto Y = y.data();
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * (1.0 - Y[i] * Y[i]);
        break;
      }
      case OpKind::SoftmaxLastDim: {
        auto& da = buf(0);
        auto Y = y.data();
        const std::size_t cols = y.cols();
        for (std::size_t r = 0; r < y.rows(); ++r) {
          const std::size_t base = r * cols;
          double dot = 0.0;
          for (std::size_t j = 0; j < cols; ++j) dot += g[base + j] * Y[base + j];
          for (std::size_t j = 0; j < cols; ++j) da[base + j] += Y[base + j] * (g[base + j] - dot);
        }
        break;
      }
      case OpKind::Log: {
        auto& da = buf(0);
        auto X = input(0).value.data();
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (X[i] >= n.attrs.value) da[i] += g[i] / X[i];
        }
        break;
      }
      case OpKind::MaskedFill: {
        auto& da = buf(0);
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (!n.attrs.mask[i]) da[i] += g[i];
        }
        break;
      }
      case OpKind::Transpose: {
        auto& da = buf(0);
        const std::size_t rows = input(0).value.rows(), cols = input(0).value.cols();
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t c = 0; c < cols; ++c) da[r * cols + c] += g[c * rows + r];
        break;
      }
      case OpKind::Reshape: {
        auto& da = buf(0);
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i];
        break;
      }
      case OpKind::Sum: {
        auto& da = buf(0);
        for (auto& v : da) v += g[0];
        break;
      }
      case OpKind::IndexAdd: {
        auto& da = buf(0);
        const std::size_t cols = input(0).value.cols(), out_cols = n.attrs.begin;
        for (std::size_t r = 0; r < input(0).value.rows(); ++r)
          for (std::size_t c = 0; c < cols; ++c) da[r * cols + c] += g[r * out_cols + n.attrs.indices[c]];
        break;
      }
      case OpKind::Pick: {
        auto& da = buf(0);
        da[n.attrs.indices[0]] += g[0];
        break;
      }
    }
  }

  GradientMap out;
  for (std::size_t idx = 0; idx < nodes_.size(); ++idx) {
    const Node& n = nodes_[idx];
    if (n.kind != OpKind::Parameter) continue;
    const bool has = idx < grads.size() && !grads[idx].empty();
    auto it = out.find(n.name);
    if (it == out.end()) {
      out.emplace(n.name, has ? Tensor(n.value.shape(), grads[idx]) : Tensor(n.value.shape()));
    } else if (has) {
      std::vector<double> merged(it->second.data().begin(), it->second.data().end());
      for (std::size_t i = 0; i < merged.size(); ++i) merged[i] += grads[idx][i];
      it->second = Tensor(n.value.shape(), std::move(merged));
    }
  }
  return out;
}

Var matmul(Var a, Var b) {
  const Var in[] = {a, b};
  return a.tape().record(OpKind::MatMul, in, {});
}

Var add(Var a, Var b) {
  const Var in[] = {a, b};
  return a.tape().record(OpKind::Add, in, {});
}

Var mul(Var a, Var b) {
  const Var in[] = {a, b};
  return a.tape().record(OpKind::Mul, in, {});
}

Var scale(Var a, double factor) {
  OpAttrs attrs;
  attrs.value = factor;
  return a.tape().record(OpKind::Scale, std::span(&a, 1), std::move(attrs));
}

Var concat(std::span<const Var> parts, std::size_t axis) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  OpAttrs attrs;
  attrs.axis = axis;
  return parts[0].tape().record(OpKind::Concat, parts, std::move(attrs));
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  OpAttrs attrs;
  attrs.begin = begin;
  attrs.end = end;
  return a.tape().record(OpKind::Slice, std::span(&a, 1), std::move(attrs));
}

Var row_lookup(Var table, std::vector<std::size_t> rows) {
  OpAttrs attrs;
  attrs.indices = std::move(rows);
  return table.tape().record(OpKind::RowLookup, std::span(&table, 1), std::move(attrs));
}

Var sigmoid(Var a) { return a.tape().record(OpKind::Sigmoid, std::span(&a, 1), {}); }

Var tanh(Var a) { return a.tape().record(OpKind::Tanh, std::span(&a, 1), {}); }

Var softmax_lastdim(Var a) { return a.tape().record(OpKind::SoftmaxLastDim, std::span(&a, 1), {}); }

Var log(Var a, double floor) {
  OpAttrs attrs;
  attrs.value = floor;
  return a.tape().record(OpKind::Log, std::span(&a, 1), std::move(attrs));
}

Var masked_fill(Var a, std::vector<std::uint8_t> mask, double value) {
  OpAttrs attrs;
  attrs.mask = std::move(mask);
  attrs.value = value;
  return a.tape().record(OpKind::MaskedFill, std::span(&a, 1), std::move(attrs));
}

Var transpose(Var a) { return a.tape().record(OpKind::Transpose, std::span(&a, 1), {}); }

Var reshape(Var a, Shape shape) {
  OpAttrs attrs;
  attrs.shape = std::move(shape);
  return a.tape().record(OpKind::Reshape, std::span(&a, 1), std::move(attrs));
}

Var sum(Var a) { return a.tape().record(OpKind::Sum, std::span(&a, 1), {}); }

Var index_add(Var a, std::vector<std::size_t> targets, std::size_t out_cols) {
  OpAttrs attrs;
  attrs.indices = std::move(targets);
  attrs.begin = out_cols;
  return a.tape().record(OpKind::IndexAdd, std::span(&a, 1), std::move(attrs));
}

Var pick(Var a, std::size_t flat_index) {
  OpAttrs attrs;
  attrs.indices = {flat_index};
  return a.tape().record(OpKind::Pick, std::span(&a, 1), std::move(attrs));
}

}  // namespace headline::ad

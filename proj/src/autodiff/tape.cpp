#include "rlab/autodiff/tape.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "kernels.hpp"
#include "rlab/common/error.hpp"

namespace rlab::ad {

namespace {

std::atomic<std::uint64_t> next_tape_id{1};

std::size_t last_dim(const Tensor& t) { return t.rank() == 0 ? 1 : t.shape().back(); }

bool is_suffix(const Shape& small, const Shape& big) {
  if (small.size() > big.size()) return false;
  return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

[[noreturn]] void shape_mismatch(Primitive op, const Shape& a, const Shape& b) {
  throw ShapeError(primitive_name(op) + ": incompatible shapes " + shape_string(a) + " and " +
                   shape_string(b));
}

Tensor& accumulate_target(std::vector<Tensor>& grads, std::size_t index, const Shape& shape) {
  Tensor& g = grads[index];
  if (g.size() == 0 && shape_size(shape) != 0) g = Tensor(shape);
  if (g.shape() != shape) g = Tensor(shape);
  return g;
}

// Strides for a row-major shape.
std::vector<std::size_t> strides_of(const Shape& shape) {
  std::vector<std::size_t> s(shape.size(), 1);
  for (std::size_t i = shape.size(); i-- > 1;) s[i - 1] = s[i] * shape[i];
  return s;
}

// out[out_index] = in[permuted index]; when `scatter` is true the direction is
// reversed and values are accumulated into `in_buf` from `out_buf`.
void permute_copy(const Shape& in_shape, const std::vector<std::size_t>& axes, const double* src,
                  double* dst, bool reverse_accumulate) {
  const std::size_t rank = in_shape.size();
  Shape out_shape(rank);
  for (std::size_t i = 0; i < rank; ++i) out_shape[i] = in_shape[axes[i]];
  const auto in_strides = strides_of(in_shape);
  std::vector<std::size_t> step(rank);  // input stride for each output axis
  for (std::size_t i = 0; i < rank; ++i) step[i] = in_strides[axes[i]];
  const std::size_t total = shape_size(out_shape);
  std::vector<std::size_t> counter(rank, 0);
  std::size_t in_offset = 0;
  for (std::size_t o = 0; o < total; ++o) {
    if (reverse_accumulate) {
      dst[in_offset] += src[o];
    } else {
      dst[o] = src[in_offset];
    }
    for (std::size_t ax = rank; ax-- > 0;) {
      if (++counter[ax] < out_shape[ax]) {
        in_offset += step[ax];
        break;
      }
      in_offset -= step[ax] * (out_shape[ax] - 1);
      counter[ax] = 0;
    }
  }
}

}  // namespace

std::string primitive_name(Primitive p) {
  switch (p) {
    case Primitive::Constant: return "constant";
    case Primitive::Parameter: return "parameter";
    case Primitive::MatMul: return "matmul";
    case Primitive::Add: return "add";
    case Primitive::Mul: return "mul";
    case Primitive::Scale: return "scale";
    case Primitive::Softmax: return "softmax";
    case Primitive::LayerNorm: return "layernorm";
    case Primitive::Relu: return "relu";
    case Primitive::EmbedLookup: return "embed_lookup";
    case Primitive::Concat: return "concat";
    case Primitive::Transpose: return "transpose";
    case Primitive::Reshape: return "reshape";
    case Primitive::CrossEntropy: return "cross_entropy";
    case Primitive::Sum: return "sum";
  }
  return "unknown";
}

std::size_t ParameterStore::add(std::string name, Tensor value) {
  if (std::find(names_.begin(), names_.end(), name) != names_.end()) {
    throw ConfigError("duplicate parameter name '" + name + "'");
  }
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
  return values_.size() - 1;
}

std::size_t ParameterStore::find(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw ConfigError("no parameter named '" + name + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

std::size_t ParameterStore::total_elements() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

Tape::Tape() : id_(next_tape_id.fetch_add(1)) {}

void Tape::check(Var v) const {
  if (v.tape_id_ != id_ || v.index_ >= nodes_.size()) {
    throw GraphError("variable does not belong to this tape");
  }
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(id_, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  if (!value.all_finite()) throw NumericError("constant contains NaN or Inf");
  Node n;
  n.op = Primitive::Constant;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::parameter(const ParameterStore& params, std::size_t id) {
  Node n;
  n.op = Primitive::Parameter;
  n.external = &params.value(id);
  n.param_id = id;
  n.requires_grad = true;
  return push(std::move(n));
}

const Tensor& Tape::value(Var v) const {
  check(v);
  return nodes_[v.index_].out();
}

Primitive Tape::primitive(Var v) const {
  check(v);
  return nodes_[v.index_].op;
}

Var Tape::apply(Primitive op, std::span<const Var> inputs, OpAttributes attrs) {
  for (Var v : inputs) check(v);
  auto in = [&](std::size_t k) -> const Tensor& { return nodes_[inputs[k].index_].out(); };
  auto require_arity = [&](std::size_t n) {
    if (inputs.size() != n) {
      throw ShapeError(primitive_name(op) + " expects " + std::to_string(n) + " inputs, got " +
                       std::to_string(inputs.size()));
    }
  };

  Node node;
  node.op = op;
  node.inputs.reserve(inputs.size());
  for (Var v : inputs) {
    node.inputs.push_back(v.index_);
    node.requires_grad = node.requires_grad || nodes_[v.index_].requires_grad;
  }

  switch (op) {
    case Primitive::Constant:
    case Primitive::Parameter:
      throw GraphError("leaf nodes are created with constant() or parameter()");

    case Primitive::MatMul: {
      require_arity(2);
      const Tensor& a = in(0);
      const Tensor& b = in(1);
      if (a.rank() == 2 && b.rank() == 2 && a.dim(1) == b.dim(0)) {
        const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
        node.value = Tensor(Shape{m, n});
        kernels::gemm_nn(m, n, k, a.data(), b.data(), node.value.data());
      } else if (a.rank() == 3 && b.rank() == 3 && a.dim(0) == b.dim(0) && a.dim(2) == b.dim(1)) {
        const std::size_t bs = a.dim(0), m = a.dim(1), k = a.dim(2), n = b.dim(2);
        node.value = Tensor(Shape{bs, m, n});
        for (std::size_t i = 0; i < bs; ++i) {
          kernels::gemm_nn(m, n, k, a.data() + i * m * k, b.data() + i * k * n,
                           node.value.data() + i * m * n);
        }
      } else {
        shape_mismatch(op, a.shape(), b.shape());
      }
      break;
    }

    case Primitive::Add:
    case Primitive::Mul: {
      require_arity(2);
      const Tensor& a = in(0);
      const Tensor& b = in(1);
      if (!is_suffix(b.shape(), a.shape()) || b.size() == 0) shape_mismatch(op, a.shape(), b.shape());
      node.value = Tensor(a.shape());
      const std::size_t nb = b.size();
      double* out = node.value.data();
      const double* pa = a.data();
      const double* pb = b.data();
      for (std::size_t base = 0; base < a.size(); base += nb) {
        if (op == Primitive::Add) {
          for (std::size_t j = 0; j < nb; ++j) out[base + j] = pa[base + j] + pb[j];
        } else {
          for (std::size_t j = 0; j < nb; ++j) out[base + j] = pa[base + j] * pb[j];
        }
      }
      break;
    }

    case Primitive::Scale: {
      require_arity(1);
      const Tensor& x = in(0);
      node.value = Tensor(x.shape());
      for (std::size_t i = 0; i < x.size(); ++i) node.value[i] = attrs.scalar * x[i];
      break;
    }

    case Primitive::Softmax: {
      require_arity(1);
      const Tensor& x = in(0);
      if (x.rank() == 0) throw ShapeError("softmax of a scalar");
      node.value = Tensor(x.shape());
      const std::size_t d = last_dim(x);
      for (std::size_t base = 0; base < x.size(); base += d) {
        double mx = x[base];
        for (std::size_t j = 1; j < d; ++j) mx = std::max(mx, x[base + j]);
        double total = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          const double e = std::exp(x[base + j] - mx);
          node.value[base + j] = e;
          total += e;
        }
        for (std::size_t j = 0; j < d; ++j) node.value[base + j] /= total;
      }
      break;
    }

    case Primitive::LayerNorm: {
      require_arity(1);
      const Tensor& x = in(0);
      if (x.rank() == 0) throw ShapeError("layernorm of a scalar");
      const std::size_t d = last_dim(x);
      const std::size_t rows = x.size() / d;
      node.value = Tensor(x.shape());
      node.saved = Tensor(Shape{rows});
      for (std::size_t r = 0; r < rows; ++r) {
        const double* row = x.data() + r * d;
        double mean = 0.0;
        for (std::size_t j = 0; j < d; ++j) mean += row[j];
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) var += (row[j] - mean) * (row[j] - mean);
        var /= static_cast<double>(d);
        const double inv = 1.0 / std::sqrt(var + attrs.scalar);
        node.saved[r] = inv;
        for (std::size_t j = 0; j < d; ++j) node.value[r * d + j] = (row[j] - mean) * inv;
      }
      break;
    }

    case Primitive::Relu: {
      require_arity(1);
      const Tensor& x = in(0);
      node.value = Tensor(x.shape());
      for (std::size_t i = 0; i < x.size(); ++i) node.value[i] = x[i] > 0.0 ? x[i] : 0.0;
      break;
    }

    case Primitive::EmbedLookup: {
      require_arity(1);
      const Tensor& table = in(0);
      if (table.rank() != 2) throw ShapeError("embed_lookup table must be rank 2, got " + shape_string(table.shape()));
      const std::size_t d = table.dim(1);
      node.value = Tensor(Shape{attrs.indices.size(), d});
      for (std::size_t r = 0; r < attrs.indices.size(); ++r) {
        const std::size_t id = attrs.indices[r];
        if (id >= table.dim(0)) {
          throw ShapeError("embed_lookup index " + std::to_string(id) + " outside table " +
                           shape_string(table.shape()));
        }
        std::copy_n(table.data() + id * d, d, node.value.data() + r * d);
      }
      break;
    }

    case Primitive::Concat: {
      if (inputs.empty()) throw ShapeError("concat of zero tensors");
      const Shape& first = in(0).shape();
      if (attrs.axis >= first.size()) throw ShapeError("concat axis out of range for " + shape_string(first));
      Shape out_shape = first;
      out_shape[attrs.axis] = 0;
      for (std::size_t k = 0; k < inputs.size(); ++k) {
        Shape s = in(k).shape();
        if (s.size() != first.size()) shape_mismatch(op, first, s);
        for (std::size_t ax = 0; ax < s.size(); ++ax) {
          if (ax != attrs.axis && s[ax] != first[ax]) shape_mismatch(op, first, s);
        }
        out_shape[attrs.axis] += s[attrs.axis];
      }
      std::size_t outer = 1, inner = 1;
      for (std::size_t ax = 0; ax < attrs.axis; ++ax) outer *= first[ax];
      for (std::size_t ax = attrs.axis + 1; ax < first.size(); ++ax) inner *= first[ax];
      node.value = Tensor(out_shape);
      const std::size_t out_chunk = out_shape[attrs.axis] * inner;
      std::size_t offset = 0;
      for (std::size_t k = 0; k < inputs.size(); ++k) {
        const Tensor& t = in(k);
        const std::size_t chunk = t.shape()[attrs.axis] * inner;
        for (std::size_t o = 0; o < outer; ++o) {
          std::copy_n(t.data() + o * chunk, chunk, node.value.data() + o * out_chunk + offset);
        }
        offset += chunk;
      }
      break;
    }

    case Primitive::Transpose: {
      require_arity(1);
      const Tensor& x = in(0);
      const std::size_t rank = x.rank();
      std::vector<bool> seen(rank, false);
      bool valid = attrs.axes.size() == rank;
      for (std::size_t a : attrs.axes) {
        if (!valid || a >= rank || seen[a]) {
          valid = false;
          break;
        }
        seen[a] = true;
      }
      if (!valid) throw ShapeError("transpose: invalid permutation for shape " + shape_string(x.shape()));
      Shape out_shape(rank);
      for (std::size_t i = 0; i < rank; ++i) out_shape[i] = x.shape()[attrs.axes[i]];
      node.value = Tensor(out_shape);
      permute_copy(x.shape(), attrs.axes, x.data(), node.value.data(), false);
      break;
    }

    case Primitive::Reshape: {
      require_arity(1);
      node.value = in(0).reshaped(attrs.shape);
      break;
    }

    case Primitive::CrossEntropy: {
      require_arity(1);
      const Tensor& logits = in(0);
      if (logits.rank() != 2 || logits.dim(0) != attrs.indices.size()) {
        throw ShapeError("cross_entropy: logits " + shape_string(logits.shape()) + " vs " +
                         std::to_string(attrs.indices.size()) + " targets");
      }
      const std::size_t n = logits.dim(0), v = logits.dim(1);
      node.saved = Tensor(logits.shape());
      double total = 0.0;
      std::size_t counted = 0;
      for (std::size_t r = 0; r < n; ++r) {
        const double* row = logits.data() + r * v;
        double mx = row[0];
        for (std::size_t j = 1; j < v; ++j) mx = std::max(mx, row[j]);
        double z = 0.0;
        for (std::size_t j = 0; j < v; ++j) {
          const double e = std::exp(row[j] - mx);
          node.saved[r * v + j] = e;
          z += e;
        }
        for (std::size_t j = 0; j < v; ++j) node.saved[r * v + j] /= z;
        const std::size_t target = attrs.indices[r];
        if (target == attrs.ignore_index) continue;
        if (target >= v) throw ShapeError("cross_entropy target " + std::to_string(target) + " >= " + std::to_string(v));
        total += -(row[target] - mx - std::log(z));
        ++counted;
      }
      attrs.scalar = static_cast<double>(counted);
      node.value = Tensor::scalar(counted ? total / static_cast<double>(counted) : 0.0);
      break;
    }

    case Primitive::Sum: {
      require_arity(1);
      const Tensor& x = in(0);
      double total = 0.0;
      for (double v : x.values()) total += v;
      node.value = Tensor(Shape{}, total);
      break;
    }
  }

  if (!node.value.all_finite()) {
    throw NumericError(primitive_name(op) + " produced NaN or Inf");
  }
  node.attrs = std::move(attrs);
  return push(std::move(node));
}

Gradients Tape::backward(Var loss, const ParameterStore& params) const {
  check(loss);
  if (nodes_[loss.index_].out().size() != 1) {
    throw ShapeError("backward needs a scalar loss, got " + shape_string(nodes_[loss.index_].out().shape()));
  }
  Gradients result;
  result.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) result.emplace_back(params.value(i).shape());

  std::vector<Tensor> grads(nodes_.size());
  grads[loss.index_] = Tensor(nodes_[loss.index_].out().shape(), 1.0);
  std::vector<double> scratch;

  for (std::size_t idx = loss.index_ + 1; idx-- > 0;) {
    const Node& node = nodes_[idx];
    if (!node.requires_grad || grads[idx].size() == 0) continue;
    const Tensor& g = grads[idx];
    auto wants = [&](std::size_t k) { return nodes_[node.inputs[k]].requires_grad; };
    auto input_value = [&](std::size_t k) -> const Tensor& { return nodes_[node.inputs[k]].out(); };
    auto target = [&](std::size_t k) -> Tensor& {
      return accumulate_target(grads, node.inputs[k], input_value(k).shape());
    };

    switch (node.op) {
      case Primitive::Constant:
        break;

      case Primitive::Parameter: {
        if (node.param_id >= result.size() || &params.value(node.param_id) != node.external) {
          throw GraphError("tape parameter does not belong to the given store");
        }
        Tensor& dst = result[node.param_id];
        for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
        break;
      }

      case Primitive::MatMul: {
        const Tensor& a = input_value(0);
        const Tensor& b = input_value(1);
        const bool batched = a.rank() == 3;
        const std::size_t bs = batched ? a.dim(0) : 1;
        const std::size_t m = a.dim(a.rank() - 2), k = a.dim(a.rank() - 1), n = b.dim(b.rank() - 1);
        if (wants(0)) {
          Tensor& da = target(0);
          for (std::size_t i = 0; i < bs; ++i) {
            kernels::gemm_nt(m, k, n, g.data() + i * m * n, b.data() + i * k * n, da.data() + i * m * k, scratch);
          }
        }
        if (wants(1)) {
          Tensor& db = target(1);
          for (std::size_t i = 0; i < bs; ++i) {
            kernels::gemm_tn(k, n, m, a.data() + i * m * k, g.data() + i * m * n, db.data() + i * k * n);
          }
        }
        break;
      }

      case Primitive::Add:
      case Primitive::Mul: {
        const Tensor& a = input_value(0);
        const Tensor& b = input_value(1);
        const std::size_t nb = b.size();
        if (wants(0)) {
          Tensor& da = target(0);
          for (std::size_t base = 0; base < a.size(); base += nb) {
            if (node.op == Primitive::Add) {
              for (std::size_t j = 0; j < nb; ++j) da[base + j] += g[base + j];
            } else {
              for (std::size_t j = 0; j < nb; ++j) da[base + j] += g[base + j] * b[j];
            }
          }
        }
        if (wants(1)) {
          Tensor& db = target(1);
          for (std::size_t base = 0; base < a.size(); base += nb) {
            if (node.op == Primitive::Add) {
              for (std::size_t j = 0; j < nb; ++j) db[j] += g[base + j];
            } else {
              for (std::size_t j = 0; j < nb; ++j) db[j] += g[base + j] * a[base + j];
            }
          }
        }
        break;
      }

      case Primitive::Scale: {
        if (!wants(0)) break;
        Tensor& dx = target(0);
        for (std::size_t i = 0; i < g.size(); ++i) dx[i] += node.attrs.scalar * g[i];
        break;
      }

      case Primitive::Softmax: {
        if (!wants(0)) break;
        Tensor& dx = target(0);
        const Tensor& y = node.value;
        const std::size_t d = last_dim(y);
        for (std::size_t base = 0; base < y.size(); base += d) {
          double dot = 0.0;
          for (std::size_t j = 0; j < d; ++j) dot += g[base + j] * y[base + j];
          for (std::size_t j = 0; j < d; ++j) dx[base + j] += y[base + j] * (g[base + j] - dot);
        }
        break;
      }

      case Primitive::LayerNorm: {
        if (!wants(0)) break;
        Tensor& dx = target(0);
        const Tensor& xhat = node.value;
        const std::size_t d = last_dim(xhat);
        const double dd = static_cast<double>(d);
        for (std::size_t r = 0; r < node.saved.size(); ++r) {
          const std::size_t base = r * d;
          double sum_g = 0.0, sum_gx = 0.0;
          for (std::size_t j = 0; j < d; ++j) {
            sum_g += g[base + j];
            sum_gx += g[base + j] * xhat[base + j];
          }
          const double inv = node.saved[r];
          for (std::size_t j = 0; j < d; ++j) {
            dx[base + j] += inv / dd * (dd * g[base + j] - sum_g - xhat[base + j] * sum_gx);
          }
        }
        break;
      }

      case Primitive::Relu: {
        if (!wants(0)) break;
        Tensor& dx = target(0);
        const Tensor& x = input_value(0);
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (x[i] > 0.0) dx[i] += g[i];
        }
        break;
      }

      case Primitive::EmbedLookup: {
        if (!wants(0)) break;
        Tensor& dt = target(0);
        const std::size_t d = dt.dim(1);
        for (std::size_t r = 0; r < node.attrs.indices.size(); ++r) {
          double* dst = dt.data() + node.attrs.indices[r] * d;
          const double* src = g.data() + r * d;
          for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
        }
        break;
      }

      case Primitive::Concat: {
        const Shape& out_shape = node.value.shape();
        const std::size_t axis = node.attrs.axis;
        std::size_t outer = 1, inner = 1;
        for (std::size_t ax = 0; ax < axis; ++ax) outer *= out_shape[ax];
        for (std::size_t ax = axis + 1; ax < out_shape.size(); ++ax) inner *= out_shape[ax];
        const std::size_t out_chunk = out_shape[axis] * inner;
        std::size_t offset = 0;
        for (std::size_t k = 0; k < node.inputs.size(); ++k) {
          const std::size_t chunk = input_value(k).shape()[axis] * inner;
          if (wants(k)) {
            Tensor& dst = target(k);
            for (std::size_t o = 0; o < outer; ++o) {
              for (std::size_t j = 0; j < chunk; ++j) dst[o * chunk + j] += g[o * out_chunk + offset + j];
            }
          }
          offset += chunk;
        }
        break;
      }

      case Primitive::Transpose: {
        if (!wants(0)) break;
        Tensor& dx = target(0);
        permute_copy(input_value(0).shape(), node.attrs.axes, g.data(), dx.data(), true);
        break;
      }

      case Primitive::Reshape: {
        if (!wants(0)) break;
        Tensor& dx = target(0);
        for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i];
        break;
      }

      case Primitive::CrossEntropy: {
        if (!wants(0)) break;
        const double counted = node.attrs.scalar;
        if (counted == 0.0) break;
        Tensor& dx = target(0);
        const std::size_t v = node.saved.dim(1);
        const double coeff = g[0] / counted;
        for (std::size_t r = 0; r < node.attrs.indices.size(); ++r) {
          const std::size_t t = node.attrs.indices[r];
          if (t == node.attrs.ignore_index) continue;
          for (std::size_t j = 0; j < v; ++j) dx[r * v + j] += coeff * node.saved[r * v + j];
          dx[r * v + t] -= coeff;
        }
        break;
      }

      case Primitive::Sum: {
        if (!wants(0)) break;
        Tensor& dx = target(0);
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g[0];
        break;
      }
    }
  }
  return result;
}

Var apply_primitive(Primitive op, std::span<const Var> inputs, Tape& tape, OpAttributes attrs) {
  return tape.apply(op, inputs, std::move(attrs));
}

Var matmul(Tape& tape, Var a, Var b) {
  const Var in[] = {a, b};
  return tape.apply(Primitive::MatMul, in);
}

Var add(Tape& tape, Var a, Var b) {
  const Var in[] = {a, b};
  return tape.apply(Primitive::Add, in);
}

Var mul(Tape& tape, Var a, Var b) {
  const Var in[] = {a, b};
  return tape.apply(Primitive::Mul, in);
}

Var scale(Tape& tape, Var x, double factor) {
  OpAttributes attrs;
  attrs.scalar = factor;
  return tape.apply(Primitive::Scale, std::span<const Var>(&x, 1), std::move(attrs));
}

Var softmax(Tape& tape, Var x) { return tape.apply(Primitive::Softmax, std::span<const Var>(&x, 1)); }

Var layernorm(Tape& tape, Var x, double eps) {
  OpAttributes attrs;
  attrs.scalar = eps;
  return tape.apply(Primitive::LayerNorm, std::span<const Var>(&x, 1), std::move(attrs));
}

Var relu(Tape& tape, Var x) { return tape.apply(Primitive::Relu, std::span<const Var>(&x, 1)); }

Var embed_lookup(Tape& tape, Var table, std::vector<std::size_t> indices) {
  OpAttributes attrs;
  attrs.indices = std::move(indices);
  return tape.apply(Primitive::EmbedLookup, std::span<const Var>(&table, 1), std::move(attrs));
}

Var concat(Tape& tape, std::span<const Var> parts, std::size_t axis) {
  OpAttributes attrs;
  attrs.axis = axis;
  return tape.apply(Primitive::Concat, parts, std::move(attrs));
}

Var transpose(Tape& tape, Var x, std::vector<std::size_t> axes) {
  OpAttributes attrs;
  attrs.axes = std::move(axes);
  return tape.apply(Primitive::Transpose, std::span<const Var>(&x, 1), std::move(attrs));
}

Var transpose(Tape& tape, Var x) {
  const std::size_t rank = tape.value(x).rank();
  if (rank < 2) throw ShapeError("transpose needs rank >= 2, got " + shape_string(tape.value(x).shape()));
  std::vector<std::size_t> axes(rank);
  for (std::size_t i = 0; i < rank; ++i) axes[i] = i;
  std::swap(axes[rank - 1], axes[rank - 2]);
  return transpose(tape, x, std::move(axes));
}

Var reshape(Tape& tape, Var x, Shape shape) {
  OpAttributes attrs;
  attrs.shape = std::move(shape);
  return tape.apply(Primitive::Reshape, std::span<const Var>(&x, 1), std::move(attrs));
}

Var cross_entropy(Tape& tape, Var logits, std::vector<std::size_t> targets, std::size_t ignore_index) {
  OpAttributes attrs;
  attrs.indices = std::move(targets);
  attrs.ignore_index = ignore_index;
  return tape.apply(Primitive::CrossEntropy, std::span<const Var>(&logits, 1), std::move(attrs));
}

Var sum(Tape& tape, Var x) { return tape.apply(Primitive::Sum, std::span<const Var>(&x, 1)); }

Gradients backward(const Tape& tape, Var loss, const ParameterStore& params) {
  return tape.backward(loss, params);
}

}  // namespace rlab::ad

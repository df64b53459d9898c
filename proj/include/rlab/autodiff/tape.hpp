#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rlab/autodiff/tensor.hpp"

namespace rlab::ad {

enum class Primitive {
  Constant,
  Parameter,
  MatMul,        // [m,k]x[k,n] or batched [b,m,k]x[b,k,n]
  Add,           // same shape, or second operand's shape a suffix of the first's
  Mul,           // elementwise, same broadcasting rule as Add
  Scale,         // attrs.scalar * x
  Softmax,       // over the last axis
  LayerNorm,     // (x - mean) / sqrt(var + eps) over the last axis, attrs.scalar = eps
  Relu,
  EmbedLookup,   // table [V,d], attrs.indices -> [n,d]
  Concat,        // along attrs.axis
  Transpose,     // axis permutation attrs.axes
  Reshape,       // to attrs.shape
  CrossEntropy,  // logits [n,V], attrs.indices targets, mean over rows != attrs.ignore_index
  Sum,           // all elements -> scalar
};

std::string primitive_name(Primitive p);

struct OpAttributes {
  std::vector<std::size_t> indices;
  std::vector<std::size_t> axes;
  Shape shape;
  double scalar = 0.0;
  std::size_t axis = 0;
  std::size_t ignore_index = std::numeric_limits<std::size_t>::max();
};

// Named parameter tensors owned by a model. Gradients are aligned by index.
class ParameterStore {
 public:
  std::size_t add(std::string name, Tensor value);
  std::size_t size() const { return values_.size(); }
  const std::string& name(std::size_t id) const { return names_.at(id); }
  Tensor& value(std::size_t id) { return values_.at(id); }
  const Tensor& value(std::size_t id) const { return values_.at(id); }
  // Throws ConfigError when absent.
  std::size_t find(const std::string& name) const;
  std::size_t total_elements() const;

  bool operator==(const ParameterStore&) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
};

using Gradients = std::vector<Tensor>;

// Handle to a value recorded on a specific tape.
class Var {
 public:
  Var() = default;
  std::size_t index() const { return index_; }
  std::uint64_t tape_id() const { return tape_id_; }

 private:
  friend class Tape;
  Var(std::uint64_t tape_id, std::size_t index) : tape_id_(tape_id), index_(index) {}
  std::uint64_t tape_id_ = 0;
  std::size_t index_ = 0;
};

// Append-only record of primitive applications in topological order. Parameter
// nodes reference the store's tensors, which must outlive the tape and stay
// unchanged while it is in use.
class Tape {
 public:
  Tape();

  Var constant(Tensor value);
  Var parameter(const ParameterStore& params, std::size_t id);

  // Computes the forward value and records the application. Throws ShapeError
  // on non-conforming inputs and NumericError on non-finite output.
  Var apply(Primitive op, std::span<const Var> inputs, OpAttributes attrs = {});

  const Tensor& value(Var v) const;
  Primitive primitive(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  // Reverse sweep from a scalar loss. Gradients are accumulated additively
  // when a value feeds several consumers. Parameters that the loss does not
  // reach receive zeros. Throws GraphError if the loss is not on this tape.
  Gradients backward(Var loss, const ParameterStore& params) const;

 private:
  struct Node {
    Primitive op = Primitive::Constant;
    std::vector<std::size_t> inputs;
    Tensor value;
    const Tensor* external = nullptr;  // parameter storage
    std::size_t param_id = 0;
    OpAttributes attrs;
    Tensor saved;  // per-op intermediates (softmax probabilities, inverse std, ...)
    bool requires_grad = false;

    const Tensor& out() const { return external ? *external : value; }
  };

  void check(Var v) const;
  Var push(Node node);

  std::uint64_t id_;
  std::vector<Node> nodes_;
};

// Typed wrappers over Tape::apply.
Var apply_primitive(Primitive op, std::span<const Var> inputs, Tape& tape, OpAttributes attrs = {});
Var matmul(Tape& tape, Var a, Var b);
Var add(Tape& tape, Var a, Var b);
Var mul(Tape& tape, Var a, Var b);
Var scale(Tape& tape, Var x, double factor);
Var softmax(Tape& tape, Var x);
Var layernorm(Tape& tape, Var x, double eps = 1e-5);
Var relu(Tape& tape, Var x);
Var embed_lookup(Tape& tape, Var table, std::vector<std::size_t> indices);
Var concat(Tape& tape, std::span<const Var> parts, std::size_t axis);
Var transpose(Tape& tape, Var x, std::vector<std::size_t> axes);
// Swaps the last two axes.
Var transpose(Tape& tape, Var x);
Var reshape(Tape& tape, Var x, Shape shape);
Var cross_entropy(Tape& tape, Var logits, std::vector<std::size_t> targets,
                  std::size_t ignore_index = std::numeric_limits<std::size_t>::max());
Var sum(Tape& tape, Var x);

Gradients backward(const Tape& tape, Var loss, const ParameterStore& params);

}  // namespace rlab::ad

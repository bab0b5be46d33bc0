#pragma once

#include <functional>
#include <string>
#include <vector>

#include "aircast/rng.hpp"
#include "aircast/tensor.hpp"

namespace aircast {

// Handle to a node on a Tape.
struct Value {
  Index node = -1;
};

// Define-by-run reverse-mode differentiation. Nodes are appended in
// execution order, so a single reverse sweep visits every node after all of
// its consumers. Gradients flow only through nodes that (transitively)
// depend on a leaf created with needs_grad=true.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, Index self)>;

  Value leaf(Tensor value, bool needs_grad = false);
  Value emplace(Tensor value, std::vector<Index> inputs, BackwardFn backward);

  const Tensor& value(Value v) const { return value_of(check(v)); }
  const Tensor& value_of(Index node) const { return nodes_[static_cast<std::size_t>(node)].value; }

  // Accumulated adjoint of a node; zeros when the node never received one.
  const Tensor& grad(Value v);

  // Seeds d(loss)/d(loss) = 1 and runs the reverse sweep. loss must be a
  // scalar (size-1) node.
  void backward(Value loss);

  void clear();
  Index size() const { return static_cast<Index>(nodes_.size()); }

  bool needs_grad(Index node) const { return nodes_[static_cast<std::size_t>(node)].needs_grad; }
  const std::vector<Index>& inputs_of(Index node) const {
    return nodes_[static_cast<std::size_t>(node)].inputs;
  }

  // Accumulation target during the reverse sweep; allocates zeros on first use.
  Tensor& grad_ref(Index node);
  bool grad_allocated(Index node) const {
    return nodes_[static_cast<std::size_t>(node)].grad_allocated;
  }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<Index> inputs;
    BackwardFn backward;
    bool needs_grad = false;
    bool grad_allocated = false;
  };

  Index check(Value v) const;

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

// ---- elementwise ----
Value add(Tape& t, Value a, Value b);           // same shape
Value mul(Tape& t, Value a, Value b);           // Hadamard, same shape
Value scale(Tape& t, Value a, double k);
Value relu(Tape& t, Value a);
Value sigmoid(Tape& t, Value a);
Value tanh(Tape& t, Value a);

// ---- matrix ----
Value matmul(Tape& t, Value a, Value b);                 // [m,k]·[k,n]
Value add_bias_rows(Tape& t, Value m, Value bias);       // [R,C] + [C] per row
Value row(Tape& t, Value m, Index r);                    // [R,C] → [1,C]
Value slice_cols(Tape& t, Value m, Index c0, Index c1);  // [R,C] → [R,c1-c0]
Value concat_rows(Tape& t, const std::vector<Value>& parts);  // [Ri,C]… → [ΣRi,C]
Value reshape(Tape& t, Value a, std::vector<Index> shape);

// ---- convolution / pooling (channel-major layouts) ----
// input [C_in,H,W], kernels [C_out,C_in,kH,kW] with odd kH,kW;
// cross-correlation, zero same-padding, stride 1 → [C_out,H,W].
Value conv2d(Tape& t, Value input, Value kernels);
// input [C_in,T], kernels [C_out,C_in,k]; same-padding requires odd k,
// valid mode shrinks the time axis to T-k+1.
Value conv1d(Tape& t, Value input, Value kernels, bool same_padding = true);
// bias [C] added to every position of channel c; input rank ≥ 2, extent(0)=C.
Value bias_channels(Tape& t, Value input, Value bias);
Value maxpool2d(Tape& t, Value input);                 // 2×2 window, stride 2
Value maxpool1d(Tape& t, Value input);                 // window 2, stride 2 over time
Value upsample1d(Tape& t, Value input, Index factor);  // nearest neighbor over time
Value mean_over_time(Tape& t, Value input);            // [C,T] → [C]

// ---- classifier pieces ----
Value softmax(Tape& t, Value logits);  // flat, numerically stable
// -log softmax(logits)[target], max-subtracted; logits flat with K ≥ 2.
Value softmax_crossentropy(Tape& t, Value logits, Index target);
// Training: zero each element with probability rate and scale survivors by
// 1/(1-rate), mask drawn from rng at construction; inference: identity.
Value dropout(Tape& t, Value input, double rate, Rng& rng, bool training);

// Trainable tensor with an id stable across save/load.
struct Parameter {
  std::string id;
  Tensor value;
  Tensor grad;  // same shape, zero-initialized
};

Parameter make_parameter(std::string id, Tensor value);

}  // namespace aircast

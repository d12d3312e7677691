#pragma once

#include <cstdint>
#include <vector>

#include "rnnalg/kernels.hpp"
#include "rnnalg/tensor.hpp"

namespace rnnalg {

// Reverse-mode autodiff over a flat list of primitive operations.
//
// Usage: register leaves (parameters with needs_grad, constants without),
// build the forward graph through the member ops, then call backward(loss)
// once.  Node ids are indices into the tape, already in topological order.
// A tape is single-owner; distinct tapes may run on different threads.
class Tape {
 public:
  enum class Op : uint8_t {
    Leaf,
    MatMul,       // a * b
    Add,          // a + b, same shape
    Sub,          // a - b, same shape
    Mul,          // a ⊙ b, same shape
    Scale,        // a * scalar
    AddRow,       // a (RxC) + b (1xC) broadcast over rows
    Sigmoid,
    Tanh,
    OneMinus,     // 1 - a
    GatherRows,   // rows of a selected by index list
    RowNorms,     // per-row Euclidean norm, Rx1
    DivElem,      // a / b, same shape
    ClampMin,     // max(a, scalar) elementwise
    MeanAll,      // mean of all entries, 1x1
    BlockCombine, // block-diagonal linear head, see below
    SoftmaxXent,  // mean cross-entropy of softmax(a) against labels, 1x1
  };

  int leaf(Tensor value, bool needs_grad = false);

  int matmul(int a, int b);
  int add(int a, int b);
  int sub(int a, int b);
  int mul(int a, int b);
  int scale(int a, float s);
  int add_row(int a, int b);
  int sigmoid(int a);
  int tanh(int a);
  int one_minus(int a);
  int gather_rows(int a, std::vector<int> rows);
  int row_norms(int a);
  int div_elem(int a, int b);
  int clamp_min(int a, float floor);
  int mean_all(int a);
  // d: Bx(k*C), w: Cxk, bias: 1xC.  out[b,c] = sum_j w[c,j]*d[b,c*k+j] + bias[c].
  int block_combine(int d, int w, int bias);
  // logits: BxC, one label per row; returns the mean of -log softmax[label].
  int softmax_xent(int logits, std::vector<int> labels);

  const Tensor& value(int id) const;
  int size() const { return int(nodes_.size()); }
  bool consumed() const { return consumed_; }

  // Gradients of the scalar `loss` node wrt every needs_grad node, indexed by
  // node id (empty tensors elsewhere).  Consumes the tape: a second call is a
  // usage error.
  std::vector<Tensor> backward(int loss);

 private:
  struct Node {
    Op op = Op::Leaf;
    int a = -1;
    int b = -1;
    int c = -1;
    float scalar = 0.0f;
    std::vector<int> index;  // GatherRows rows / SoftmaxXent labels
    Tensor value;
    bool needs_grad = false;
  };

  int push(Node n);
  const Node& node(int id) const;
  bool grad_flows(int id) const { return nodes_[id].needs_grad; }

  std::vector<Node> nodes_;
  bool consumed_ = false;
};

}  // namespace rnnalg

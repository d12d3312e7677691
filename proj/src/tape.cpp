#include "rnnalg/tape.hpp"

#include <cmath>
#include <string>

namespace rnnalg {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": shapes " + std::to_string(a.rows) +
                     "x" + std::to_string(a.cols) + " and " +
                     std::to_string(b.rows) + "x" + std::to_string(b.cols) +
                     " differ");
  }
}

}  // namespace

int Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return int(nodes_.size()) - 1;
}

const Tape::Node& Tape::node(int id) const {
  if (id < 0 || id >= int(nodes_.size())) {
    throw UsageError("tape: node id " + std::to_string(id) + " not recorded");
  }
  return nodes_[id];
}

const Tensor& Tape::value(int id) const { return node(id).value; }

int Tape::leaf(Tensor value, bool needs_grad) {
  Node n;
  n.op = Op::Leaf;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  return push(std::move(n));
}

int Tape::matmul(int a, int b) {
  const Tensor& ta = node(a).value;
  const Tensor& tb = node(b).value;
  Node n;
  n.op = Op::MatMul;
  n.a = a;
  n.b = b;
  n.value = Tensor(ta.rows, tb.cols);
  kernels::matmul(ta, tb, n.value);
  n.needs_grad = grad_flows(a) || grad_flows(b);
  return push(std::move(n));
}

int Tape::add(int a, int b) {
  const Tensor& ta = node(a).value;
  const Tensor& tb = node(b).value;
  require_same_shape(ta, tb, "add");
  Node n;
  n.op = Op::Add;
  n.a = a;
  n.b = b;
  n.value = Tensor(ta.rows, ta.cols);
  for (size_t i = 0; i < ta.size(); ++i) n.value.v[i] = ta.v[i] + tb.v[i];
  n.needs_grad = grad_flows(a) || grad_flows(b);
  return push(std::move(n));
}

int Tape::sub(int a, int b) {
  const Tensor& ta = node(a).value;
  const Tensor& tb = node(b).value;
  require_same_shape(ta, tb, "sub");
  Node n;
  n.op = Op::Sub;
  n.a = a;
  n.b = b;
  n.value = Tensor(ta.rows, ta.cols);
  for (size_t i = 0; i < ta.size(); ++i) n.value.v[i] = ta.v[i] - tb.v[i];
  n.needs_grad = grad_flows(a) || grad_flows(b);
  return push(std::move(n));
}

int Tape::mul(int a, int b) {
  const Tensor& ta = node(a).value;
  const Tensor& tb = node(b).value;
  require_same_shape(ta, tb, "mul");
  Node n;
  n.op = Op::Mul;
  n.a = a;
  n.b = b;
  n.value = Tensor(ta.rows, ta.cols);
  for (size_t i = 0; i < ta.size(); ++i) n.value.v[i] = ta.v[i] * tb.v[i];
  n.needs_grad = grad_flows(a) || grad_flows(b);
  return push(std::move(n));
}

int Tape::scale(int a, float s) {
  const Tensor& ta = node(a).value;
  Node n;
  n.op = Op::Scale;
  n.a = a;
  n.scalar = s;
  n.value = Tensor(ta.rows, ta.cols);
  for (size_t i = 0; i < ta.size(); ++i) n.value.v[i] = ta.v[i] * s;
  n.needs_grad = grad_flows(a);
  return push(std::move(n));
}

int Tape::add_row(int a, int b) {
  const Tensor& ta = node(a).value;
  const Tensor& tb = node(b).value;
  if (tb.rows != 1 || tb.cols != ta.cols) {
    throw ShapeError("add_row: broadcast operand must be 1x" +
                     std::to_string(ta.cols));
  }
  Node n;
  n.op = Op::AddRow;
  n.a = a;
  n.b = b;
  n.value = Tensor(ta.rows, ta.cols);
  for (int r = 0; r < ta.rows; ++r) {
    for (int c = 0; c < ta.cols; ++c) {
      n.value.at(r, c) = ta.at(r, c) + tb.v[c];
    }
  }
  n.needs_grad = grad_flows(a) || grad_flows(b);
  return push(std::move(n));
}

int Tape::sigmoid(int a) {
  const Tensor& ta = node(a).value;
  Node n;
  n.op = Op::Sigmoid;
  n.a = a;
  n.value = Tensor(ta.rows, ta.cols);
  for (size_t i = 0; i < ta.size(); ++i) n.value.v[i] = kernels::sigmoidf(ta.v[i]);
  n.needs_grad = grad_flows(a);
  return push(std::move(n));
}

int Tape::tanh(int a) {
  const Tensor& ta = node(a).value;
  Node n;
  n.op = Op::Tanh;
  n.a = a;
  n.value = Tensor(ta.rows, ta.cols);
  for (size_t i = 0; i < ta.size(); ++i) n.value.v[i] = std::tanh(ta.v[i]);
  n.needs_grad = grad_flows(a);
  return push(std::move(n));
}

int Tape::one_minus(int a) {
  const Tensor& ta = node(a).value;
  Node n;
  n.op = Op::OneMinus;
  n.a = a;
  n.value = Tensor(ta.rows, ta.cols);
  for (size_t i = 0; i < ta.size(); ++i) n.value.v[i] = 1.0f - ta.v[i];
  n.needs_grad = grad_flows(a);
  return push(std::move(n));
}

int Tape::gather_rows(int a, std::vector<int> rows) {
  const Tensor& ta = node(a).value;
  for (int r : rows) {
    if (r < 0 || r >= ta.rows) {
      throw IndexError("gather_rows: row " + std::to_string(r) +
                       " out of range [0, " + std::to_string(ta.rows) + ")");
    }
  }
  Node n;
  n.op = Op::GatherRows;
  n.a = a;
  n.value = Tensor(int(rows.size()), ta.cols);
  for (size_t i = 0; i < rows.size(); ++i) {
    const float* src = ta.row(rows[i]);
    float* dst = n.value.row(int(i));
    for (int c = 0; c < ta.cols; ++c) dst[c] = src[c];
  }
  n.index = std::move(rows);
  n.needs_grad = grad_flows(a);
  return push(std::move(n));
}

int Tape::row_norms(int a) {
  const Tensor& ta = node(a).value;
  Node n;
  n.op = Op::RowNorms;
  n.a = a;
  n.value = kernels::row_norms(ta);
  n.needs_grad = grad_flows(a);
  return push(std::move(n));
}

int Tape::div_elem(int a, int b) {
  const Tensor& ta = node(a).value;
  const Tensor& tb = node(b).value;
  require_same_shape(ta, tb, "div_elem");
  Node n;
  n.op = Op::DivElem;
  n.a = a;
  n.b = b;
  n.value = Tensor(ta.rows, ta.cols);
  for (size_t i = 0; i < ta.size(); ++i) n.value.v[i] = ta.v[i] / tb.v[i];
  n.needs_grad = grad_flows(a) || grad_flows(b);
  return push(std::move(n));
}

int Tape::clamp_min(int a, float floor) {
  const Tensor& ta = node(a).value;
  Node n;
  n.op = Op::ClampMin;
  n.a = a;
  n.scalar = floor;
  n.value = Tensor(ta.rows, ta.cols);
  for (size_t i = 0; i < ta.size(); ++i)
    n.value.v[i] = ta.v[i] > floor ? ta.v[i] : floor;
  n.needs_grad = grad_flows(a);
  return push(std::move(n));
}

int Tape::mean_all(int a) {
  const Tensor& ta = node(a).value;
  Node n;
  n.op = Op::MeanAll;
  n.a = a;
  n.value = Tensor(1, 1);
  n.value.v[0] = float(kernels::sum_all(ta) / double(ta.size()));
  n.needs_grad = grad_flows(a);
  return push(std::move(n));
}

int Tape::block_combine(int d, int w, int bias) {
  const Tensor& td = node(d).value;
  const Tensor& tw = node(w).value;
  const Tensor& tb = node(bias).value;
  const int classes = tw.rows;
  const int k = tw.cols;
  if (td.cols != classes * k) {
    throw ShapeError("block_combine: expected " + std::to_string(classes * k) +
                     " features, got " + std::to_string(td.cols));
  }
  if (tb.rows != 1 || tb.cols != classes) {
    throw ShapeError("block_combine: bias must be 1x" + std::to_string(classes));
  }
  Node n;
  n.op = Op::BlockCombine;
  n.a = d;
  n.b = w;
  n.c = bias;
  n.value = Tensor(td.rows, classes);
  for (int r = 0; r < td.rows; ++r) {
    const float* dr = td.row(r);
    for (int c = 0; c < classes; ++c) {
      double acc = double(tb.v[c]);
      const float* wc = tw.row(c);
      for (int j = 0; j < k; ++j) acc += double(wc[j]) * double(dr[c * k + j]);
      n.value.at(r, c) = float(acc);
    }
  }
  n.needs_grad = grad_flows(d) || grad_flows(w) || grad_flows(bias);
  return push(std::move(n));
}

int Tape::softmax_xent(int logits, std::vector<int> labels) {
  const Tensor& tl = node(logits).value;
  if (tl.cols < 2) throw ShapeError("softmax_xent: need at least 2 classes");
  if (int(labels.size()) != tl.rows) {
    throw ShapeError("softmax_xent: one label per row required");
  }
  for (int y : labels) {
    if (y < 0 || y >= tl.cols) {
      throw IndexError("softmax_xent: label " + std::to_string(y) +
                       " out of range [0, " + std::to_string(tl.cols) + ")");
    }
  }
  Node n;
  n.op = Op::SoftmaxXent;
  n.a = logits;
  n.value = Tensor(1, 1);
  double total = 0.0;
  for (int r = 0; r < tl.rows; ++r) {
    const float* row = tl.row(r);
    float mx = row[0];
    for (int c = 1; c < tl.cols; ++c) mx = std::max(mx, row[c]);
    double s = 0.0;
    for (int c = 0; c < tl.cols; ++c) s += std::exp(double(row[c] - mx));
    total += std::log(s) - double(row[labels[r]] - mx);
  }
  n.value.v[0] = float(total / double(tl.rows));
  n.index = std::move(labels);
  n.needs_grad = grad_flows(logits);
  return push(std::move(n));
}

std::vector<Tensor> Tape::backward(int loss) {
  if (consumed_) throw UsageError("tape: backward already ran on this tape");
  const Node& ln = node(loss);
  if (ln.value.rows != 1 || ln.value.cols != 1) {
    throw UsageError("tape: backward requires a scalar loss node");
  }
  consumed_ = true;

  std::vector<Tensor> grad(nodes_.size());
  std::vector<char> has(nodes_.size(), 0);
  auto ensure = [&](int id) -> Tensor& {
    if (!has[id]) {
      const Tensor& v = nodes_[id].value;
      grad[id] = Tensor(v.rows, v.cols);
      has[id] = 1;
    }
    return grad[id];
  };

  ensure(loss).v[0] = 1.0f;

  for (int id = loss; id >= 0; --id) {
    if (!has[id] || !nodes_[id].needs_grad) continue;
    const Node& n = nodes_[id];
    const Tensor& g = grad[id];
    switch (n.op) {
      case Op::Leaf:
        break;
      case Op::MatMul: {
        if (grad_flows(n.a)) kernels::matmul_bt(g, nodes_[n.b].value, ensure(n.a), true);
        if (grad_flows(n.b)) kernels::matmul_at(nodes_[n.a].value, g, ensure(n.b), true);
        break;
      }
      case Op::Add: {
        if (grad_flows(n.a)) {
          Tensor& ga = ensure(n.a);
          for (size_t i = 0; i < g.size(); ++i) ga.v[i] += g.v[i];
        }
        if (grad_flows(n.b)) {
          Tensor& gb = ensure(n.b);
          for (size_t i = 0; i < g.size(); ++i) gb.v[i] += g.v[i];
        }
        break;
      }
      case Op::Sub: {
        if (grad_flows(n.a)) {
          Tensor& ga = ensure(n.a);
          for (size_t i = 0; i < g.size(); ++i) ga.v[i] += g.v[i];
        }
        if (grad_flows(n.b)) {
          Tensor& gb = ensure(n.b);
          for (size_t i = 0; i < g.size(); ++i) gb.v[i] -= g.v[i];
        }
        break;
      }
      case Op::Mul: {
        const Tensor& va = nodes_[n.a].value;
        const Tensor& vb = nodes_[n.b].value;
        if (grad_flows(n.a)) {
          Tensor& ga = ensure(n.a);
          for (size_t i = 0; i < g.size(); ++i) ga.v[i] += g.v[i] * vb.v[i];
        }
        if (grad_flows(n.b)) {
          Tensor& gb = ensure(n.b);
          for (size_t i = 0; i < g.size(); ++i) gb.v[i] += g.v[i] * va.v[i];
        }
        break;
      }
      case Op::Scale: {
        Tensor& ga = ensure(n.a);
        for (size_t i = 0; i < g.size(); ++i) ga.v[i] += g.v[i] * n.scalar;
        break;
      }
      case Op::AddRow: {
        if (grad_flows(n.a)) {
          Tensor& ga = ensure(n.a);
          for (size_t i = 0; i < g.size(); ++i) ga.v[i] += g.v[i];
        }
        if (grad_flows(n.b)) {
          Tensor& gb = ensure(n.b);
          for (int c = 0; c < g.cols; ++c) {
            double acc = double(gb.v[c]);
            for (int r = 0; r < g.rows; ++r) acc += double(g.at(r, c));
            gb.v[c] = float(acc);
          }
        }
        break;
      }
      case Op::Sigmoid: {
        Tensor& ga = ensure(n.a);
        for (size_t i = 0; i < g.size(); ++i)
          ga.v[i] += g.v[i] * kernels::dsigmoidf(n.value.v[i]);
        break;
      }
      case Op::Tanh: {
        Tensor& ga = ensure(n.a);
        for (size_t i = 0; i < g.size(); ++i)
          ga.v[i] += g.v[i] * kernels::dtanhf(n.value.v[i]);
        break;
      }
      case Op::OneMinus: {
        Tensor& ga = ensure(n.a);
        for (size_t i = 0; i < g.size(); ++i) ga.v[i] -= g.v[i];
        break;
      }
      case Op::GatherRows: {
        Tensor& ga = ensure(n.a);
        // Rows may repeat; keep the row loop serial per column block.
        for (size_t i = 0; i < n.index.size(); ++i) {
          float* dst = ga.row(n.index[i]);
          const float* src = g.row(int(i));
          for (int c = 0; c < g.cols; ++c) dst[c] += src[c];
        }
        break;
      }
      case Op::RowNorms: {
        const Tensor& va = nodes_[n.a].value;
        Tensor& ga = ensure(n.a);
        for (int r = 0; r < va.rows; ++r) {
          float norm = n.value.v[r];
          float coeff = g.v[r] / (norm > 1e-12f ? norm : 1e-12f);
          const float* src = va.row(r);
          float* dst = ga.row(r);
          for (int c = 0; c < va.cols; ++c) dst[c] += coeff * src[c];
        }
        break;
      }
      case Op::DivElem: {
        const Tensor& va = nodes_[n.a].value;
        const Tensor& vb = nodes_[n.b].value;
        if (grad_flows(n.a)) {
          Tensor& ga = ensure(n.a);
          for (size_t i = 0; i < g.size(); ++i) ga.v[i] += g.v[i] / vb.v[i];
        }
        if (grad_flows(n.b)) {
          Tensor& gb = ensure(n.b);
          for (size_t i = 0; i < g.size(); ++i)
            gb.v[i] -= g.v[i] * va.v[i] / (vb.v[i] * vb.v[i]);
        }
        break;
      }
      case Op::ClampMin: {
        const Tensor& va = nodes_[n.a].value;
        Tensor& ga = ensure(n.a);
        for (size_t i = 0; i < g.size(); ++i) {
          if (va.v[i] > n.scalar) ga.v[i] += g.v[i];
        }
        break;
      }
      case Op::MeanAll: {
        const Tensor& va = nodes_[n.a].value;
        Tensor& ga = ensure(n.a);
        float coeff = g.v[0] / float(va.size());
        for (size_t i = 0; i < va.size(); ++i) ga.v[i] += coeff;
        break;
      }
      case Op::BlockCombine: {
        const Tensor& vd = nodes_[n.a].value;
        const Tensor& vw = nodes_[n.b].value;
        const int classes = vw.rows;
        const int k = vw.cols;
        if (grad_flows(n.a)) {
          Tensor& gd = ensure(n.a);
          for (int r = 0; r < vd.rows; ++r) {
            for (int c = 0; c < classes; ++c) {
              float gc = g.at(r, c);
              const float* wc = vw.row(c);
              float* dst = gd.row(r);
              for (int j = 0; j < k; ++j) dst[c * k + j] += gc * wc[j];
            }
          }
        }
        if (grad_flows(n.b)) {
          Tensor& gw = ensure(n.b);
          for (int c = 0; c < classes; ++c) {
            for (int j = 0; j < k; ++j) {
              double acc = double(gw.at(c, j));
              for (int r = 0; r < vd.rows; ++r)
                acc += double(g.at(r, c)) * double(vd.at(r, c * k + j));
              gw.at(c, j) = float(acc);
            }
          }
        }
        if (grad_flows(n.c)) {
          Tensor& gb = ensure(n.c);
          for (int c = 0; c < classes; ++c) {
            double acc = double(gb.v[c]);
            for (int r = 0; r < vd.rows; ++r) acc += double(g.at(r, c));
            gb.v[c] = float(acc);
          }
        }
        break;
      }
      case Op::SoftmaxXent: {
        const Tensor& vl = nodes_[n.a].value;
        Tensor& gl = ensure(n.a);
        const float scale = g.v[0] / float(vl.rows);
        for (int r = 0; r < vl.rows; ++r) {
          const float* row = vl.row(r);
          float mx = row[0];
          for (int c = 1; c < vl.cols; ++c) mx = std::max(mx, row[c]);
          double s = 0.0;
          for (int c = 0; c < vl.cols; ++c) s += std::exp(double(row[c] - mx));
          float* dst = gl.row(r);
          for (int c = 0; c < vl.cols; ++c) {
            float p = float(std::exp(double(row[c] - mx)) / s);
            dst[c] += scale * (p - (c == n.index[r] ? 1.0f : 0.0f));
          }
        }
        break;
      }
    }
  }

  for (size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].needs_grad || nodes_[i].op != Op::Leaf) {
      grad[i] = Tensor();
    } else if (!has[i]) {
      // Leaf never touched the loss: gradient is identically zero.
      grad[i] = Tensor(nodes_[i].value.rows, nodes_[i].value.cols);
    }
  }
  return grad;
}

}  // namespace rnnalg

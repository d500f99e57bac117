#include "stua/autodiff.hpp"

#include "stua/errors.hpp"

#include <string>

namespace stua::ad {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorKind::DimensionMismatch,
         std::string(op) + ": " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
             " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

}  // namespace

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size() - 1)};
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
    fail(ErrorKind::DimensionMismatch, "invalid tape variable");
  }
  return nodes_[static_cast<std::size_t>(v.id)];
}

Var Tape::constant(Matrix value) {
  Node n;
  n.op = Op::Constant;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::param(const Matrix& parameter) {
  if (auto it = params_.find(&parameter); it != params_.end()) return Var{it->second};
  Node n;
  n.op = Op::Param;
  n.value = parameter;
  n.requires_grad = true;
  Var v = push(std::move(n));
  params_.emplace(&parameter, v.id);
  return v;
}

const Matrix& Tape::value(Var v) const { return node(v).value; }

double Tape::scalar(Var v) const {
  const Matrix& m = value(v);
  if (m.size() != 1) fail(ErrorKind::DimensionMismatch, "scalar(): node is not 1x1");
  return m(0, 0);
}

Var Tape::matmul(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.value.cols() != nb.value.rows()) {
    fail(ErrorKind::DimensionMismatch,
         "matmul: " + std::to_string(na.value.rows()) + "x" + std::to_string(na.value.cols()) +
             " * " + std::to_string(nb.value.rows()) + "x" + std::to_string(nb.value.cols()));
  }
  Node n;
  n.op = Op::MatMul;
  n.a = a.id;
  n.b = b.id;
  n.value = na.value * nb.value;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  require_same_shape(na.value, nb.value, "add");
  Node n;
  n.op = Op::Add;
  n.a = a.id;
  n.b = b.id;
  n.value = na.value + nb.value;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  require_same_shape(na.value, nb.value, "sub");
  Node n;
  n.op = Op::Sub;
  n.a = a.id;
  n.b = b.id;
  n.value = na.value - nb.value;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  return push(std::move(n));
}

Var Tape::add_row(Var a, Var row) {
  const Node& na = node(a);
  const Node& nr = node(row);
  if (nr.value.rows() != 1 || nr.value.cols() != na.value.cols()) {
    fail(ErrorKind::DimensionMismatch, "add_row: row vector width mismatch");
  }
  Node n;
  n.op = Op::AddRow;
  n.a = a.id;
  n.b = row.id;
  n.value = na.value.rowwise() + nr.value.row(0);
  n.requires_grad = na.requires_grad || nr.requires_grad;
  return push(std::move(n));
}

Var Tape::hadamard(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  require_same_shape(na.value, nb.value, "hadamard");
  Node n;
  n.op = Op::Hadamard;
  n.a = a.id;
  n.b = b.id;
  n.value = na.value.cwiseProduct(nb.value);
  n.requires_grad = na.requires_grad || nb.requires_grad;
  return push(std::move(n));
}

Var Tape::scale(Var a, double s) {
  const Node& na = node(a);
  Node n;
  n.op = Op::Scale;
  n.a = a.id;
  n.factor = s;
  n.value = s * na.value;
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Tape::relu(Var a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::Relu;
  n.a = a.id;
  n.value = na.value.cwiseMax(0.0);
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Tape::tanh(Var a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::Tanh;
  n.a = a.id;
  n.value = na.value.array().tanh().matrix();
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Tape::sigmoid(Var a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::Sigmoid;
  n.a = a.id;
  n.value = (1.0 / (1.0 + (-na.value.array()).exp())).matrix();
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Tape::exp(Var a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::Exp;
  n.a = a.id;
  n.value = na.value.array().exp().matrix();
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Tape::transpose(Var a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::Transpose;
  n.a = a.id;
  n.value = na.value.transpose();
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Tape::concat_rows(std::span<const Var> parts) {
  if (parts.empty()) fail(ErrorKind::DimensionMismatch, "concat_rows: no inputs");
  const Eigen::Index cols = node(parts.front()).value.cols();
  Eigen::Index rows = 0;
  Node n;
  n.op = Op::ConcatRows;
  for (Var p : parts) {
    const Node& np = node(p);
    if (np.value.cols() != cols) fail(ErrorKind::DimensionMismatch, "concat_rows: column mismatch");
    rows += np.value.rows();
    n.inputs.push_back(p.id);
    n.requires_grad = n.requires_grad || np.requires_grad;
  }
  n.value.resize(rows, cols);
  Eigen::Index at = 0;
  for (Var p : parts) {
    const Matrix& v = node(p).value;
    n.value.middleRows(at, v.rows()) = v;
    at += v.rows();
  }
  return push(std::move(n));
}

Var Tape::concat_cols(std::span<const Var> parts) {
  if (parts.empty()) fail(ErrorKind::DimensionMismatch, "concat_cols: no inputs");
  const Eigen::Index rows = node(parts.front()).value.rows();
  Eigen::Index cols = 0;
  Node n;
  n.op = Op::ConcatCols;
  for (Var p : parts) {
    const Node& np = node(p);
    if (np.value.rows() != rows) fail(ErrorKind::DimensionMismatch, "concat_cols: row mismatch");
    cols += np.value.cols();
    n.inputs.push_back(p.id);
    n.requires_grad = n.requires_grad || np.requires_grad;
  }
  n.value.resize(rows, cols);
  Eigen::Index at = 0;
  for (Var p : parts) {
    const Matrix& v = node(p).value;
    n.value.middleCols(at, v.cols()) = v;
    at += v.cols();
  }
  return push(std::move(n));
}

Var Tape::slice_rows(Var a, Eigen::Index start, Eigen::Index count) {
  const Node& na = node(a);
  if (start < 0 || count < 0 || start + count > na.value.rows()) {
    fail(ErrorKind::DimensionMismatch, "slice_rows out of range");
  }
  Node n;
  n.op = Op::SliceRows;
  n.a = a.id;
  n.start = start;
  n.value = na.value.middleRows(start, count);
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Tape::slice_cols(Var a, Eigen::Index start, Eigen::Index count) {
  const Node& na = node(a);
  if (start < 0 || count < 0 || start + count > na.value.cols()) {
    fail(ErrorKind::DimensionMismatch, "slice_cols out of range");
  }
  Node n;
  n.op = Op::SliceCols;
  n.a = a.id;
  n.start = start;
  n.value = na.value.middleCols(start, count);
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Tape::row_dot(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  require_same_shape(na.value, nb.value, "row_dot");
  Node n;
  n.op = Op::RowDot;
  n.a = a.id;
  n.b = b.id;
  n.value = na.value.cwiseProduct(nb.value).rowwise().sum();
  n.requires_grad = na.requires_grad || nb.requires_grad;
  return push(std::move(n));
}

Var Tape::sum(Var a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::Sum;
  n.a = a.id;
  n.value = Matrix::Constant(1, 1, na.value.sum());
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Var Tape::sum_squares(Var a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::SumSquares;
  n.a = a.id;
  n.value = Matrix::Constant(1, 1, na.value.squaredNorm());
  n.requires_grad = na.requires_grad;
  return push(std::move(n));
}

Matrix& Tape::grad_buffer(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var root) {
  const Node& r = node(root);
  if (r.value.size() != 1) fail(ErrorKind::DimensionMismatch, "backward: root must be 1x1");
  for (Node& n : nodes_) n.grad.resize(0, 0);
  grad_buffer(root.id)(0, 0) = 1.0;

  for (int id = root.id; id >= 0; --id) {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.requires_grad || n.grad.size() == 0) continue;
    propagate(n, n.grad);
  }
}

void Tape::propagate(const Node& n, const Matrix& g) {
  auto wants = [this](int id) { return id >= 0 && nodes_[static_cast<std::size_t>(id)].requires_grad; };
  auto value_of = [this](int id) -> const Matrix& { return nodes_[static_cast<std::size_t>(id)].value; };

  switch (n.op) {
    case Op::Constant:
    case Op::Param:
      return;
    case Op::MatMul:
      if (wants(n.a)) grad_buffer(n.a).noalias() += g * value_of(n.b).transpose();
      if (wants(n.b)) grad_buffer(n.b).noalias() += value_of(n.a).transpose() * g;
      return;
    case Op::Add:
      if (wants(n.a)) grad_buffer(n.a) += g;
      if (wants(n.b)) grad_buffer(n.b) += g;
      return;
    case Op::Sub:
      if (wants(n.a)) grad_buffer(n.a) += g;
      if (wants(n.b)) grad_buffer(n.b) -= g;
      return;
    case Op::AddRow:
      if (wants(n.a)) grad_buffer(n.a) += g;
      if (wants(n.b)) grad_buffer(n.b) += g.colwise().sum();
      return;
    case Op::Hadamard:
      if (wants(n.a)) grad_buffer(n.a) += g.cwiseProduct(value_of(n.b));
      if (wants(n.b)) grad_buffer(n.b) += g.cwiseProduct(value_of(n.a));
      return;
    case Op::Scale:
      if (wants(n.a)) grad_buffer(n.a) += n.factor * g;
      return;
    case Op::Relu:
      if (wants(n.a)) {
        grad_buffer(n.a) += (value_of(n.a).array() > 0.0).select(g.array(), 0.0).matrix();
      }
      return;
    case Op::Tanh:
      if (wants(n.a)) grad_buffer(n.a) += (g.array() * (1.0 - n.value.array().square())).matrix();
      return;
    case Op::Sigmoid:
      if (wants(n.a)) {
        grad_buffer(n.a) += (g.array() * n.value.array() * (1.0 - n.value.array())).matrix();
      }
      return;
    case Op::Exp:
      if (wants(n.a)) grad_buffer(n.a) += g.cwiseProduct(n.value);
      return;
    case Op::Transpose:
      if (wants(n.a)) grad_buffer(n.a) += g.transpose();
      return;
    case Op::ConcatRows: {
      Eigen::Index at = 0;
      for (int id : n.inputs) {
        const Eigen::Index rows = value_of(id).rows();
        if (wants(id)) grad_buffer(id) += g.middleRows(at, rows);
        at += rows;
      }
      return;
    }
    case Op::ConcatCols: {
      Eigen::Index at = 0;
      for (int id : n.inputs) {
        const Eigen::Index cols = value_of(id).cols();
        if (wants(id)) grad_buffer(id) += g.middleCols(at, cols);
        at += cols;
      }
      return;
    }
    case Op::SliceRows:
      if (wants(n.a)) grad_buffer(n.a).middleRows(n.start, n.value.rows()) += g;
      return;
    case Op::SliceCols:
      if (wants(n.a)) grad_buffer(n.a).middleCols(n.start, n.value.cols()) += g;
      return;
    case Op::RowDot:
      if (wants(n.a)) grad_buffer(n.a) += (value_of(n.b).array().colwise() * g.col(0).array()).matrix();
      if (wants(n.b)) grad_buffer(n.b) += (value_of(n.a).array().colwise() * g.col(0).array()).matrix();
      return;
    case Op::Sum:
      if (wants(n.a)) grad_buffer(n.a).array() += g(0, 0);
      return;
    case Op::SumSquares:
      if (wants(n.a)) grad_buffer(n.a) += 2.0 * g(0, 0) * value_of(n.a);
      return;
  }
}

const Matrix* Tape::gradient(const Matrix& parameter) const {
  auto it = params_.find(&parameter);
  if (it == params_.end()) return nullptr;
  const Node& n = nodes_[static_cast<std::size_t>(it->second)];
  return n.grad.size() == 0 ? nullptr : &n.grad;
}

const Matrix& Tape::grad(Var v) const { return node(v).grad; }

}  // namespace stua::ad

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <deque>
#include <span>
#include <unordered_map>
#include <vector>

namespace stua {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace ad {

/// Handle to a node on a Tape. Only meaningful together with its tape.
struct Var {
  int id = -1;
  bool valid() const noexcept { return id >= 0; }
};

/// Reverse-mode differentiation tape over dense matrices.
///
/// Every operation appends a node holding its forward value. `backward`
/// walks the nodes in reverse and accumulates adjoints. Parameters are bound
/// by address, so a matrix used at several places of the graph maps to one
/// node and its gradient is the sum over all uses.
///
/// A tape is single-use and not thread-safe; build one per sample.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var param(const Matrix& parameter);

  const Matrix& value(Var v) const;
  double scalar(Var v) const;

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  /// a (r x c) plus row vector b (1 x c) broadcast over rows.
  Var add_row(Var a, Var row);
  Var hadamard(Var a, Var b);
  Var scale(Var a, double s);
  Var relu(Var a);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var exp(Var a);
  Var transpose(Var a);
  Var concat_rows(std::span<const Var> parts);
  Var concat_cols(std::span<const Var> parts);
  Var slice_rows(Var a, Eigen::Index start, Eigen::Index count);
  Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);
  /// Row-wise inner product of two equally shaped matrices, r x 1.
  Var row_dot(Var a, Var b);
  Var sum(Var a);
  Var sum_squares(Var a);

  /// Seeds d(root)/d(root) = 1; root must be 1 x 1.
  void backward(Var root);

  /// Gradient of the last backward root with respect to a bound parameter,
  /// or nullptr when the parameter did not take part in the graph.
  const Matrix* gradient(const Matrix& parameter) const;
  const Matrix& grad(Var v) const;

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  enum class Op : std::uint8_t {
    Constant,
    Param,
    MatMul,
    Add,
    Sub,
    AddRow,
    Hadamard,
    Scale,
    Relu,
    Tanh,
    Sigmoid,
    Exp,
    Transpose,
    ConcatRows,
    ConcatCols,
    SliceRows,
    SliceCols,
    RowDot,
    Sum,
    SumSquares,
  };

  struct Node {
    Op op = Op::Constant;
    int a = -1;
    int b = -1;
    std::vector<int> inputs;
    double factor = 0.0;
    Eigen::Index start = 0;
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
  };

  Var push(Node node);
  const Node& node(Var v) const;
  Matrix& grad_buffer(int id);
  void propagate(const Node& n, const Matrix& g);

  std::deque<Node> nodes_;
  std::unordered_map<const Matrix*, int> params_;
};

}  // namespace ad
}  // namespace stua

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "codeseq/random.hpp"

namespace codeseq::nn {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Parameter {
  std::string name;
  Mat value;
  Mat grad;
  bool decay = true;  // AdamW weight decay applies

  std::size_t size() const { return static_cast<std::size_t>(value.size()); }
};

// Reverse-mode tape over row-major matrices. Variables are indices; parameter
// gradients are accumulated straight into Parameter::grad.
class Tape {
 public:
  using Var = int;

  explicit Tape(bool record = true) : record_(record) {}

  bool recording() const { return record_; }
  Var constant(Mat value);
  const Mat& value(Var v) const { return nodes_[static_cast<std::size_t>(v)].value; }
  Mat& grad(Var v);
  double scalar(Var v) const { return value(v)(0, 0); }

  // Seeds d(loss)/d(loss) = 1 and runs the recorded closures in reverse.
  void backward(Var loss);

  // Records a node; `backward(self)` runs when the node's gradient is needed.
  Var push(Mat value, std::function<void(Var)> backward = {});

 private:
  struct Node {
    Mat value;
    Mat grad;
    std::function<void(Var)> backward;
  };
  bool record_;
  std::vector<Node> nodes_;
};

using Var = Tape::Var;

// Rows of `table` for ids plus rows 0..n-1 of `positions`.
Var embed(Tape& t, const std::vector<int>& ids, Parameter& table, Parameter& positions);
Var linear(Tape& t, Var x, Parameter& w, Parameter& b);  // x W + b
Var add(Tape& t, Var a, Var b);
Var scale(Tape& t, Var x, double s);
Var layer_norm(Tape& t, Var x, Parameter& gamma, Parameter& beta);
Var gelu(Tape& t, Var x);
Var tanh(Tape& t, Var x);
// Inverted dropout; identity when rng is null or p is 0.
Var dropout(Tape& t, Var x, double p, Rng* rng);

// Scaled dot-product attention over `heads` column groups. key_valid masks
// keys (PAD); rows with no visible key produce zeros.
Var attention(Tape& t, Var q, Var k, Var v, int heads, bool causal,
              const std::vector<char>& key_valid);

// h E^T + bias: output projection tied to the embedding table.
Var tied_logits(Tape& t, Var h, Parameter& table, Parameter& bias);

// weight * sum over rows with target != ignore of -log softmax(row)[target].
Var cross_entropy(Tape& t, Var logits, const std::vector<int>& targets, int ignore, double weight);

Var row(Tape& t, Var x, int index);

// weight * max(0, margin - cos(c, q) + cos(c, n)); throws MathError on a
// zero vector.
Var search_hinge(Tape& t, Var c, Var q, Var n, double margin, double weight);

}  // namespace codeseq::nn

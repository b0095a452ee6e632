#include "codeseq/autograd.hpp"

#include <cmath>
#include <limits>

#include "codeseq/error.hpp"

namespace codeseq::nn {

Var Tape::constant(Mat value) { return push(std::move(value)); }

Mat& Tape::grad(Var v) {
  Node& n = nodes_[static_cast<std::size_t>(v)];
  if (n.grad.size() == 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Var Tape::push(Mat value, std::function<void(Var)> backward) {
  nodes_.push_back({std::move(value), Mat(), record_ ? std::move(backward) : std::function<void(Var)>()});
  return static_cast<Var>(nodes_.size() - 1);
}

void Tape::backward(Var loss) {
  grad(loss).setOnes();
  for (auto i = static_cast<std::size_t>(loss) + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad.size() != 0 && n.backward) n.backward(static_cast<Var>(i));
  }
}

Var embed(Tape& t, const std::vector<int>& ids, Parameter& table, Parameter& positions) {
  const auto n = static_cast<Eigen::Index>(ids.size());
  if (n > positions.value.rows()) {
    throw LengthError("sequence of " + std::to_string(n) + " exceeds " +
                      std::to_string(positions.value.rows()) + " positions");
  }
  Mat out(n, table.value.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const int id = ids[static_cast<std::size_t>(i)];
    if (id < 0 || id >= table.value.rows()) {
      throw ArgumentError("token id " + std::to_string(id) + " outside the embedding table");
    }
    out.row(i) = table.value.row(id) + positions.value.row(i);
  }
  return t.push(std::move(out), [&t, &table, &positions, ids](Var y) {
    const Mat& g = t.grad(y);
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      table.grad.row(ids[static_cast<std::size_t>(i)]) += g.row(i);
      positions.grad.row(i) += g.row(i);
    }
  });
}

Var linear(Tape& t, Var x, Parameter& w, Parameter& b) {
  Mat out = t.value(x) * w.value;
  out.rowwise() += b.value.row(0);
  return t.push(std::move(out), [&t, &w, &b, x](Var y) {
    const Mat& g = t.grad(y);
    w.grad.noalias() += t.value(x).transpose() * g;
    b.grad.row(0) += g.colwise().sum();
    t.grad(x).noalias() += g * w.value.transpose();
  });
}

Var add(Tape& t, Var a, Var b) {
  return t.push(t.value(a) + t.value(b), [&t, a, b](Var y) {
    t.grad(a) += t.grad(y);
    t.grad(b) += t.grad(y);
  });
}

Var scale(Tape& t, Var x, double s) {
  return t.push(t.value(x) * s, [&t, x, s](Var y) { t.grad(x) += t.grad(y) * s; });
}

Var layer_norm(Tape& t, Var x, Parameter& gamma, Parameter& beta) {
  constexpr double kEps = 1e-5;
  const Mat& xv = t.value(x);
  const Eigen::Index d = xv.cols();
  Mat xhat(xv.rows(), d);
  Eigen::VectorXd inv_std(xv.rows());
  for (Eigen::Index i = 0; i < xv.rows(); ++i) {
    const double mean = xv.row(i).mean();
    const double var = (xv.row(i).array() - mean).square().mean();
    inv_std(i) = 1.0 / std::sqrt(var + kEps);
    xhat.row(i) = (xv.row(i).array() - mean) * inv_std(i);
  }
  Mat out = (xhat.array().rowwise() * gamma.value.row(0).array()).matrix();
  out.rowwise() += beta.value.row(0);
  return t.push(std::move(out), [&t, &gamma, &beta, x, xhat = std::move(xhat),
                                 inv_std = std::move(inv_std)](Var y) {
    const Mat& g = t.grad(y);
    gamma.grad.row(0) += (g.array() * xhat.array()).colwise().sum().matrix();
    beta.grad.row(0) += g.colwise().sum();
    const Mat gx = (g.array().rowwise() * gamma.value.row(0).array()).matrix();
    Mat& dx = t.grad(x);
    const double d = static_cast<double>(gx.cols());
    for (Eigen::Index i = 0; i < gx.rows(); ++i) {
      const double mean_g = gx.row(i).mean();
      const double mean_gx = gx.row(i).dot(xhat.row(i)) / d;
      dx.row(i).array() +=
          inv_std(i) * (gx.row(i).array() - mean_g - xhat.row(i).array() * mean_gx);
    }
  });
}

Var gelu(Tape& t, Var x) {
  const Mat& xv = t.value(x);
  const Mat cdf = xv.unaryExpr([](double v) { return 0.5 * (1.0 + std::erf(v * M_SQRT1_2)); });
  Mat out = (xv.array() * cdf.array()).matrix();
  return t.push(std::move(out), [&t, x, cdf](Var y) {
    const Mat& xv = t.value(x);
    const Mat pdf = xv.unaryExpr([](double v) { return std::exp(-0.5 * v * v) * 0.5 * M_2_SQRTPI * M_SQRT1_2; });
    t.grad(x).array() += t.grad(y).array() * (cdf.array() + xv.array() * pdf.array());
  });
}

Var tanh(Tape& t, Var x) {
  Mat out = t.value(x).array().tanh().matrix();
  return t.push(std::move(out), [&t, x](Var y) {
    const Mat& yv = t.value(y);
    t.grad(x).array() += t.grad(y).array() * (1.0 - yv.array().square());
  });
}

Var dropout(Tape& t, Var x, double p, Rng* rng) {
  if (rng == nullptr || p <= 0.0) return x;
  const Mat& xv = t.value(x);
  Mat mask(xv.rows(), xv.cols());
  const double keep = 1.0 / (1.0 - p);
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = rng->uniform() < p ? 0.0 : keep;
  Mat out = (xv.array() * mask.array()).matrix();
  return t.push(std::move(out), [&t, x, mask = std::move(mask)](Var y) {
    t.grad(x).array() += t.grad(y).array() * mask.array();
  });
}

Var attention(Tape& t, Var q, Var k, Var v, int heads, bool causal,
              const std::vector<char>& key_valid) {
  const Mat& qv = t.value(q);
  const Mat& kv = t.value(k);
  const Mat& vv = t.value(v);
  const Eigen::Index n = qv.rows();
  const Eigen::Index m = kv.rows();
  const Eigen::Index d = qv.cols();
  const Eigen::Index dk = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));

  std::vector<Mat> probs(static_cast<std::size_t>(heads));
  Mat out = Mat::Zero(n, d);
  for (int h = 0; h < heads; ++h) {
    const auto qh = qv.middleCols(h * dk, dk);
    const auto kh = kv.middleCols(h * dk, dk);
    const auto vh = vv.middleCols(h * dk, dk);
    Mat s = (qh * kh.transpose()) * scale;
    for (Eigen::Index i = 0; i < n; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < m; ++j) {
        const bool visible = key_valid[static_cast<std::size_t>(j)] != 0 && (!causal || j <= i);
        if (!visible) {
          s(i, j) = -std::numeric_limits<double>::infinity();
        } else if (s(i, j) > mx) {
          mx = s(i, j);
        }
      }
      if (mx == -std::numeric_limits<double>::infinity()) {
        s.row(i).setZero();
        continue;
      }
      double sum = 0.0;
      for (Eigen::Index j = 0; j < m; ++j) {
        const double e = std::isinf(s(i, j)) ? 0.0 : std::exp(s(i, j) - mx);
        s(i, j) = e;
        sum += e;
      }
      s.row(i) /= sum;
    }
    out.middleCols(h * dk, dk).noalias() = s * vh;
    probs[static_cast<std::size_t>(h)] = std::move(s);
  }
  return t.push(std::move(out), [&t, q, k, v, heads, dk, scale, probs = std::move(probs)](Var y) {
    const Mat& g = t.grad(y);
    const Mat& qv = t.value(q);
    const Mat& kv = t.value(k);
    const Mat& vv = t.value(v);
    Mat& dq = t.grad(q);
    Mat& dkm = t.grad(k);
    Mat& dv = t.grad(v);
    for (int h = 0; h < heads; ++h) {
      const Mat& p = probs[static_cast<std::size_t>(h)];
      const auto gh = g.middleCols(h * dk, dk);
      dv.middleCols(h * dk, dk).noalias() += p.transpose() * gh;
      const Mat dp = gh * vv.middleCols(h * dk, dk).transpose();
      const Eigen::VectorXd rowdot = (dp.array() * p.array()).rowwise().sum();
      const Mat ds = ((dp.colwise() - rowdot).array() * p.array()).matrix() * scale;
      dq.middleCols(h * dk, dk).noalias() += ds * kv.middleCols(h * dk, dk);
      dkm.middleCols(h * dk, dk).noalias() += ds.transpose() * qv.middleCols(h * dk, dk);
    }
  });
}

Var tied_logits(Tape& t, Var h, Parameter& table, Parameter& bias) {
  Mat out = t.value(h) * table.value.transpose();
  out.rowwise() += bias.value.row(0);
  return t.push(std::move(out), [&t, &table, &bias, h](Var y) {
    const Mat& g = t.grad(y);
    table.grad.noalias() += g.transpose() * t.value(h);
    bias.grad.row(0) += g.colwise().sum();
    t.grad(h).noalias() += g * table.value;
  });
}

Var cross_entropy(Tape& t, Var logits, const std::vector<int>& targets, int ignore, double weight) {
  const Mat& lv = t.value(logits);
  Mat probs(lv.rows(), lv.cols());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < lv.rows(); ++i) {
    const double mx = lv.row(i).maxCoeff();
    probs.row(i) = (lv.row(i).array() - mx).exp().matrix();
    const double sum = probs.row(i).sum();
    probs.row(i) /= sum;
    const int target = targets[static_cast<std::size_t>(i)];
    if (target == ignore) continue;
    loss -= (lv(i, target) - mx - std::log(sum)) * weight;
  }
  Mat out(1, 1);
  out(0, 0) = loss;
  return t.push(std::move(out), [&t, logits, targets, ignore, weight, probs = std::move(probs)](Var y) {
    const double g = t.grad(y)(0, 0) * weight;
    Mat& dl = t.grad(logits);
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
      const int target = targets[static_cast<std::size_t>(i)];
      if (target == ignore) continue;
      dl.row(i) += probs.row(i) * g;
      dl(i, target) -= g;
    }
  });
}

Var row(Tape& t, Var x, int index) {
  Mat out = t.value(x).row(index);
  return t.push(std::move(out), [&t, x, index](Var y) { t.grad(x).row(index) += t.grad(y).row(0); });
}

Var search_hinge(Tape& t, Var c, Var q, Var n, double margin, double weight) {
  const Eigen::RowVectorXd cv = t.value(c).row(0);
  const Eigen::RowVectorXd qv = t.value(q).row(0);
  const Eigen::RowVectorXd nv = t.value(n).row(0);
  const double nc = cv.norm();
  const double nq = qv.norm();
  const double nn = nv.norm();
  if (nc == 0.0 || nq == 0.0 || nn == 0.0) throw MathError("cosine similarity of a zero vector");
  const double cos_q = cv.dot(qv) / (nc * nq);
  const double cos_n = cv.dot(nv) / (nc * nn);
  const double hinge = margin - cos_q + cos_n;
  Mat out(1, 1);
  out(0, 0) = weight * std::max(0.0, hinge);
  return t.push(std::move(out), [&t, c, q, n, weight, hinge, cv, qv, nv, nc, nq, nn, cos_q, cos_n](Var y) {
    if (hinge <= 0.0) return;
    const double g = t.grad(y)(0, 0) * weight;
    // d cos(a, b) / d a = b / (|a||b|) - cos * a / |a|^2
    const Eigen::RowVectorXd dcq_dc = qv / (nc * nq) - cos_q * cv / (nc * nc);
    const Eigen::RowVectorXd dcq_dq = cv / (nc * nq) - cos_q * qv / (nq * nq);
    const Eigen::RowVectorXd dcn_dc = nv / (nc * nn) - cos_n * cv / (nc * nc);
    const Eigen::RowVectorXd dcn_dn = cv / (nc * nn) - cos_n * nv / (nn * nn);
    t.grad(c).row(0) += g * (dcn_dc - dcq_dc);
    t.grad(q).row(0) -= g * dcq_dq;
    t.grad(n).row(0) += g * dcn_dn;
  });
}

}  // namespace codeseq::nn

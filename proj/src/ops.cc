// src/ops.cc

// Copyright 2026  MTJR authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "mtjr/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "mtjr/error.h"

namespace mtjr {

namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

ConstMatrixMap AsMatrix(std::span<const double> v, int32_t rows,
                        int32_t cols) {
  return ConstMatrixMap(v.data(), rows, cols);
}
MatrixMap AsMatrix(std::span<double> v, int32_t rows, int32_t cols) {
  return MatrixMap(v.data(), rows, cols);
}

void Require2D(const Tensor &t, const char *op) {
  if (t.NumDims() != 2)
    throw Error(ErrorCode::kShapeMismatch,
                std::string(op) + " expects a 2-D tensor, got " +
                    ShapeToString(t.shape()));
}

void RequireSameShape(const Tensor &a, const Tensor &b, const char *op) {
  if (a.shape() != b.shape())
    throw Error(ErrorCode::kShapeMismatch,
                std::string(op) + ": " + ShapeToString(a.shape()) + " vs " +
                    ShapeToString(b.shape()));
}

// Accumulate `delta` into t's gradient when t participates in backprop.
void AccumulateGrad(const Tensor &t, std::span<const double> delta) {
  if (!t.RequiresGrad()) return;
  auto g = t.MutableGrad();
  for (size_t i = 0; i < g.size(); ++i) g[i] += delta[i];
}

}  // namespace

Tensor MatMul(Tape &tape, const Tensor &a, const Tensor &b,
              MatrixTransposeType trans_a, MatrixTransposeType trans_b) {
  Require2D(a, "MatMul");
  Require2D(b, "MatMul");
  const int32_t m = trans_a == kTrans ? a.Dim(1) : a.Dim(0);
  const int32_t k = trans_a == kTrans ? a.Dim(0) : a.Dim(1);
  const int32_t kb = trans_b == kTrans ? b.Dim(1) : b.Dim(0);
  const int32_t n = trans_b == kTrans ? b.Dim(0) : b.Dim(1);
  if (k != kb)
    throw Error(ErrorCode::kShapeMismatch,
                "MatMul inner dimensions " + ShapeToString(a.shape()) + " . " +
                    ShapeToString(b.shape()));
  Tensor out = Tensor::Zeros({m, n});
  auto A = AsMatrix(a.Values(), a.Dim(0), a.Dim(1));
  auto B = AsMatrix(b.Values(), b.Dim(0), b.Dim(1));
  auto C = AsMatrix(out.Values(), m, n);
  if (trans_a == kNoTrans && trans_b == kNoTrans) C.noalias() = A * B;
  else if (trans_a == kNoTrans) C.noalias() = A * B.transpose();
  else if (trans_b == kNoTrans) C.noalias() = A.transpose() * B;
  else C.noalias() = A.transpose() * B.transpose();

  if (tape.ShouldRecord({&a, &b})) {
    tape.Record(out, [a, b, out, trans_a, trans_b]() mutable {
      auto dC = AsMatrix(out.Grad(), out.Dim(0), out.Dim(1));
      auto A = AsMatrix(a.Values(), a.Dim(0), a.Dim(1));
      auto B = AsMatrix(b.Values(), b.Dim(0), b.Dim(1));
      if (a.RequiresGrad()) {
        auto dA = AsMatrix(a.MutableGrad(), a.Dim(0), a.Dim(1));
        // op(A) = C-side factor; d op(A) = dC . op(B)^T.
        if (trans_a == kNoTrans) {
          if (trans_b == kNoTrans) dA.noalias() += dC * B.transpose();
          else dA.noalias() += dC * B;
        } else {
          if (trans_b == kNoTrans) dA.noalias() += B * dC.transpose();
          else dA.noalias() += B.transpose() * dC.transpose();
        }
      }
      if (b.RequiresGrad()) {
        auto dB = AsMatrix(b.MutableGrad(), b.Dim(0), b.Dim(1));
        if (trans_b == kNoTrans) {
          if (trans_a == kNoTrans) dB.noalias() += A.transpose() * dC;
          else dB.noalias() += A * dC;
        } else {
          if (trans_a == kNoTrans) dB.noalias() += dC.transpose() * A;
          else dB.noalias() += dC.transpose() * A.transpose();
        }
      }
    });
  }
  return out;
}

Tensor Add(Tape &tape, const Tensor &a, const Tensor &b) {
  RequireSameShape(a, b, "Add");
  std::vector<double> v(a.Size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = a.Value(i) + b.Value(i);
  Tensor out(a.shape(), std::move(v));
  if (tape.ShouldRecord({&a, &b})) {
    tape.Record(out, [a, b, out]() mutable {
      AccumulateGrad(a, out.Grad());
      AccumulateGrad(b, out.Grad());
    });
  }
  return out;
}

Tensor Mul(Tape &tape, const Tensor &a, const Tensor &b) {
  RequireSameShape(a, b, "Mul");
  std::vector<double> v(a.Size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = a.Value(i) * b.Value(i);
  Tensor out(a.shape(), std::move(v));
  if (tape.ShouldRecord({&a, &b})) {
    tape.Record(out, [a, b, out]() mutable {
      auto g = out.Grad();
      if (a.RequiresGrad()) {
        auto ga = a.MutableGrad();
        for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * b.Value(i);
      }
      if (b.RequiresGrad()) {
        auto gb = b.MutableGrad();
        for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * a.Value(i);
      }
    });
  }
  return out;
}

Tensor Scale(Tape &tape, const Tensor &x, double alpha) {
  std::vector<double> v(x.Size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = alpha * x.Value(i);
  Tensor out(x.shape(), std::move(v));
  if (tape.ShouldRecord({&x})) {
    tape.Record(out, [x, out, alpha]() mutable {
      auto g = out.Grad();
      auto gx = x.MutableGrad();
      for (size_t i = 0; i < g.size(); ++i) gx[i] += alpha * g[i];
    });
  }
  return out;
}

Tensor AddBias(Tape &tape, const Tensor &x, const Tensor &bias) {
  const int32_t rows = x.NumRows(), cols = x.NumCols();
  if (static_cast<int32_t>(bias.Size()) != cols)
    throw Error(ErrorCode::kShapeMismatch,
                "AddBias: bias " + ShapeToString(bias.shape()) + " for " +
                    ShapeToString(x.shape()));
  std::vector<double> v(x.Values().begin(), x.Values().end());
  for (int32_t r = 0; r < rows; ++r)
    for (int32_t c = 0; c < cols; ++c)
      v[static_cast<size_t>(r) * cols + c] += bias.Value(c);
  Tensor out(x.shape(), std::move(v));
  if (tape.ShouldRecord({&x, &bias})) {
    tape.Record(out, [x, bias, out, rows, cols]() mutable {
      auto g = out.Grad();
      AccumulateGrad(x, g);
      if (bias.RequiresGrad()) {
        auto gb = bias.MutableGrad();
        for (int32_t r = 0; r < rows; ++r)
          for (int32_t c = 0; c < cols; ++c)
            gb[c] += g[static_cast<size_t>(r) * cols + c];
      }
    });
  }
  return out;
}

Tensor Linear(Tape &tape, const Tensor &x, const Tensor &weight,
              const Tensor &bias) {
  return AddBias(tape, MatMul(tape, x, weight), bias);
}

Tensor Relu(Tape &tape, const Tensor &x) {
  std::vector<double> v(x.Size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = std::max(0.0, x.Value(i));
  Tensor out(x.shape(), std::move(v));
  if (tape.ShouldRecord({&x})) {
    tape.Record(out, [x, out]() mutable {
      auto g = out.Grad();
      auto gx = x.MutableGrad();
      for (size_t i = 0; i < g.size(); ++i)
        if (x.Value(i) > 0.0) gx[i] += g[i];
    });
  }
  return out;
}

namespace {

Tensor SoftmaxImpl(Tape &tape, const Tensor &x, std::span<const uint8_t> keep) {
  const int32_t rows = x.NumRows(), cols = x.NumCols();
  if (cols < 1) throw Error(ErrorCode::kShapeMismatch, "softmax over empty axis");
  const bool masked = !keep.empty();
  if (masked && keep.size() != x.Size())
    throw Error(ErrorCode::kShapeMismatch, "softmax mask size");
  std::vector<double> v(x.Size(), 0.0);
  for (int32_t r = 0; r < rows; ++r) {
    const size_t base = static_cast<size_t>(r) * cols;
    double mx = -std::numeric_limits<double>::infinity();
    for (int32_t c = 0; c < cols; ++c)
      if (!masked || keep[base + c]) mx = std::max(mx, x.Value(base + c));
    if (mx == -std::numeric_limits<double>::infinity()) continue;
    double sum = 0.0;
    for (int32_t c = 0; c < cols; ++c) {
      if (masked && !keep[base + c]) continue;
      v[base + c] = std::exp(x.Value(base + c) - mx);
      sum += v[base + c];
    }
    for (int32_t c = 0; c < cols; ++c) v[base + c] /= sum;
  }
  Tensor out(x.shape(), std::move(v));
  if (tape.ShouldRecord({&x})) {
    tape.Record(out, [x, out, rows, cols]() mutable {
      auto g = out.Grad();
      auto y = out.Values();
      auto gx = x.MutableGrad();
      for (int32_t r = 0; r < rows; ++r) {
        const size_t base = static_cast<size_t>(r) * cols;
        double dot = 0.0;
        for (int32_t c = 0; c < cols; ++c) dot += g[base + c] * y[base + c];
        // Masked entries have y == 0 and so get no gradient.
        for (int32_t c = 0; c < cols; ++c)
          gx[base + c] += y[base + c] * (g[base + c] - dot);
      }
    });
  }
  return out;
}

}  // namespace

Tensor Softmax(Tape &tape, const Tensor &x) { return SoftmaxImpl(tape, x, {}); }

Tensor MaskedSoftmax(Tape &tape, const Tensor &x,
                     std::span<const uint8_t> keep) {
  if (keep.empty() && x.Size() != 0)
    throw Error(ErrorCode::kShapeMismatch, "empty softmax mask");
  return SoftmaxImpl(tape, x, keep);
}

Tensor LogSoftmax(Tape &tape, const Tensor &x) {
  const int32_t rows = x.NumRows(), cols = x.NumCols();
  if (cols < 1) throw Error(ErrorCode::kShapeMismatch, "log-softmax over empty axis");
  std::vector<double> v(x.Size());
  for (int32_t r = 0; r < rows; ++r) {
    const size_t base = static_cast<size_t>(r) * cols;
    double mx = x.Value(base);
    for (int32_t c = 1; c < cols; ++c) mx = std::max(mx, x.Value(base + c));
    double sum = 0.0;
    for (int32_t c = 0; c < cols; ++c) sum += std::exp(x.Value(base + c) - mx);
    const double log_z = mx + std::log(sum);
    for (int32_t c = 0; c < cols; ++c) v[base + c] = x.Value(base + c) - log_z;
  }
  Tensor out(x.shape(), std::move(v));
  if (tape.ShouldRecord({&x})) {
    tape.Record(out, [x, out, rows, cols]() mutable {
      auto g = out.Grad();
      auto y = out.Values();
      auto gx = x.MutableGrad();
      for (int32_t r = 0; r < rows; ++r) {
        const size_t base = static_cast<size_t>(r) * cols;
        double gsum = 0.0;
        for (int32_t c = 0; c < cols; ++c) gsum += g[base + c];
        for (int32_t c = 0; c < cols; ++c)
          gx[base + c] += g[base + c] - std::exp(y[base + c]) * gsum;
      }
    });
  }
  return out;
}

Tensor LayerNorm(Tape &tape, const Tensor &x, const Tensor &gain,
                 const Tensor &bias, double eps) {
  const int32_t rows = x.NumRows(), cols = x.NumCols();
  if (static_cast<int32_t>(gain.Size()) != cols ||
      static_cast<int32_t>(bias.Size()) != cols)
    throw Error(ErrorCode::kShapeMismatch, "LayerNorm gain/bias size");
  // Keep normalized values and inverse deviations for the backward pass.
  auto xhat = std::make_shared<std::vector<double>>(x.Size());
  auto rstd = std::make_shared<std::vector<double>>(rows);
  std::vector<double> v(x.Size());
  for (int32_t r = 0; r < rows; ++r) {
    const size_t base = static_cast<size_t>(r) * cols;
    double mean = 0.0;
    for (int32_t c = 0; c < cols; ++c) mean += x.Value(base + c);
    mean /= cols;
    double var = 0.0;
    for (int32_t c = 0; c < cols; ++c) {
      double d = x.Value(base + c) - mean;
      var += d * d;
    }
    var /= cols;
    const double inv = 1.0 / std::sqrt(var + eps);
    (*rstd)[r] = inv;
    for (int32_t c = 0; c < cols; ++c) {
      double h = (x.Value(base + c) - mean) * inv;
      (*xhat)[base + c] = h;
      v[base + c] = h * gain.Value(c) + bias.Value(c);
    }
  }
  Tensor out(x.shape(), std::move(v));
  if (tape.ShouldRecord({&x, &gain, &bias})) {
    tape.Record(out, [x, gain, bias, out, xhat, rstd, rows, cols]() mutable {
      auto g = out.Grad();
      if (gain.RequiresGrad() || bias.RequiresGrad()) {
        std::vector<double> dg(cols, 0.0), db(cols, 0.0);
        for (int32_t r = 0; r < rows; ++r)
          for (int32_t c = 0; c < cols; ++c) {
            const size_t i = static_cast<size_t>(r) * cols + c;
            dg[c] += g[i] * (*xhat)[i];
            db[c] += g[i];
          }
        AccumulateGrad(gain, dg);
        AccumulateGrad(bias, db);
      }
      if (x.RequiresGrad()) {
        auto gx = x.MutableGrad();
        std::vector<double> dh(cols);
        for (int32_t r = 0; r < rows; ++r) {
          const size_t base = static_cast<size_t>(r) * cols;
          double mean_dh = 0.0, mean_dh_h = 0.0;
          for (int32_t c = 0; c < cols; ++c) {
            dh[c] = g[base + c] * gain.Value(c);
            mean_dh += dh[c];
            mean_dh_h += dh[c] * (*xhat)[base + c];
          }
          mean_dh /= cols;
          mean_dh_h /= cols;
          for (int32_t c = 0; c < cols; ++c)
            gx[base + c] += (*rstd)[r] *
                            (dh[c] - mean_dh - (*xhat)[base + c] * mean_dh_h);
        }
      }
    });
  }
  return out;
}

Tensor Dropout(Tape &tape, const Tensor &x, double p, Rng *rng,
               bool training) {
  if (!training || p <= 0.0) return x;
  if (p >= 1.0 || rng == nullptr)
    throw Error(ErrorCode::kInvalidArgument, "dropout needs p < 1 and an rng");
  const double keep_scale = 1.0 / (1.0 - p);
  auto mask = std::make_shared<std::vector<double>>(x.Size());
  std::vector<double> v(x.Size());
  for (size_t i = 0; i < v.size(); ++i) {
    (*mask)[i] = rng->Bernoulli(p) ? 0.0 : keep_scale;
    v[i] = x.Value(i) * (*mask)[i];
  }
  Tensor out(x.shape(), std::move(v));
  if (tape.ShouldRecord({&x})) {
    tape.Record(out, [x, out, mask]() mutable {
      auto g = out.Grad();
      auto gx = x.MutableGrad();
      for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (*mask)[i];
    });
  }
  return out;
}

Tensor SliceRows(Tape &tape, const Tensor &x, int32_t begin, int32_t count) {
  Require2D(x, "SliceRows");
  const int32_t cols = x.Dim(1);
  if (begin < 0 || count < 0 || begin + count > x.Dim(0))
    throw Error(ErrorCode::kShapeMismatch, "SliceRows out of range");
  auto src = x.Values().subspan(static_cast<size_t>(begin) * cols,
                                static_cast<size_t>(count) * cols);
  Tensor out({count, cols}, std::vector<double>(src.begin(), src.end()));
  if (tape.ShouldRecord({&x})) {
    tape.Record(out, [x, out, begin, cols]() mutable {
      auto g = out.Grad();
      auto gx = x.MutableGrad().subspan(static_cast<size_t>(begin) * cols,
                                        g.size());
      for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    });
  }
  return out;
}

Tensor SliceCols(Tape &tape, const Tensor &x, int32_t begin, int32_t count) {
  Require2D(x, "SliceCols");
  const int32_t rows = x.Dim(0), cols = x.Dim(1);
  if (begin < 0 || count < 0 || begin + count > cols)
    throw Error(ErrorCode::kShapeMismatch, "SliceCols out of range");
  std::vector<double> v(static_cast<size_t>(rows) * count);
  for (int32_t r = 0; r < rows; ++r)
    for (int32_t c = 0; c < count; ++c)
      v[static_cast<size_t>(r) * count + c] =
          x.Value(static_cast<size_t>(r) * cols + begin + c);
  Tensor out({rows, count}, std::move(v));
  if (tape.ShouldRecord({&x})) {
    tape.Record(out, [x, out, begin, count, rows, cols]() mutable {
      auto g = out.Grad();
      auto gx = x.MutableGrad();
      for (int32_t r = 0; r < rows; ++r)
        for (int32_t c = 0; c < count; ++c)
          gx[static_cast<size_t>(r) * cols + begin + c] +=
              g[static_cast<size_t>(r) * count + c];
    });
  }
  return out;
}

Tensor ConcatCols(Tape &tape, std::span<const Tensor> parts) {
  if (parts.empty()) throw Error(ErrorCode::kShapeMismatch, "ConcatCols of nothing");
  const int32_t rows = parts[0].NumRows();
  int32_t total = 0;
  bool record = false;
  for (const Tensor &p : parts) {
    Require2D(p, "ConcatCols");
    if (p.Dim(0) != rows)
      throw Error(ErrorCode::kShapeMismatch, "ConcatCols row mismatch");
    total += p.Dim(1);
    record = record || tape.ShouldRecord({&p});
  }
  std::vector<double> v(static_cast<size_t>(rows) * total);
  int32_t offset = 0;
  for (const Tensor &p : parts) {
    const int32_t pc = p.Dim(1);
    for (int32_t r = 0; r < rows; ++r)
      for (int32_t c = 0; c < pc; ++c)
        v[static_cast<size_t>(r) * total + offset + c] =
            p.Value(static_cast<size_t>(r) * pc + c);
    offset += pc;
  }
  Tensor out({rows, total}, std::move(v));
  if (record) {
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    tape.Record(out, [inputs, out, rows, total]() mutable {
      auto g = out.Grad();
      int32_t offset = 0;
      for (Tensor &p : inputs) {
        const int32_t pc = p.Dim(1);
        if (p.RequiresGrad()) {
          auto gp = p.MutableGrad();
          for (int32_t r = 0; r < rows; ++r)
            for (int32_t c = 0; c < pc; ++c)
              gp[static_cast<size_t>(r) * pc + c] +=
                  g[static_cast<size_t>(r) * total + offset + c];
        }
        offset += pc;
      }
    });
  }
  return out;
}

Tensor Reshape(Tape &tape, const Tensor &x, Shape shape) {
  if (ShapeSize(shape) != x.Size())
    throw Error(ErrorCode::kShapeMismatch,
                "Reshape " + ShapeToString(x.shape()) + " to " +
                    ShapeToString(shape));
  Tensor out(std::move(shape),
             std::vector<double>(x.Values().begin(), x.Values().end()));
  if (tape.ShouldRecord({&x})) {
    tape.Record(out, [x, out]() mutable { AccumulateGrad(x, out.Grad()); });
  }
  return out;
}

Tensor Embedding(Tape &tape, const Tensor &table,
                 std::span<const int32_t> ids) {
  Require2D(table, "Embedding");
  const int32_t vocab = table.Dim(0), dim = table.Dim(1);
  const int32_t n = static_cast<int32_t>(ids.size());
  std::vector<double> v(static_cast<size_t>(n) * dim);
  for (int32_t i = 0; i < n; ++i) {
    if (ids[i] < 0 || ids[i] >= vocab)
      throw Error(ErrorCode::kLabelOutOfRange,
                  "token id " + std::to_string(ids[i]) + " outside vocabulary");
    std::copy_n(table.Values().begin() + static_cast<size_t>(ids[i]) * dim, dim,
                v.begin() + static_cast<size_t>(i) * dim);
  }
  Tensor out({n, dim}, std::move(v));
  if (tape.ShouldRecord({&table})) {
    std::vector<int32_t> id_copy(ids.begin(), ids.end());
    tape.Record(out, [table, out, id_copy, dim]() mutable {
      auto g = out.Grad();
      auto gt = table.MutableGrad();
      for (size_t i = 0; i < id_copy.size(); ++i)
        for (int32_t c = 0; c < dim; ++c)
          gt[static_cast<size_t>(id_copy[i]) * dim + c] += g[i * dim + c];
    });
  }
  return out;
}

Tensor Sum(Tape &tape, const Tensor &x) {
  double s = 0.0;
  for (double v : x.Values()) s += v;
  Tensor out = Tensor::Scalar(s);
  if (tape.ShouldRecord({&x})) {
    tape.Record(out, [x, out]() mutable {
      const double g = out.Grad()[0];
      for (double &gx : x.MutableGrad()) gx += g;
    });
  }
  return out;
}

Tensor WeightedSum(Tape &tape, std::span<const Tensor> terms,
                   std::span<const double> weights) {
  if (terms.size() != weights.size())
    throw Error(ErrorCode::kLengthMismatch, "WeightedSum terms vs weights");
  double s = 0.0;
  bool record = false;
  for (size_t i = 0; i < terms.size(); ++i) {
    s += weights[i] * terms[i].Item();
    record = record || tape.ShouldRecord({&terms[i]});
  }
  Tensor out = Tensor::Scalar(s);
  if (record) {
    std::vector<Tensor> inputs(terms.begin(), terms.end());
    std::vector<double> w(weights.begin(), weights.end());
    tape.Record(out, [inputs, w, out]() mutable {
      const double g = out.Grad()[0];
      for (size_t i = 0; i < inputs.size(); ++i)
        if (inputs[i].RequiresGrad()) inputs[i].MutableGrad()[0] += w[i] * g;
    });
  }
  return out;
}

}  // namespace mtjr

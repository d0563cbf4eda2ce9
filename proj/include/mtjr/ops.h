// mtjr/ops.h

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

#ifndef MTJR_OPS_H_
#define MTJR_OPS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "mtjr/rng.h"
#include "mtjr/tensor.h"

namespace mtjr {

enum MatrixTransposeType { kNoTrans, kTrans };

// Every op below computes its output eagerly and, when the tape is enabled
// and some input requires a gradient, records how to push the output
// gradient back to the inputs. "Rows" means all leading axes flattened;
// row-wise ops act on the last axis.

// Standard product of 2-D tensors, optionally transposing either operand.
Tensor MatMul(Tape &tape, const Tensor &a, const Tensor &b,
              MatrixTransposeType trans_a = kNoTrans,
              MatrixTransposeType trans_b = kNoTrans);

Tensor Add(Tape &tape, const Tensor &a, const Tensor &b);
Tensor Mul(Tape &tape, const Tensor &a, const Tensor &b);
Tensor Scale(Tape &tape, const Tensor &x, double alpha);
// x[M x N] + bias[N], broadcast over rows.
Tensor AddBias(Tape &tape, const Tensor &x, const Tensor &bias);
// x . weight + bias with weight stored [in x out].
Tensor Linear(Tape &tape, const Tensor &x, const Tensor &weight,
              const Tensor &bias);
Tensor Relu(Tape &tape, const Tensor &x);

// Row-wise softmax, max-subtracted.
Tensor Softmax(Tape &tape, const Tensor &x);
// Row-wise softmax over entries with keep[i] != 0; others output exactly 0
// and receive no gradient. A row with nothing kept outputs all zeros.
Tensor MaskedSoftmax(Tape &tape, const Tensor &x,
                     std::span<const uint8_t> keep);
Tensor LogSoftmax(Tape &tape, const Tensor &x);

inline constexpr double kLayerNormEpsilon = 1e-12;
Tensor LayerNorm(Tape &tape, const Tensor &x, const Tensor &gain,
                 const Tensor &bias, double eps = kLayerNormEpsilon);

// Inverted dropout: kept entries are scaled by 1/(1-p), so nothing changes
// at evaluation time. Returns x itself when !training or p == 0.
Tensor Dropout(Tape &tape, const Tensor &x, double p, Rng *rng,
               bool training);

Tensor SliceRows(Tape &tape, const Tensor &x, int32_t begin, int32_t count);
Tensor SliceCols(Tape &tape, const Tensor &x, int32_t begin, int32_t count);
Tensor ConcatCols(Tape &tape, std::span<const Tensor> parts);
Tensor Reshape(Tape &tape, const Tensor &x, Shape shape);

// Gathers rows of table[V x D] -> [ids.size() x D].
Tensor Embedding(Tape &tape, const Tensor &table,
                 std::span<const int32_t> ids);

// Sum of all elements, as a scalar.
Tensor Sum(Tape &tape, const Tensor &x);
// sum_i weights[i] * terms[i] over scalar terms.
Tensor WeightedSum(Tape &tape, std::span<const Tensor> terms,
                   std::span<const double> weights);

}  // namespace mtjr

#endif  // MTJR_OPS_H_

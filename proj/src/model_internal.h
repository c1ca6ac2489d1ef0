/*
 * Copyright 2026 The tsxai Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef TSXAI_SRC_MODEL_INTERNAL_H_
#define TSXAI_SRC_MODEL_INTERNAL_H_

#include <vector>

#include "tsxai/matrix.h"
#include "tsxai/model.h"

namespace tsxai::tsmodel::internal {

Matrix LayerPreActivation(const LayerSpec& spec, const Matrix& input,
                          const Shape& out_shape);
Matrix Activate(const LayerSpec& spec, const Matrix& pre);
Matrix ActivationBackward(const LayerSpec& spec, const Matrix& pre,
                          const Matrix& output_gradient);

// Gradient with respect to the layer input given d/d pre-activation.
// Parameter gradients are accumulated when the output pointers are non-null.
Matrix LayerBackward(const LayerSpec& spec, const Matrix& input,
                     const Matrix& dpre, std::vector<double>* dweights,
                     std::vector<double>* dbiases);

}  // namespace tsxai::tsmodel::internal

#endif  // TSXAI_SRC_MODEL_INTERNAL_H_

// Copyright (c) the tlrc project authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Finite-difference verification harness: central differences (h = 1e-5)
// against analytic gradients, intended to run in double precision.

#ifndef TLRC_GRAD_CHECK_H_
#define TLRC_GRAD_CHECK_H_

#include <functional>
#include <string>

#include "tlrc/layers.h"

namespace tlrc {

struct GradCheckReport {
  double max_rel_error = 0;
  bool pass = true;
  std::string worst;  // coordinate description of the worst mismatch

  void record(double analytic, double numeric, const std::string& where, double tol) {
    double err = std::abs(analytic - numeric) /
                 std::max({std::abs(analytic), std::abs(numeric), 1e-3});
    if (err > max_rel_error) {
      max_rel_error = err;
      worst = where;
    }
    if (err > tol) pass = false;
  }
};

// Checks d(sum(proj * f(x)))/d{x, params} for a layer against central
// differences. The projection makes the scalar loss sensitive to every
// output coordinate.
template <typename S>
GradCheckReport grad_check_layer(Layer<S>& layer, Tensor<S> x, uint64_t seed, double tol = 1e-4,
                                 double h = 1e-5) {
  Rng rng(seed);
  Tensor<S> probe_out = layer.forward(x);
  Tensor<S> proj(probe_out.n(), probe_out.c(), probe_out.h(), probe_out.w());
  proj.fill_uniform(rng, -1.0, 1.0);

  auto loss = [&]() -> double {
    Tensor<S> out = layer.forward(x);
    return double((out.array() * proj.array()).sum());
  };

  std::vector<Parameter<S>*> params;
  layer.collect(params);
  for (auto* p : params) p->zero_grad();
  layer.forward(x);
  Tensor<S> gx = layer.backward(proj);

  GradCheckReport report;
  auto check_tensor = [&](Tensor<S>& values, const Tensor<S>& analytic, const std::string& tag) {
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      S orig = values.array()[i];
      values.array()[i] = orig + S(h);
      double up = loss();
      values.array()[i] = orig - S(h);
      double down = loss();
      values.array()[i] = orig;
      double numeric = (up - down) / (2.0 * h);
      report.record(double(analytic.array()[i]), numeric, tag + "[" + std::to_string(i) + "]",
                    tol);
    }
  };
  check_tensor(x, gx, "input");
  for (auto* p : params) check_tensor(p->value, p->grad, p->name);
  return report;
}

// Same contract for an arbitrary scalar function of flat coordinates.
inline GradCheckReport grad_check_fn(double* coords, const double* analytic, size_t n,
                                     const std::function<double()>& loss, double tol = 1e-4,
                                     double h = 1e-5) {
  GradCheckReport report;
  for (size_t i = 0; i < n; ++i) {
    double orig = coords[i];
    coords[i] = orig + h;
    double up = loss();
    coords[i] = orig - h;
    double down = loss();
    coords[i] = orig;
    report.record(analytic[i], (up - down) / (2.0 * h), "coord " + std::to_string(i), tol);
  }
  return report;
}

}  // namespace tlrc

#endif  // TLRC_GRAD_CHECK_H_

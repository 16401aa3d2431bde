// Copyright 2026 The ban-seg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ban/optim.hpp"

#include <cmath>

namespace ban {

double scheduled_learning_rate(const AdamConfig& cfg, std::uint64_t iteration) {
  if (cfg.halving_interval == 0) return cfg.learning_rate;
  const auto halvings = iteration / cfg.halving_interval;
  return cfg.learning_rate * std::pow(0.5, static_cast<double>(halvings));
}

AdamState::AdamState(AdamConfig cfg, std::span<Parameter* const> params) : config(cfg) {
  for (const Parameter* p : params) {
    first_moment.emplace_back(p->value.rows(), p->value.cols());
    second_moment.emplace_back(p->value.rows(), p->value.cols());
  }
}

void adam_step(AdamState& state, std::span<Parameter* const> params) {
  if (params.size() != state.first_moment.size()) {
    fail(ErrorKind::kContract, "adam_step: optimizer tracks " + std::to_string(state.first_moment.size()) +
                                   " parameters, got " + std::to_string(params.size()));
  }
  for (const Parameter* p : params) {
    if (p->grad.rows() != p->value.rows() || p->grad.cols() != p->value.cols()) {
      fail(ErrorKind::kDimension, "adam_step: gradient of " + p->name + " has the wrong shape");
    }
    if (!p->grad.all_finite()) fail(ErrorKind::kNumeric, "non-finite gradient for " + p->name);
  }

  const AdamConfig& c = state.config;
  const double lr = scheduled_learning_rate(c, state.step);
  const double t = static_cast<double>(state.step + 1);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);

  for (std::size_t n = 0; n < params.size(); ++n) {
    auto value = params[n]->value.data();
    const auto grad = params[n]->grad.data();
    auto m = state.first_moment[n].data();
    auto v = state.second_moment[n].data();
    for (std::size_t k = 0; k < value.size(); ++k) {
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * grad[k];
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * grad[k] * grad[k];
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      value[k] -= lr * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
  ++state.step;
}

}  // namespace ban

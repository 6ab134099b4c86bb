// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "diva/schedule.hpp"

#include <cmath>
#include <string>

#include "diva/error.hpp"
#include "diva/ops.hpp"

namespace diva {

NoiseSchedule::NoiseSchedule(std::size_t timesteps, double beta_min, double beta_max) {
  if (timesteps == 0) throw RangeError("schedule needs at least one timestep");
  if (!(beta_min > 0.0) || !(beta_max < 1.0) || beta_min > beta_max) {
    throw RangeError("schedule betas must satisfy 0 < beta_min <= beta_max < 1");
  }
  betas_.resize(timesteps + 1);
  betas_[0] = 0.0;
  for (std::size_t t = 1; t <= timesteps; ++t) {
    double frac = timesteps == 1 ? 0.0 : double(t - 1) / double(timesteps - 1);
    betas_[t] = beta_min + (beta_max - beta_min) * frac;
  }
  build();
}

NoiseSchedule::NoiseSchedule(std::vector<double> betas) {
  if (betas.empty()) throw RangeError("schedule needs at least one timestep");
  betas_.reserve(betas.size() + 1);
  betas_.push_back(0.0);
  for (double b : betas) {
    if (!(b > 0.0 && b < 1.0)) throw RangeError("beta " + std::to_string(b) + " outside (0, 1)");
    betas_.push_back(b);
  }
  build();
}

void NoiseSchedule::build() {
  std::size_t n = betas_.size();
  alphas_.assign(n, 1.0);
  alpha_bars_.assign(n, 1.0);
  sigmas_.assign(n, 0.0);
  for (std::size_t t = 1; t < n; ++t) {
    alphas_[t] = 1.0 - betas_[t];
    alpha_bars_[t] = alpha_bars_[t - 1] * alphas_[t];
  }
  // sigma_1 = 0 since alpha_bar_0 = 1.
  for (std::size_t t = 1; t < n; ++t) {
    double var = (1.0 - alpha_bars_[t - 1]) / (1.0 - alpha_bars_[t]) * betas_[t];
    sigmas_[t] = std::sqrt(var);
  }
}

std::size_t NoiseSchedule::checked(std::size_t t) const {
  if (t < 1 || t > timesteps()) {
    throw RangeError("timestep " + std::to_string(t) + " outside 1.." + std::to_string(timesteps()));
  }
  return t;
}

double NoiseSchedule::alpha_bar(std::size_t t) const {
  if (t == 0) return 1.0;
  return alpha_bars_[checked(t)];
}

Tensor forward_diffuse(const Tensor& x0, std::size_t t, const Tensor& eps, const NoiseSchedule& sched) {
  if (t == 0) throw RangeError("timestep 0 outside 1.." + std::to_string(sched.timesteps()));
  double ab = sched.alpha_bar(t);
  require_same_shape(x0, eps, "forward_diffuse");
  std::vector<double> out(x0.size());
  double a = std::sqrt(ab), b = std::sqrt(1.0 - ab);
  auto x = x0.data();
  auto e = eps.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x[i] + b * e[i];
  return Tensor(x0.shape(), std::move(out));
}

Tensor step_forward(const Tensor& x_prev, std::size_t t, const Tensor& eps_t, const NoiseSchedule& sched) {
  double beta = sched.beta(t);
  require_same_shape(x_prev, eps_t, "step_forward");
  std::vector<double> out(x_prev.size());
  double a = std::sqrt(1.0 - beta), b = std::sqrt(beta);
  auto x = x_prev.data();
  auto e = eps_t.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x[i] + b * e[i];
  return Tensor(x_prev.shape(), std::move(out));
}

Tensor reverse_step(const Tensor& x_t, std::size_t t, const Tensor& eps_hat, const Tensor& noise,
                    const NoiseSchedule& sched) {
  return reverse_step(x_t, t, eps_hat, noise, sched.sigma(t), sched);
}

Tensor reverse_step(const Tensor& x_t, std::size_t t, const Tensor& eps_hat, const Tensor& noise, double sigma,
                    const NoiseSchedule& sched) {
  double alpha = sched.alpha(t);
  double ab = sched.alpha_bar(t);
  require_same_shape(x_t, eps_hat, "reverse_step");
  require_same_shape(x_t, noise, "reverse_step");
  double inv_sqrt_alpha = 1.0 / std::sqrt(alpha);
  double eps_coef = (1.0 - alpha) / std::sqrt(1.0 - ab);
  std::vector<double> out(x_t.size());
  auto x = x_t.data();
  auto e = eps_hat.data();
  auto z = noise.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = inv_sqrt_alpha * (x[i] - eps_coef * e[i]) + sigma * z[i];
  return Tensor(x_t.shape(), std::move(out));
}

double posterior_sigma(std::size_t t, const NoiseSchedule& sched) { return sched.sigma(t); }

}  // namespace diva

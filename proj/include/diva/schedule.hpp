// Copyright 2026 The diva-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "diva/tensor.hpp"

namespace diva {

/// Variance schedule tables. Timesteps are 1-based; index 0 holds the
/// t = 0 convention (beta 0, alpha_bar 1).
class NoiseSchedule {
 public:
  /// Linear beta from `beta_min` at t = 1 to `beta_max` at t = T.
  NoiseSchedule(std::size_t timesteps, double beta_min, double beta_max);
  /// Explicit per-step betas, beta[0] applies at t = 1.
  explicit NoiseSchedule(std::vector<double> betas);

  std::size_t timesteps() const { return betas_.size() - 1; }
  double beta(std::size_t t) const { return betas_[checked(t)]; }
  double alpha(std::size_t t) const { return alphas_[checked(t)]; }
  /// Accepts t = 0 (returns 1).
  double alpha_bar(std::size_t t) const;
  double sigma(std::size_t t) const { return sigmas_[checked(t)]; }

 private:
  std::size_t checked(std::size_t t) const;
  void build();

  std::vector<double> betas_;
  std::vector<double> alphas_;
  std::vector<double> alpha_bars_;
  std::vector<double> sigmas_;
};

inline NoiseSchedule make_schedule(std::size_t timesteps, double beta_min, double beta_max) {
  return NoiseSchedule(timesteps, beta_min, beta_max);
}

/// sqrt(alpha_bar_t) * x0 + sqrt(1 - alpha_bar_t) * eps
Tensor forward_diffuse(const Tensor& x0, std::size_t t, const Tensor& eps, const NoiseSchedule& sched);

/// One Markov step: sqrt(1 - beta_t) * x_prev + sqrt(beta_t) * eps_t
Tensor step_forward(const Tensor& x_prev, std::size_t t, const Tensor& eps_t, const NoiseSchedule& sched);

/// Ancestral step x_t -> x_{t-1} given the predicted noise `eps_hat`.
Tensor reverse_step(const Tensor& x_t, std::size_t t, const Tensor& eps_hat, const Tensor& noise,
                    const NoiseSchedule& sched);

/// Same update with an explicit sigma, used when the posterior noise is
/// switched off.
Tensor reverse_step(const Tensor& x_t, std::size_t t, const Tensor& eps_hat, const Tensor& noise, double sigma,
                    const NoiseSchedule& sched);

/// sigma_t with sigma_t^2 = (1 - alpha_bar_{t-1}) / (1 - alpha_bar_t) * beta_t.
double posterior_sigma(std::size_t t, const NoiseSchedule& sched);

}  // namespace diva

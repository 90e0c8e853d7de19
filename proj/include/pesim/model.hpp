#pragma once

#include "pesim/kernel.hpp"

namespace pesim {

/// fixed:    lambda_i = 1 for every agent (mean-preserving with symmetric weights)
/// rescaled: lambda_i = N / sum_j phi(|x_i - x_j|), the self term included
enum class ScalingMode { fixed, rescaled };

template <typename Scalar = double>
struct ModelConfig {
  InfluenceKernel<Scalar> kernel = InfluenceKernel<Scalar>::constant(1);
  ScalingMode scaling = ScalingMode::fixed;
};

using ModelConfigXd = ModelConfig<double>;

/// Kernel extrema over [0, initial diameter] and the induced uniform bounds
/// k_min <= lambda_i phi_ij <= k_max valid along the whole evolution.
template <typename Scalar = double>
struct KernelBounds {
  Scalar phi_min = 0;
  Scalar phi_max = 0;
  Scalar k_min = 0;
  Scalar k_max = 0;
  Scalar initial_diameter = 0;
};

using KernelBoundsXd = KernelBounds<double>;

}  // namespace pesim

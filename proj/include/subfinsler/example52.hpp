#pragma once

#include <Eigen/Dense>

#include <numbers>

#include "subfinsler/heisenberg.hpp"
#include "subfinsler/pontryagin.hpp"

namespace subfinsler::example52 {

/// End of the closed-form quarter loop: 2 + pi / sqrt(2).
inline constexpr double tau = 2.0 + std::numbers::pi / std::numbers::sqrt2;
inline constexpr double theta_max = 1.0 + std::numbers::sqrt2;

/// s(theta) = 2 + sqrt2 asin((theta - 1)/sqrt2) - sqrt(2 + 4 theta - 2 theta^2)/2, increasing on [1, 1 + sqrt2].
double s_of_theta(double theta);

/// Inverse of s_of_theta by bisection on [1, 1 + sqrt2]; exactly 1 for s <= 1.
double theta(double s);

/// sqrt(2 + 4 theta - 2 theta^2) / (1 + theta).
double theta_rate(double theta);

struct State
{
  GroupPoint g;
  Eigen::VectorXd a;
  Eigen::VectorXd v;
};

/// Closed-form extremal with lambda(0) = (0, 1), k = -1/4, R = 1 at s in [0, tau].
State closed_form(double s);

Multiplier multiplier();

/// Closed form sampled uniformly on [0, T] with T <= tau.
ExtremalTrace closed_form_trace(std::size_t samples, double T = tau);

}  // namespace subfinsler::example52

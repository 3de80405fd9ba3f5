#pragma once

// Small descriptive-statistics helpers shared across modules.

#include <optional>
#include <span>
#include <vector>

namespace rednet::stats {

double mean(std::span<const double> v);

// Sample (n-1) standard deviation; 0 for fewer than two values.
double sample_sd(std::span<const double> v);

// Quantile by linear interpolation between order statistics
// (position p*(n-1) in the sorted sample). `sorted` must be ascending.
double quantile_linear(std::span<const double> sorted, double p);

// Quantile taking the higher of the two bracketing order statistics
// (sorted[ceil(p*(n-1))]). `sorted` must be ascending.
double quantile_higher(std::span<const double> sorted, double p);

std::vector<double> sorted_copy(std::span<const double> v);

double logistic(double x);

}  // namespace rednet::stats

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cumdamage::special {

/// ln Γ(x) for x > 0. Reentrant.
double log_gamma(double x);

/// ln(n!) with a cached table for small n.
double log_factorial(std::uint64_t n);

/// Regularized lower incomplete gamma P(a, x), a > 0. Series expansion for
/// x < a + 1, Lentz continued fraction for Q otherwise.
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

/// Poisson probability mass e^{-x} x^j / j!, evaluated in log space.
double poisson_pmf(std::uint64_t j, double x);

/// Standard normal CDF and quantile.
double normal_cdf(double z);
double normal_quantile(double p);

/// Poisson(x) masses for j = 0..J, where J is the first index past the mode
/// whose geometric tail bound falls below `tail_tolerance`, plus `extra`
/// further terms, never exceeding `cap` + 1 entries. Filled from the mode
/// outwards, so large means do not underflow.
void poisson_weights(double x, double tail_tolerance, std::uint64_t cap,
                     std::uint64_t extra, std::vector<double>& out);

/// Upper tails Q_j = P[Poisson(y) >= j] for j = 0..count-1, accumulated
/// downwards from Q_{count-1} so every entry keeps full relative precision.
/// Q_0 = 1.
void poisson_upper_tails(double y, std::size_t count, std::vector<double>& out);

/// Smallest x with P(n, x) >= q (quantile of a unit-rate Erlang(n)).
double erlang_quantile_unit(std::uint64_t n, double q);

}  // namespace cumdamage::special

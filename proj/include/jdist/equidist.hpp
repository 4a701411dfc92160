#pragma once

#include <jdist/characters.hpp>
#include <jdist/charsums.hpp>
#include <jdist/discrepancy.hpp>
#include <jdist/error.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

namespace jdist {

/// One angle per tuple of A-circle, in enumeration order (B position, j1, j2),
/// from the Gauss angle table: theta = frac(sum angles - angle of product).
/// Rows are filled in parallel into precomputed slots, so the result does not
/// depend on the worker count.
inline AngleSet angles_from_subsets(const GaussTable& gtab, const CharSubset& a1, const CharSubset& a2,
                                    const TailSet& tails, unsigned workers = 1) {
  const CharGroup group(gtab.q());
  const std::uint32_t order = group.order();
  std::vector<bool> in_a2(order, false);
  for (auto j : a2.indices()) in_a2[j] = true;
  const auto rows = a1.indices();
  const std::size_t n_rows = tails.size() * rows.size();
  std::vector<std::size_t> offset(n_rows + 1, 0);
  std::vector<std::uint32_t> lambda(tails.size());
  std::vector<double> tail_turns(tails.size(), 0.0);
  for (std::size_t b = 0; b < tails.size(); ++b) {
    lambda[b] = tails.product(b);
    for (auto j : tails.tuple(b)) tail_turns[b] += gtab.angle(j);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const bool hit = in_a2[group.conj(group.mul(rows[r], lambda[b]))];
      offset[b * rows.size() + r + 1] = a2.size() - (hit ? 1 : 0);
    }
  }
  for (std::size_t i = 0; i < n_rows; ++i) offset[i + 1] += offset[i];

  AngleSet out;
  out.thetas.resize(offset.back());
  out.empty_convention = out.thetas.empty();
  const auto angles = gtab.angles();
  auto fill = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t row = lo; row < hi; ++row) {
      const std::size_t b = row / rows.size();
      const std::uint32_t j1 = rows[row % rows.size()];
      const std::uint32_t base = group.mul(j1, lambda[b]);
      const double head = angles[j1] + tail_turns[b];
      double* dst = out.thetas.data() + offset[row];
      for (auto j2 : a2.indices()) {
        std::uint32_t prod = base + j2;
        if (prod >= order) prod -= order;
        if (prod == 0) continue;
        double t = head + angles[j2] - angles[prod];
        t -= std::floor(t);
        *dst++ = t >= 1.0 ? 0.0 : t;
      }
    }
  };
  workers = std::max(1u, std::min<unsigned>(resolve_workers(workers), static_cast<unsigned>(std::max<std::size_t>(1, n_rows))));
  if (workers == 1) {
    fill(0, n_rows);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(fill, n_rows * w / workers, n_rows * (w + 1) / workers);
    for (auto& t : pool) t.join();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bound evaluators. All are pure arithmetic in their arguments.

/// C (s (sqrt q / A1)^{1/(2s+1)} + (s A2)^{-1/2} (q / A1)^{1/(2s)} log q)
inline double bound_e0_rhs(double q, double a1, double a2, unsigned s, double c_impl = 1.0) {
  if (s < 1 || a1 < 1 || a2 < 1 || q < 3) throw Error(ErrorKind::DomainError, "e0 needs s >= 1, A_i >= 1, q >= 3");
  const double sd = s;
  const double first = sd * std::pow(std::sqrt(q) / a1, 1.0 / (2 * sd + 1));
  const double second = std::pow(q / a1, 1.0 / (2 * sd)) * std::log(q) / std::sqrt(sd * a2);
  return c_impl * (first + second);
}

/// C (q / (A1 A2))^{1/4}
inline double bound_e1_rhs(double q, double a1, double a2, double c_impl = 1.0) {
  if (a1 < 1 || a2 < 1 || q < 3) throw Error(ErrorKind::DomainError, "e1 needs A_i >= 1, q >= 3");
  return c_impl * std::pow(q / (a1 * a2), 0.25);
}

inline constexpr unsigned kMaxS = 20;

inline std::uint64_t factorial(unsigned s) {
  std::uint64_t f = 1;
  for (unsigned i = 2; i <= s; ++i) f *= i;
  return f;
}

/// A1^{1-1/(2s)} (s! A2^s q + s A2^{2s} (n sqrt q + 1))^{1/(2s)} B, evaluated in
/// log space so that A2^{2s} cannot overflow.
inline double bound_em1_rhs(double q, double a1, double a2, double b, unsigned s, unsigned n) {
  if (s < 1 || s > kMaxS) throw Error(ErrorKind::SOutOfRange, "s must lie in [1, 20], got " + std::to_string(s));
  if (n < 1 || a1 < 1 || a2 < 1 || b < 1 || q < 3) throw Error(ErrorKind::DomainError, "e.M1 needs n, A_i, B >= 1");
  const double sd = s;
  const double log_first = std::log(static_cast<double>(factorial(s))) + sd * std::log(a2) + std::log(q);
  const double log_second = std::log(sd) + 2 * sd * std::log(a2) + std::log(n * std::sqrt(q) + 1);
  const double hi = std::max(log_first, log_second);
  const double lo = std::min(log_first, log_second);
  const double log_inner = hi + std::log1p(std::exp(lo - hi));
  return std::exp((1 - 1 / (2 * sd)) * std::log(a1) + log_inner / (2 * sd)) * b;
}

/// n sqrt(A1 A2 q) B
inline double bound_em2_rhs(double q, double a1, double a2, double b, unsigned n) {
  if (n < 1 || a1 < 1 || a2 < 1 || b < 1 || q < 3) throw Error(ErrorKind::DomainError, "e.M2 needs n, A_i, B >= 1");
  return n * std::sqrt(a1 * a2 * q) * b;
}

/// s = ceil(eps log q / (2 log log q)).
inline unsigned choose_s(double q, double epsilon) {
  if (!(epsilon > 0 && epsilon <= 0.5)) throw Error(ErrorKind::DomainError, "epsilon must lie in (0, 1/2]");
  if (!(q > std::exp(1.0))) throw Error(ErrorKind::DomainError, "log log q is not positive for q <= e");
  const double lq = std::log(q);
  const double s = std::ceil(epsilon * lq / (2 * std::log(lq)));
  return static_cast<unsigned>(std::max(1.0, s));
}

/// K = s^{-1} (A1 / sqrt q)^{1/(2s+1)}, clamped below at 1.
inline double choose_k_e0(double q, double a1, unsigned s) {
  if (s < 1 || a1 < 1 || q < 3) throw Error(ErrorKind::DomainError, "choose_K_e0 needs s >= 1, A1 >= 1, q >= 3");
  const double k = std::pow(a1 / std::sqrt(q), 1.0 / (2.0 * s + 1)) / s;
  return std::max(1.0, k);
}

/// K = (q / (A1 A2))^{-1/4}, clamped below at 1.
inline double choose_k_e1(double q, double a1, double a2) {
  if (a1 < 1 || a2 < 1 || q < 3) throw Error(ErrorKind::DomainError, "choose_K_e1 needs A_i >= 1, q >= 3");
  return std::max(1.0, std::pow(q / (a1 * a2), -0.25));
}

/// #A-circle >= (A1 - 1) A2 B.
inline double a_circle_lower_bound(double a1, double a2, double b) { return (a1 - 1) * a2 * b; }

}  // namespace jdist

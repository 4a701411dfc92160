#pragma once

#include <jdist/dft.hpp>
#include <jdist/error.hpp>
#include <jdist/summation.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>
#include <thread>
#include <vector>

namespace jdist {

/// Normalized angles theta in [0, 1) of a point multiset on the unit circle.
/// `empty_convention` marks an empty A-circle, whose discrepancy is 1 by
/// convention.
struct AngleSet {
  std::vector<double> thetas;
  bool empty_convention = false;

  [[nodiscard]] std::size_t size() const { return thetas.size(); }
};

enum class DiscrepancyMethod { ExactQuadratic, ExactSweep };

constexpr std::string_view to_string(DiscrepancyMethod m) {
  return m == DiscrepancyMethod::ExactQuadratic ? "exact-quadratic" : "exact-sweep";
}

struct DiscrepancyReport {
  double d_exact = 1.0;
  double d_star = 1.0;
  std::size_t n_points = 0;
  DiscrepancyMethod method = DiscrepancyMethod::ExactSweep;
  bool empty_convention = false;
};

/// Sorts values in [0, 1) ascending. Nonnegative doubles order like their bit
/// patterns, so this is an LSD radix sort on 16-bit digits of the bit pattern;
/// digits on which every key agrees are skipped.
inline void sort_unit_interval(std::vector<double>& values) {
  if (values.size() < (1u << 16)) {
    std::sort(values.begin(), values.end());
    return;
  }
  std::vector<double> scratch(values.size());
  std::vector<std::size_t> counts(1u << 16);
  for (int shift = 0; shift < 64; shift += 16) {
    auto digit = [shift](double v) { return (std::bit_cast<std::uint64_t>(v) >> shift) & 0xffffu; };
    std::fill(counts.begin(), counts.end(), 0);
    for (double v : values) ++counts[digit(v)];
    if (std::any_of(counts.begin(), counts.end(), [&](std::size_t c) { return c == values.size(); })) continue;
    std::size_t total = 0;
    for (auto& c : counts) {
      const std::size_t here = c;
      c = total;
      total += here;
    }
    for (double v : values) scratch[counts[digit(v)]++] = v;
    values.swap(scratch);
  }
}

namespace detail {

/// Distinct sorted values with multiplicities.
struct Runs {
  std::vector<double> value;
  std::vector<std::size_t> weight;
};

inline Runs runs_of(std::span<const double> sorted) {
  Runs r;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    r.value.push_back(sorted[i]);
    r.weight.push_back(j - i);
    i = j;
  }
  return r;
}

/// Star discrepancy over anchored intervals [0, x) and [0, x]:
///   d* = max_i max(r_i/N - x_i, x_i - l_i/N)
/// with r_i (l_i) the number of points <= x_i (< x_i).
inline void sweep_terms(std::span<const double> sorted, double& d_plus, double& d_minus) {
  const auto n = static_cast<double>(sorted.size());
  d_plus = 0;
  d_minus = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double x = sorted[i];
    d_plus = std::max(d_plus, static_cast<double>(j) / n - x);
    d_minus = std::max(d_minus, x - static_cast<double>(i) / n);
    i = j;
  }
}

}  // namespace detail

/// Extreme discrepancy by enumerating arc endpoints at data points. With
/// distinct sorted values u_0 < ... < u_{D-1} (weights w_i), every arc is
/// dominated either by a closed arc [u_i, u_j] (maximal count, minimal
/// length) or by an open arc (u_i, u_j) between points (zero extra count,
/// maximal length); i == j covers single-point arcs and the open arc of
/// length 1 around the circle. O(N^2); rows are split over workers with a
/// max-reduction.
inline double extreme_discrepancy_quadratic(std::span<const double> sorted, unsigned workers = 1) {
  const auto runs = detail::runs_of(sorted);
  const std::size_t d = runs.value.size();
  const auto n = static_cast<double>(sorted.size());
  if (d == 0) return 1.0;
  auto row = [&](std::size_t i) {
    double best = 0;
    std::size_t inside = 0;  // points in [u_i, u_j]
    for (std::size_t step = 0; step < d; ++step) {
      const std::size_t j = (i + step) % d;
      double len = runs.value[j] - runs.value[i];
      if (len < 0) len += 1.0;
      inside += runs.weight[j];
      // closed [u_i, u_j]
      best = std::max(best, static_cast<double>(inside) / n - len);
      // open (u_i, u_j); for j == i this is the full circle minus u_i
      if (step == 0) {
        best = std::max(best, static_cast<double>(runs.weight[i]) / n);
      } else {
        const std::size_t strictly_inside = inside - runs.weight[i] - runs.weight[j];
        best = std::max(best, len - static_cast<double>(strictly_inside) / n);
      }
    }
    return best;
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(d)));
  std::vector<double> best(workers, 0.0);
  auto work = [&](unsigned w) {
    for (std::size_t i = d * w / workers; i < d * (w + 1) / workers; ++i) best[w] = std::max(best[w], row(i));
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  return *std::max_element(best.begin(), best.end());
}

/// Extreme discrepancy in O(N) on sorted input. With
/// G(x) = #{theta <= x}/N - x, every arc from a to b (closed) has
/// count/N - length = G(b) - G(a-), wrapping arcs included, so
///   D = sup G - inf G(-) = max(0, max_i r_i/N - x_i) + max(0, max_i x_i - l_i/N).
inline double extreme_discrepancy_sweep(std::span<const double> sorted) {
  if (sorted.empty()) return 1.0;
  double plus = 0;
  double minus = 0;
  detail::sweep_terms(sorted, plus, minus);
  return plus + minus;
}

inline double star_discrepancy(std::span<const double> sorted) {
  if (sorted.empty()) return 1.0;
  double plus = 0;
  double minus = 0;
  detail::sweep_terms(sorted, plus, minus);
  return std::max(plus, minus);
}

/// Discrepancy of an angle multiset; consumes the set (sorted in place).
/// Up to `exact_cap` points the quadratic endpoint enumeration runs; above
/// it the linear sweep, which is also exact.
inline DiscrepancyReport discrepancy_exact(AngleSet angles, std::size_t exact_cap = 4096, unsigned workers = 1) {
  DiscrepancyReport rep;
  rep.n_points = angles.size();
  if (angles.empty_convention || angles.thetas.empty()) {
    rep.empty_convention = true;
    rep.d_exact = 1.0;
    rep.d_star = 1.0;
    return rep;
  }
  sort_unit_interval(angles.thetas);
  rep.d_star = star_discrepancy(angles.thetas);
  if (angles.size() <= exact_cap) {
    rep.method = DiscrepancyMethod::ExactQuadratic;
    rep.d_exact = extreme_discrepancy_quadratic(angles.thetas, workers);
  } else {
    rep.method = DiscrepancyMethod::ExactSweep;
    rep.d_exact = extreme_discrepancy_sweep(angles.thetas);
  }
  return rep;
}

/// Weyl sums sum_t e^{2 pi i n theta_t} for n = 1..n_max, directly.
inline std::vector<cplx> angle_moments(std::span<const double> thetas, unsigned n_max) {
  std::vector<PairwiseAccumulator<cplx>> acc(n_max);
  for (double t : thetas) {
    const cplx z = cis_turns(t);
    cplx zn = z;
    for (unsigned n = 0; n < n_max; ++n) {
      acc[n].add(zn);
      zn *= z;
      if ((n + 1) % 64 == 0) zn /= std::abs(zn);
    }
  }
  std::vector<cplx> out(n_max);
  for (unsigned n = 0; n < n_max; ++n) out[n] = acc[n].total();
  return out;
}

/// Erdos-Turan right-hand side c0/K + c1 sum_{n<=K} |M^(n)| / (n count).
inline double erdos_turan_rhs(std::span<const cplx> moments, std::uint64_t count, unsigned k, double c0 = 1.0,
                              double c1 = 4.0) {
  if (k < 1) throw Error(ErrorKind::DomainError, "Erdos-Turan cutoff K must be >= 1");
  if (count < 1) throw Error(ErrorKind::DomainError, "Erdos-Turan needs a nonempty point set");
  if (moments.size() < k) throw Error(ErrorKind::InvalidArgument, "fewer moments than the cutoff K");
  std::vector<double> terms(k);
  for (unsigned n = 1; n <= k; ++n) terms[n - 1] = std::abs(moments[n - 1]) / (n * static_cast<double>(count));
  return c0 / k + c1 * pairwise_sum<double>(terms);
}

}  // namespace jdist

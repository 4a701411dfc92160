// Acceptance suite: one pass/fail line per criterion.
//   acceptance [--criterion N]...
#include <jdist/harness.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace {

using namespace jdist;

// Pinned tolerances and budgets.
constexpr double kGaussTolFactor = 64;          // ||G| - sqrt q| <= 64 q eps
constexpr double kRelTol = 1e-8;                // Jacobi / Kloosterman route agreement
constexpr double kDeligneSlack = 1e-9;          // |Kl_n| <= n q^((n-1)/2) (1 + slack)
constexpr double kMomentSlack = 1e-6;           // |M^(n)| <= rhs (1 + slack)
constexpr double kMeshPoints = 1e4;             // discrepancy oracle mesh
constexpr double kSpacingTol = 1e-12;           // equally spaced points
constexpr double kWorkerRelTol = 1e-10;         // numeric agreement across worker counts
constexpr double kTrendFactor = 4;              // fitted-C spread in the full-set sweep
constexpr double kLimitC1 = 10, kLimitC2 = 60, kLimitC4 = 600, kLimitC8 = 900;  // seconds
constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct FieldBundle {
  Field field;
  Characters chars;
  GaussTable gtab;

  explicit FieldBundle(Field f) : field(std::move(f)), chars(field), gtab(gauss_all(chars)) {}
  FieldBundle(const FieldBundle&) = delete;
};

std::unique_ptr<FieldBundle> bundle(std::uint32_t p, unsigned k = 1) {
  return std::make_unique<FieldBundle>(Field::build(p, k, std::nullopt, kSeed));
}

// ---------------------------------------------------------------------------
// 1. Gauss-sum facts

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  std::uint64_t checks = 0;
  double worst = 0;
  for (auto [p, k] : {std::pair{7u, 1u}, std::pair{3u, 2u}, std::pair{101u, 1u}, std::pair{1009u, 1u},
                      std::pair{4093u, 1u}, std::pair{9973u, 1u}}) {
    const auto b = bundle(p, k);
    const double q = b->field.q();
    const double tol = kGaussTolFactor * q * std::numeric_limits<double>::epsilon();
    const double err0 = std::abs(b->gtab[MulCharIndex(0)] + 1.0);
    ++checks;
    if (err0 > tol) out.pass = false;
    for (std::uint32_t j = 1; j < b->field.group_order(); ++j) {
      const double err = std::abs(std::abs(b->gtab[MulCharIndex(j)]) - std::sqrt(q));
      worst = std::max(worst, err / tol);
      ++checks;
      if (err > tol) out.pass = false;
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= kLimitC1) out.pass = false;
  out.detail = std::to_string(checks) + " Gauss values over q in {7, 9, 101, 1009, 4093, 9973}; worst error " +
               fmt(worst) + " x tolerance; " + fmt(secs) + " s (limit " + fmt(kLimitC1) + ")";
  return out;
}

// ---------------------------------------------------------------------------
// 2. Quotient identity

Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  std::uint64_t checks = 0;
  std::uint64_t fails = 0;
  double worst = 0;
  auto compare = [&](const FieldBundle& b, const std::vector<std::uint32_t>& idx) {
    const CharTuple t(b.field.q(), idx);
    if (!t.is_in_a_circle()) return;
    const auto direct = jacobi_direct(b.chars, t);
    const auto via = jacobi_via_gauss(b.gtab, t);
    const double rel = std::abs(direct.value - via.value) / std::abs(via.value);
    worst = std::max(worst, rel);
    ++checks;
    if (rel > kRelTol) ++fails;
  };
  for (auto [p, k] : {std::pair{5u, 1u}, std::pair{7u, 1u}, std::pair{3u, 2u}, std::pair{11u, 1u}, std::pair{13u, 1u}}) {
    const auto b = bundle(p, k);
    const std::uint32_t top = b->field.group_order();
    for (std::uint32_t j1 = 1; j1 < top; ++j1) {
      for (std::uint32_t j2 = 1; j2 < top; ++j2) {
        compare(*b, {j1, j2});
        for (std::uint32_t j3 = 1; j3 < top; ++j3) compare(*b, {j1, j2, j3});
      }
    }
  }
  const auto b = bundle(257);
  Rng rng(kSeed);
  for (std::size_t m = 2; m <= 5; ++m) {
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<std::uint32_t> idx(m);
      do {
        for (auto& j : idx) j = 1 + static_cast<std::uint32_t>(rng.below(255));
      } while (!CharTuple(257, idx).is_in_a_circle());
      compare(*b, idx);
    }
  }
  const double secs = seconds_since(t0);
  out.pass = fails == 0 && secs < kLimitC2;
  out.detail = std::to_string(checks) + " tuples (exhaustive q <= 13, m = 2, 3; 1000 per m = 2..5 at q = 257); " +
               std::to_string(fails) + " over relative tolerance " + fmt(kRelTol) + "; worst " + fmt(worst) + "; " +
               fmt(secs) + " s (limit " + fmt(kLimitC2) + ")";
  return out;
}

// ---------------------------------------------------------------------------
// 3. Kloosterman

Outcome criterion3() {
  Outcome out;
  std::uint64_t inv_checks = 0;
  std::uint64_t inv_fails = 0;
  std::uint64_t fwd_checks = 0;
  std::uint64_t fwd_fails = 0;
  std::uint64_t del_checks = 0;
  std::uint64_t del_fails = 0;
  const std::vector<std::pair<std::uint32_t, unsigned>> small = {
      {3, 1},  {2, 2}, {5, 1}, {7, 1},   {2, 3}, {3, 2},   {11, 1}, {13, 1}, {2, 4},
      {5, 2},  {3, 3}, {2, 5}, {7, 2},   {2, 6}, {101, 1}, {2, 7},  {3, 5}, {2, 8}, {257, 1}};
  for (auto [p, k] : small) {
    const auto b = bundle(p, k);
    const double q = b->field.q();
    for (unsigned n = 1; n <= 4; ++n) {
      const auto table = kloosterman_all(b->gtab, n);
      if (n <= 3) {
        for (std::uint32_t t = 0; t < b->field.group_order(); ++t) {
          const cplx direct = kloosterman_direct(b->chars, n, b->field.pow_g(t));
          ++inv_checks;
          if (std::abs(direct - table.values[t]) > kRelTol * std::max(1.0, std::abs(direct))) ++inv_fails;
        }
      }
      // G(chi_j)^n = sum_t Kl_n(g^t) chi_j(g^t), one DFT over t
      const auto forward = dft(table.values, +1);
      for (std::uint32_t j = 0; j < b->field.group_order(); ++j) {
        cplx gn = 1;
        for (unsigned i = 0; i < n; ++i) gn *= b->gtab[MulCharIndex(j)];
        ++fwd_checks;
        if (std::abs(forward[j] - gn) > kRelTol * std::max(1.0, std::abs(gn))) ++fwd_fails;
      }
      (void)q;
    }
  }
  for (auto [p, k] : {std::pair{7u, 1u}, std::pair{2u, 6u}, std::pair{101u, 1u}, std::pair{257u, 1u},
                      std::pair{1009u, 1u}, std::pair{2u, 12u}, std::pair{9973u, 1u}}) {
    const auto b = bundle(p, k);
    for (unsigned n = 1; n <= 6; ++n) {
      const auto table = kloosterman_all(b->gtab, n);
      double worst = 0;
      for (const auto& v : table.values) worst = std::max(worst, std::abs(v));
      ++del_checks;
      if (worst > table.deligne_bound() * (1 + kDeligneSlack)) ++del_fails;
    }
  }
  out.pass = inv_fails + fwd_fails + del_fails == 0;
  out.detail = "inversion vs direct " + std::to_string(inv_checks - inv_fails) + "/" + std::to_string(inv_checks) +
               " (q <= 257, n <= 3); forward identity " + std::to_string(fwd_checks - fwd_fails) + "/" +
               std::to_string(fwd_checks) + " (n <= 4); Deligne " + std::to_string(del_checks - del_fails) + "/" +
               std::to_string(del_checks) + " (q <= 9973, n <= 6)";
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 4 cells, shared with criterion 7.

struct MomentCell {
  const FieldBundle* b;
  unsigned m;
  CharSubset a1;
  CharSubset a2;
  TailSet tails;
  std::uint64_t key;  // identifies the (A1, A2, B) multiset of tuples
};

std::uint64_t set_key(std::uint32_t q, const CharSubset& a1, const CharSubset& a2, const TailSet& tails) {
  std::uint64_t h = splitmix64(q);
  auto mix = [&](std::uint64_t v) { h = splitmix64(h ^ v); };
  for (auto j : a1.indices()) mix(j);
  mix(0xa1);
  for (auto j : a2.indices()) mix(j);
  mix(0xa2);
  for (std::size_t i = 0; i < tails.size(); ++i) {
    for (auto j : tails.tuple(i)) mix(j);
  }
  return h;
}

void for_each_moment_cell(const std::function<void(const MomentCell&)>& fn) {
  std::uint64_t cell_index = 0;
  for (std::uint32_t p : {101u, 1009u, 9973u}) {
    const auto b = bundle(p);
    const std::uint32_t q = p;
    const std::vector<std::uint32_t> sizes = {static_cast<std::uint32_t>(std::ceil(std::sqrt(static_cast<double>(q)))),
                                              static_cast<std::uint32_t>(std::ceil(q / 10.0)), q - 2};
    for (unsigned m : {2u, 3u}) {
      for (auto s1 : sizes) {
        for (auto s2 : sizes) {
          for (std::uint32_t draw = 0; draw < 50; ++draw, ++cell_index) {
            auto a1 = CharSubset::random(q, s1, stream_seed(kSeed, kStreamA1, cell_index));
            auto a2 = CharSubset::random(q, s2, stream_seed(kSeed, kStreamA2, cell_index));
            auto tails = m == 2 ? TailSet::empty_tail(q) : TailSet::random(q, 1, 1, stream_seed(kSeed, kStreamB, cell_index));
            const auto key = set_key(q, a1, a2, tails);
            fn(MomentCell{b.get(), m, std::move(a1), std::move(a2), std::move(tails), key});
          }
        }
      }
    }
  }
}

Outcome criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  std::uint64_t checks = 0;
  std::uint64_t fails = 0;
  std::uint64_t cells = 0;
  double worst1 = 0;
  double worst2 = 0;
  for_each_moment_cell([&](const MomentCell& c) {
    ++cells;
    const auto mom = moments_fast(c.b->gtab, c.a1, c.a2, c.tails, 8);
    const double q = c.b->field.q();
    const double a1 = static_cast<double>(c.a1.size());
    const double a2 = static_cast<double>(c.a2.size());
    const double bsz = static_cast<double>(c.tails.size());
    for (unsigned n = 1; n <= 8; ++n) {
      const double measured = std::abs(mom(n));
      const double rhs2 = bound_em2_rhs(q, a1, a2, bsz, n);
      worst2 = std::max(worst2, measured / rhs2);
      ++checks;
      if (measured > rhs2 * (1 + kMomentSlack)) ++fails;
      for (unsigned s = 1; s <= 3; ++s) {
        const double rhs1 = bound_em1_rhs(q, a1, a2, bsz, s, n);
        worst1 = std::max(worst1, measured / rhs1);
        ++checks;
        if (measured > rhs1 * (1 + kMomentSlack)) ++fails;
      }
    }
  });
  const double secs = seconds_since(t0);
  out.pass = fails == 0 && secs < kLimitC4;
  out.detail = std::to_string(cells) + " draws, " + std::to_string(checks) + " comparisons, " + std::to_string(fails) +
               " violations; max |M|/eM1 = " + fmt(worst1) + ", max |M|/eM2 = " + fmt(worst2) + "; " + fmt(secs) +
               " s (limit " + fmt(kLimitC4) + ")";
  return out;
}

// ---------------------------------------------------------------------------
// 5. S-sum bounds

Outcome criterion5() {
  Outcome out;
  std::uint64_t trivial = 0;
  std::uint64_t katz = 0;
  std::uint64_t fails = 0;
  double worst = 0;
  Rng rng(kSeed + 5);
  for (std::uint32_t p : {101u, 1009u}) {
    const auto b = bundle(p);
    const double q = p;
    for (unsigned s = 1; s <= 3; ++s) {
      for (unsigned n = 1; n <= 2; ++n) {
        for (int trial = 0; trial < 1000; ++trial) {
          std::vector<std::uint32_t> eta(s);
          std::vector<std::uint32_t> rho(s);
          for (auto& e : eta) e = static_cast<std::uint32_t>(rng.below(p - 1));
          for (auto& r : rho) r = static_cast<std::uint32_t>(rng.below(p - 1));
          const auto lambda = static_cast<std::uint32_t>(rng.below(p - 1));
          const double val = std::abs(s_sum(b->gtab, eta, rho, lambda, n));
          ++trivial;
          if (val > q - 2) ++fails;
          if (!is_permutation_of(eta, rho)) {
            const double bound = s * n * (q - 1) / std::sqrt(q) + 2.0 * s / std::pow(q, n / 2.0);
            worst = std::max(worst, val / bound);
            ++katz;
            if (val > bound) ++fails;
          }
        }
      }
    }
  }
  out.pass = fails == 0;
  out.detail = std::to_string(trivial) + " draws over {101, 1009} x s <= 3 x n <= 2; " + std::to_string(katz) +
               " non-permutation draws; " + std::to_string(fails) + " violations; max |S|/Katz bound = " + fmt(worst);
  return out;
}

// ---------------------------------------------------------------------------
// 6. Discrepancy engine

/// Extreme discrepancy over arcs whose endpoints lie on a mesh of M points or
/// on data points, each arc taken closed and open. Brute force over all
/// endpoint pairs.
double mesh_oracle(const std::vector<double>& pts_in, std::size_t mesh) {
  std::vector<double> pts = pts_in;
  std::sort(pts.begin(), pts.end());
  std::vector<double> ends(pts);
  for (std::size_t i = 0; i < mesh; ++i) ends.push_back(static_cast<double>(i) / static_cast<double>(mesh));
  std::sort(ends.begin(), ends.end());
  ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
  const std::size_t e = ends.size();
  const double n = static_cast<double>(pts.size());
  std::vector<double> lt(e);
  std::vector<double> le(e);
  for (std::size_t i = 0; i < e; ++i) {
    lt[i] = static_cast<double>(std::lower_bound(pts.begin(), pts.end(), ends[i]) - pts.begin());
    le[i] = static_cast<double>(std::upper_bound(pts.begin(), pts.end(), ends[i]) - pts.begin());
  }
  double best = 0;
  for (std::size_t i = 0; i < e; ++i) {
    const double a = ends[i];
    best = std::max(best, (le[i] - lt[i]) / n);  // [a, a] and the circle minus a
    double local = 0;
    for (std::size_t j = i + 1; j < e; ++j) {
      const double len = ends[j] - a;
      local = std::max(local, (le[j] - lt[i]) / n - len);
      local = std::max(local, len - (lt[j] - le[i]) / n);
    }
    for (std::size_t j = 0; j < i; ++j) {
      const double len = 1 - (a - ends[j]);
      local = std::max(local, (n - lt[i] + le[j]) / n - len);
      local = std::max(local, len - (n - le[i] + lt[j]) / n);
    }
    best = std::max(best, local);
  }
  return best;
}

std::vector<std::vector<double>> criterion6_sets() {
  std::vector<std::vector<double>> sets;
  Rng rng(kSeed + 6);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.below(256));
    std::vector<double> v(n);
    switch (i % 4) {
      case 0:
        for (auto& x : v) x = rng.unit();
        break;
      case 1:
        for (auto& x : v) x = std::fmod(0.7 + 0.25 * std::pow(rng.unit(), 3), 1.0);
        break;
      case 2:
        for (std::size_t t = 0; t < n; ++t) v[t] = std::fmod((t + 0.1 * rng.unit()) / static_cast<double>(n), 1.0);
        break;
      default:
        for (std::size_t t = 0; t < n; ++t) v[t] = t % 3 == 0 || t == 0 ? rng.unit() : v[t - 1];
        break;
    }
    sets.push_back(std::move(v));
  }
  // Jacobi angle sets from small fields
  for (std::uint32_t p : {5u, 7u, 11u, 13u, 17u}) {
    const auto b = bundle(p);
    auto s = angles_from_subsets(b->gtab, CharSubset::full(p), CharSubset::full(p), TailSet::empty_tail(p));
    sets.push_back(std::move(s.thetas));
  }
  return sets;
}

Outcome criterion6() {
  Outcome out;
  const auto sets = criterion6_sets();
  std::size_t fails = 0;
  double worst = 0;
  for (const auto& s : sets) {
    const double exact = discrepancy_exact(AngleSet{s, false}).d_exact;
    const double oracle = mesh_oracle(s, static_cast<std::size_t>(kMeshPoints));
    const double tol = 2 / kMeshPoints + 1.0 / static_cast<double>(s.size());
    worst = std::max(worst, std::abs(exact - oracle) / tol);
    if (std::abs(exact - oracle) > tol || oracle > exact + 1e-12) ++fails;
  }
  std::size_t spaced_fails = 0;
  for (std::size_t n : {2u, 4u, 8u, 64u}) {
    std::vector<double> v;
    for (std::size_t t = 0; t < n; ++t) v.push_back(static_cast<double>(t) / static_cast<double>(n));
    if (std::abs(discrepancy_exact(AngleSet{v, false}).d_exact - 1.0 / static_cast<double>(n)) > kSpacingTol) {
      ++spaced_fails;
    }
  }
  const bool single_ok = discrepancy_exact(AngleSet{{0.3}, false}).d_exact == 1.0;
  const auto f5 = bundle(5);
  const auto a = CharSubset::explicit_indices(5, {2});
  const auto empty_set = angles_from_subsets(f5->gtab, a, a, TailSet::empty_tail(5));
  const auto empty_rep = discrepancy_exact(empty_set);
  const bool empty_ok = empty_set.empty_convention && empty_rep.d_exact == 1.0 && empty_rep.empty_convention;
  out.pass = fails == 0 && spaced_fails == 0 && single_ok && empty_ok;
  out.detail = std::to_string(sets.size() - fails) + "/" + std::to_string(sets.size()) +
               " sets match the mesh oracle (worst " + fmt(worst) + " x tolerance); equally spaced " +
               std::to_string(4 - spaced_fails) + "/4; single point " + (single_ok ? "ok" : "wrong") +
               "; empty A-circle " + (empty_ok ? "ok" : "wrong");
  return out;
}

// ---------------------------------------------------------------------------
// 7. Erdos-Turan consistency

struct EtTally {
  std::uint64_t sets = 0;
  std::uint64_t checks = 0;
  std::uint64_t fails = 0;
  double worst = 0;  // max D / rhs

  void check(double d, std::span<const cplx> moments, std::uint64_t count) {
    ++sets;
    for (unsigned k = 1; k <= 64; ++k) {
      const double rhs = erdos_turan_rhs(moments, count, k);
      worst = std::max(worst, d / rhs);
      ++checks;
      if (d > rhs) ++fails;
    }
  }
};

Outcome criterion7() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  EtTally tally;
  for (const auto& s : criterion6_sets()) {
    const auto moments = angle_moments(s, 64);
    tally.check(discrepancy_exact(AngleSet{s, false}).d_exact, moments, s.size());
  }
  std::unordered_map<std::uint64_t, bool> done;
  std::uint64_t empty = 0;
  for_each_moment_cell([&](const MomentCell& c) {
    if (done.count(c.key)) return;
    done[c.key] = true;
    auto angles = angles_from_subsets(c.b->gtab, c.a1, c.a2, c.tails);
    if (angles.empty_convention) {
      ++empty;
      return;
    }
    const std::uint64_t n = angles.size();
    std::vector<cplx> moments;
    if (n <= 2000000) {
      moments = angle_moments(angles.thetas, 64);
    } else {
      moments = moments_fast(c.b->gtab, c.a1, c.a2, c.tails, 64).values;
    }
    const double d = discrepancy_exact(std::move(angles)).d_exact;
    tally.check(d, moments, n);
  });
  out.pass = tally.fails == 0;
  out.detail = std::to_string(tally.sets) + " distinct angle sets (criteria 4 and 6), K = 1..64: " +
               std::to_string(tally.fails) + " violations of " + std::to_string(tally.checks) +
               "; max D/rhs = " + fmt(tally.worst) + "; " + fmt(seconds_since(t0)) + " s";
  if (empty) out.detail += "; " + std::to_string(empty) + " empty sets skipped";
  return out;
}

// ---------------------------------------------------------------------------
// 8. Equidistribution trends

Outcome criterion8() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  RunConfig base;
  base.seed = kSeed;

  const auto full = run_sweep(preset_sweep("e1-trend", base));
  std::vector<double> d_full;
  std::vector<double> c_full;
  for (const auto& r : full.rows) {
    if (r.bound == "D_vs_e1" && r.status == "ok") {
      d_full.push_back(*r.measured);
      c_full.push_back(*r.measured / *r.rhs);
    }
  }
  bool full_ok = d_full.size() == 3;
  for (std::size_t i = 1; full_ok && i < d_full.size(); ++i) full_ok = d_full[i] < d_full[i - 1];
  const double spread = c_full.empty() ? 0
                                       : *std::max_element(c_full.begin(), c_full.end()) /
                                             *std::min_element(c_full.begin(), c_full.end());
  const bool spread_ok = c_full.size() == 3 && spread <= kTrendFactor;

  const auto sparse = run_sweep(preset_sweep("e0-trend", base));
  std::map<std::uint64_t, std::pair<double, int>> by_q;
  for (const auto& r : sparse.rows) {
    if (r.bound == "D_vs_e0" && r.status == "ok") {
      by_q[r.q].first += *r.measured;
      by_q[r.q].second += 1;
    }
  }
  std::vector<double> d_sparse;
  for (const auto& [q, acc] : by_q) d_sparse.push_back(acc.first / acc.second);
  bool sparse_ok = d_sparse.size() == 3;
  for (std::size_t i = 1; sparse_ok && i < d_sparse.size(); ++i) sparse_ok = d_sparse[i] < d_sparse[i - 1];

  const double secs = seconds_since(t0);
  out.pass = full_ok && spread_ok && sparse_ok && secs < kLimitC8;
  auto list = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s;
  };
  out.detail = "full sets D = [" + list(d_full) + "] " + (full_ok ? "decreasing" : "NOT decreasing") +
               ", fitted C = [" + list(c_full) + "] spread " + fmt(spread) + " (limit " + fmt(kTrendFactor) +
               "); sparse sets mean D = [" + list(d_sparse) + "] " + (sparse_ok ? "decreasing" : "NOT decreasing") +
               "; " + fmt(secs) + " s (limit " + fmt(kLimitC8) + ")";
  return out;
}

// ---------------------------------------------------------------------------
// 9. Determinism

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> csv_cells(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (char ch : line) {
      if (ch == '"') {
        quoted = !quoted;
      } else if (ch == ',' && !quoted) {
        cells.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    cells.push_back(cur);
    rows.push_back(std::move(cells));
  }
  return rows;
}

Outcome criterion9() {
  Outcome out;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("jdist_acceptance_" + std::to_string(kSeed));
  fs::create_directories(dir);
  RunConfig c;
  c.p = 1009;
  c.m = 3;
  c.a1 = SubsetSpec::parse("random:sqrt");
  c.a2 = SubsetSpec::parse("random:qfrac:0.3");
  c.b = TailSpec::parse("random:3");
  c.k_policy = KPolicy::parse("fixed:12");
  c.moment_method = MomentMethod::Direct;
  c.exact_cap = 1u << 20;
  c.draws = 3;
  c.seed = kSeed;
  auto run_cli = [&](const std::string& tag, unsigned workers) {
    RunConfig cc = c;
    cc.workers = workers;
    cc.output = (dir / (tag + ".csv")).string();
    const auto conf = dir / (tag + ".conf");
    std::ofstream(conf) << serialize_config(cc);
    const std::string cmd = std::string("env -u JDIST_WORKERS '") + JDIST_CLI + "' run --config '" + conf.string() +
                            "' 2> '" + (dir / (tag + ".log")).string() + "'";
    if (std::system(cmd.c_str()) != 0) throw Error(ErrorKind::InvariantViolation, "CLI run failed: " + cmd);
    return slurp(cc.output);
  };
  const auto first = run_cli("w1_a", 1);
  const auto second = run_cli("w1_b", 1);
  const auto four = run_cli("w4", 4);
  const bool identical = !first.empty() && first == second;

  const auto ra = csv_cells(first);
  const auto rb = csv_cells(four);
  bool same_shape = ra.size() == rb.size() && ra.size() > 1;
  std::size_t numeric = 0;
  std::size_t mismatches = 0;
  double worst = 0;
  for (std::size_t i = 0; same_shape && i < ra.size(); ++i) {
    if (ra[i].size() != rb[i].size()) {
      same_shape = false;
      break;
    }
    for (std::size_t j = 0; j < ra[i].size(); ++j) {
      if (ra[i][j] == rb[i][j]) continue;
      char* end_a = nullptr;
      char* end_b = nullptr;
      const double x = std::strtod(ra[i][j].c_str(), &end_a);
      const double y = std::strtod(rb[i][j].c_str(), &end_b);
      if (ra[i][j].empty() || *end_a != '\0' || *end_b != '\0') {
        ++mismatches;
        continue;
      }
      ++numeric;
      const double rel = std::abs(x - y) / std::max(std::abs(x), std::abs(y));
      worst = std::max(worst, rel);
      if (rel > kWorkerRelTol) ++mismatches;
    }
  }
  fs::remove_all(dir);
  out.pass = identical && same_shape && mismatches == 0;
  out.detail = std::string("repeated run ") + (identical ? "byte-identical" : "DIFFERS") + " (" +
               std::to_string(ra.size() - 1) + " rows); 1 vs 4 workers: " + std::to_string(numeric) +
               " differing numeric cells, worst relative difference " + fmt(worst) + " (limit " + fmt(kWorkerRelTol) +
               "), " + std::to_string(mismatches) + " out of tolerance";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"jdist acceptance criteria"};
  std::vector<int> which;
  app.add_option("--criterion", which, "criterion number(s) 1-9; default all")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);
  if (which.empty()) which = {1, 2, 3, 4, 5, 6, 7, 8, 9};

  const std::map<int, std::pair<const char*, Outcome (*)()>> criteria = {
      {1, {"Gauss-sum facts", criterion1}},        {2, {"quotient identity", criterion2}},
      {3, {"Kloosterman", criterion3}},            {4, {"moment bounds", criterion4}},
      {5, {"S-sum bounds", criterion5}},           {6, {"discrepancy engine", criterion6}},
      {7, {"Erdos-Turan consistency", criterion7}}, {8, {"equidistribution trends", criterion8}},
      {9, {"determinism", criterion9}}};
  bool all = true;
  for (int n : which) {
    const auto& [name, fn] = criteria.at(n);
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << "criterion " << n << " [" << (o.pass ? "PASS" : "FAIL") << "] " << name << ": " << o.detail << std::endl;
  }
  return all ? 0 : 1;
}

#pragma once

#include <jdist/charsums.hpp>
#include <jdist/equidist.hpp>
#include <jdist/rng.hpp>

#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace jdist {

enum class VerifyLevel { Quick, Full };

struct VerifyOptions {
  VerifyLevel level = VerifyLevel::Quick;
  bool corrupt_gauss = false;  // fault injection: scale one Gauss value by 1.01
  std::uint64_t seed = 1;
};

struct SuiteCount {
  std::uint64_t checks = 0;
  std::uint64_t failures = 0;
};

struct VerifyReport {
  std::map<std::string, SuiteCount> suites;
  std::vector<nlohmann::json> failures;  // each carries its inputs for replay

  [[nodiscard]] bool passed() const { return failures.empty(); }

  void check(const std::string& suite, bool ok, const nlohmann::json& inputs) {
    auto& s = suites[suite];
    ++s.checks;
    if (!ok) {
      ++s.failures;
      if (failures.size() < 200) failures.push_back({{"suite", suite}, {"inputs", inputs}});
    }
  }

  [[nodiscard]] nlohmann::json to_json(VerifyLevel level) const {
    nlohmann::json j;
    j["level"] = level == VerifyLevel::Quick ? "quick" : "full";
    j["passed"] = passed();
    for (const auto& [name, c] : suites) j["suites"][name] = {{"checks", c.checks}, {"failures", c.failures}};
    j["failures"] = failures;
    return j;
  }
};

namespace detail {

struct FieldCase {
  std::uint32_t p;
  unsigned k;
};

inline std::vector<FieldCase> verify_fields(VerifyLevel level) {
  std::vector<FieldCase> out = {{7, 1}, {3, 2}, {2, 4}, {5, 2}, {101, 1}, {2, 8}, {251, 1}};
  if (level == VerifyLevel::Full) {
    for (FieldCase f : {FieldCase{1009, 1}, FieldCase{3, 7}, FieldCase{2, 12}, FieldCase{4093, 1}}) out.push_back(f);
  }
  return out;
}

inline double rel_err(cplx a, cplx b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace detail

/// Oracle-equivalence and bound-inequality checks over small fields (quick:
/// q <= 2^8, full: q <= 2^12).
inline VerifyReport verify_suite(const VerifyOptions& opt) {
  VerifyReport rep;
  Rng rng(opt.seed);
  const bool full = opt.level == VerifyLevel::Full;
  bool corrupted = false;
  for (const auto& fc : detail::verify_fields(opt.level)) {
    const auto field = Field::build(fc.p, fc.k, std::nullopt, opt.seed);
    const std::uint32_t q = field.q();
    const nlohmann::json fj = {{"p", fc.p}, {"k", fc.k}, {"modulus", field.modulus()}};
    const Characters chars(field);
    GaussTable gtab = gauss_all(chars);
    if (opt.corrupt_gauss && !corrupted) {
      std::vector<cplx> vals(gtab.values().begin(), gtab.values().end());
      vals[1] *= 1.01;
      gtab = GaussTable(q, std::move(vals));
      corrupted = true;
    }
    const double tol = sum_tolerance(q);

    // Gauss modulus and the trivial character
    rep.check("gauss_abs", std::abs(gtab[MulCharIndex(0)] + 1.0) <= tol, {{"field", fj}, {"j", 0}});
    for (std::uint32_t j = 1; j < field.group_order(); ++j) {
      const double err = std::abs(std::abs(gtab[MulCharIndex(j)]) - std::sqrt(static_cast<double>(q)));
      rep.check("gauss_abs", err <= tol, {{"field", fj}, {"j", j}, {"abs_error", err}});
    }
    // DFT route against the literal sum
    for (std::uint32_t j = 0; j < field.group_order(); j += 1 + field.group_order() / 16) {
      const cplx direct = gauss_direct(chars, MulCharIndex(j));
      rep.check("gauss_routes", std::abs(direct - gtab[MulCharIndex(j)]) <= tol, {{"field", fj}, {"j", j}});
    }
    // Jacobi quotient identity
    const int jacobi_trials = full ? 40 : 15;
    for (int t = 0; t < jacobi_trials; ++t) {
      const std::size_t m = 2 + static_cast<std::size_t>(rng.below(3));
      std::vector<std::uint32_t> idx(m);
      for (auto& j : idx) j = 1 + static_cast<std::uint32_t>(rng.below(field.group_order() - 1));
      const CharTuple tuple(q, idx);
      if (!tuple.is_in_a_circle() || (m - 1) * q * (q - 1.0) > static_cast<double>(kDirectBudget)) continue;
      const auto direct = jacobi_direct(chars, tuple);
      const auto via = jacobi_via_gauss(gtab, tuple);
      rep.check("jacobi_routes", detail::rel_err(via.value, direct.value) <= 1e-8, {{"field", fj}, {"indices", idx}});
    }
    // Kloosterman inversion and Deligne
    for (unsigned n = 1; n <= 3; ++n) {
      const auto table = kloosterman_all(gtab, n);
      for (std::uint32_t t = 0; t < field.group_order(); t += 1 + field.group_order() / 8) {
        if (std::pow(field.group_order(), n - 1.0) <= static_cast<double>(kDirectBudget) / 8) {
          const cplx direct = kloosterman_direct(chars, n, field.pow_g(t));
          rep.check("kloosterman_routes", detail::rel_err(table.values[t], direct) <= 1e-8,
                    {{"field", fj}, {"n", n}, {"log_a", t}});
        }
      }
      double worst = 0;
      for (const auto& v : table.values) worst = std::max(worst, std::abs(v));
      rep.check("kloosterman_deligne", worst <= table.deligne_bound() * (1 + 1e-9), {{"field", fj}, {"n", n}});
    }
    if (q < 5) continue;
    // Moments: both routes and both moment bounds; angle sets: discrepancy
    // engine and Erdos-Turan
    for (int t = 0; t < (full ? 4 : 2); ++t) {
      const auto a1 = CharSubset::random(q, 1 + static_cast<std::uint32_t>(rng.below(q - 2)), rng.next());
      const auto a2 = CharSubset::random(q, 1 + static_cast<std::uint32_t>(rng.below(q - 2)), rng.next());
      const bool with_tail = t % 2 == 1;
      const auto tails = with_tail ? TailSet::random(q, 1, 2, rng.next()) : TailSet::empty_tail(q);
      const nlohmann::json sj = {{"field", fj}, {"a1", a1.to_json()}, {"a2", a2.to_json()}, {"tails", tails.to_json()}};
      const unsigned n_max = 8;
      const auto fast = moments_fast(gtab, a1, a2, tails, n_max);
      const auto direct = moments_direct(gtab, a1, a2, tails, n_max);
      const double bsz = static_cast<double>(tails.size());
      for (unsigned n = 1; n <= n_max; ++n) {
        const double scale = std::max(1.0, static_cast<double>(fast.count));
        rep.check("moment_routes", std::abs(fast(n) - direct(n)) <= 1e-9 * scale, sj);
        for (unsigned s = 1; s <= 3; ++s) {
          const double rhs = bound_em1_rhs(q, static_cast<double>(a1.size()), static_cast<double>(a2.size()), bsz, s, n);
          rep.check("moment_bound_eM1", std::abs(direct(n)) <= rhs * (1 + 1e-6), sj);
        }
        const double rhs2 = bound_em2_rhs(q, static_cast<double>(a1.size()), static_cast<double>(a2.size()), bsz, n);
        rep.check("moment_bound_eM2", std::abs(direct(n)) <= rhs2 * (1 + 1e-6), sj);
      }
      auto angles = angles_from_subsets(gtab, a1, a2, tails);
      if (angles.empty_convention) continue;
      sort_unit_interval(angles.thetas);
      const double sweep = extreme_discrepancy_sweep(angles.thetas);
      const double star = star_discrepancy(angles.thetas);
      if (angles.size() <= 4096) {
        const double quad = extreme_discrepancy_quadratic(angles.thetas);
        rep.check("discrepancy_engine", std::abs(quad - sweep) <= 1e-12, sj);
      }
      rep.check("discrepancy_bracket", star <= sweep + 1e-15 && sweep <= 2 * star + 1e-15, sj);
      const auto am = moments_fast(gtab, a1, a2, tails, 64);
      for (unsigned k = 1; k <= 64; ++k) {
        rep.check("erdos_turan", sweep <= erdos_turan_rhs(am.values, am.count, k), sj);
      }
    }
    // S-sums
    if (q >= 7) {
      for (int t = 0; t < (full ? 40 : 10); ++t) {
        const unsigned s = 1 + static_cast<unsigned>(rng.below(3));
        const unsigned n = 1 + static_cast<unsigned>(rng.below(2));
        std::vector<std::uint32_t> eta(s);
        std::vector<std::uint32_t> rho(s);
        for (auto& e : eta) e = 1 + static_cast<std::uint32_t>(rng.below(q - 2));
        for (auto& r : rho) r = 1 + static_cast<std::uint32_t>(rng.below(q - 2));
        const auto lambda = static_cast<std::uint32_t>(rng.below(q - 1));
        const double val = std::abs(s_sum(gtab, eta, rho, lambda, n));
        const nlohmann::json ij = {{"field", fj}, {"eta", eta}, {"rho", rho}, {"lambda", lambda}, {"n", n}};
        rep.check("s_sum_trivial", val <= q - 2 + 1e-9, ij);
        if (!is_permutation_of(eta, rho)) {
          const double katz = s * n * (q - 1.0) / std::sqrt(static_cast<double>(q)) + 2.0 * s / std::pow(q, n / 2.0);
          rep.check("s_sum_katz", val <= katz * (1 + 1e-9), ij);
        }
      }
    }
  }
  return rep;
}

}  // namespace jdist

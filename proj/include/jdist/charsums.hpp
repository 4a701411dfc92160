#pragma once

#include <jdist/characters.hpp>
#include <jdist/dft.hpp>
#include <jdist/error.hpp>
#include <jdist/field.hpp>
#include <jdist/summation.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <thread>
#include <vector>

namespace jdist {

/// Term budget for the direct-summation oracles.
inline constexpr std::uint64_t kDirectBudget = std::uint64_t{1} << 24;

/// Absolute tolerance for a q-term sum of unit-modulus terms: 64 q eps.
inline double sum_tolerance(std::uint64_t q) {
  return 64.0 * static_cast<double>(q) * std::numeric_limits<double>::epsilon();
}

/// Gauss sums G(chi_j) for every character, with derived unit phases
/// G/|G| and angles arg(G)/(2 pi) in [0, 1).
class GaussTable {
 public:
  GaussTable(std::uint32_t q, std::vector<cplx> values) : q_(q), values_(std::move(values)) {
    const double root_q = std::sqrt(static_cast<double>(q_));
    phases_.resize(values_.size());
    angles_.resize(values_.size());
    for (std::size_t j = 0; j < values_.size(); ++j) {
      const cplx v = values_[j];
      phases_[j] = j == 0 ? v / root_q : v / std::abs(v);
      double a = std::arg(v) / (2 * std::numbers::pi);
      if (a < 0) a += 1.0;
      if (a >= 1.0) a = 0.0;
      angles_[j] = a;
    }
  }

  [[nodiscard]] std::uint32_t q() const { return q_; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] cplx operator[](MulCharIndex j) const { return values_[j.value]; }
  [[nodiscard]] std::span<const cplx> values() const { return values_; }

  /// q^{-1/2} G(chi_j); unit modulus (renormalized) for j != 0 and -q^{-1/2}
  /// for the trivial character.
  [[nodiscard]] cplx phase(std::uint32_t j) const { return phases_[j]; }
  [[nodiscard]] std::span<const cplx> phases() const { return phases_; }
  /// arg G(chi_j) / (2 pi), in [0, 1).
  [[nodiscard]] double angle(std::uint32_t j) const { return angles_[j]; }
  [[nodiscard]] std::span<const double> angles() const { return angles_; }

 private:
  std::uint32_t q_;
  std::vector<cplx> values_;
  std::vector<cplx> phases_;
  std::vector<double> angles_;
};

/// G(chi_j) = sum_{a != 0} psi(a) chi_j(a), summed literally (pairwise).
inline cplx gauss_direct(const Characters& chars, MulCharIndex j) {
  const auto& f = chars.field();
  std::vector<cplx> terms(f.group_order());
  const auto& exp = f.exp_table();
  for (std::uint32_t t = 0; t < f.group_order(); ++t) {
    terms[t] = chars.psi(FieldElement(exp[t])) * chars.chi_at_log(j.value, t);
  }
  return pairwise_sum<cplx>(terms);
}

/// All Gauss sums at once: G(chi_j) = sum_t psi(g^t) e^{2 pi i j t/(q-1)} is
/// one length-(q-1) DFT of t -> psi(g^t).
inline GaussTable gauss_all(const Characters& chars) {
  const auto x = chars.psi_on_powers();
  return GaussTable(chars.q(), dft(x, +1));
}

/// A Jacobi sum with its normalized angle theta, J = |J| e^{2 pi i theta}.
struct JacobiValue {
  cplx value;
  double angle = 0;
};

inline double turns_of(cplx z) {
  double a = std::arg(z) / (2 * std::numbers::pi);
  if (a < 0) a += 1.0;
  if (a >= 1.0) a = 0.0;
  return a;
}

/// J(chi_1..chi_m) = sum over a_1 + ... + a_m = 1, all a_i != 0, of
/// prod chi_i(a_i). The solution set is swept one coordinate at a time:
///   F_1(c) = chi_1(c),   F_{i+1}(c) = sum_{a != 0} F_i(c - a) chi_{i+1}(a),
/// so J = F_m(1). This is the literal sum regrouped by partial sums; it uses
/// no Gauss sums. Work is (m-1) q (q-1) terms, checked against `budget`.
inline JacobiValue jacobi_direct(const Characters& chars, const CharTuple& tuple,
                                 std::uint64_t budget = kDirectBudget) {
  const auto& f = chars.field();
  const std::uint32_t q = f.q();
  const std::uint64_t work = static_cast<std::uint64_t>(tuple.size() - 1) * q * (q - 1);
  if (work > budget) {
    throw Error(ErrorKind::BudgetExceeded, "direct Jacobi sum needs " + std::to_string(work) + " terms");
  }
  const auto idx = tuple.indices();
  auto chi_table = [&](std::uint32_t j) {
    std::vector<cplx> out(q, cplx{});
    for (std::uint32_t x = 1; x < q; ++x) out[x] = chars.chi_at_log(j, f.dlog(FieldElement(x)));
    return out;
  };
  std::vector<cplx> current = chi_table(idx[0]);
  std::vector<cplx> terms(q - 1);
  // sub_table[c][a] would be q^2; compute c - a on the fly instead.
  for (std::size_t i = 1; i < idx.size(); ++i) {
    const auto chi_i = chi_table(idx[i]);
    const bool last = i + 1 == idx.size();
    std::vector<cplx> next(q, cplx{});
    for (std::uint32_t c = 0; c < q; ++c) {
      if (last && c != 1) continue;
      for (std::uint32_t a = 1; a < q; ++a) {
        terms[a - 1] = current[f.sub(FieldElement(c), FieldElement(a)).value] * chi_i[a];
      }
      next[c] = pairwise_sum<cplx>(terms);
    }
    current = std::move(next);
  }
  const cplx value = current[1];
  return {value, turns_of(value)};
}

/// J = G(chi_1) ... G(chi_m) / G(chi_1 ... chi_m), for nontrivial characters
/// with nontrivial product. The angle comes from the unit phases, so no
/// q^{(m-1)/2}-scale number enters it.
inline JacobiValue jacobi_via_gauss(const GaussTable& gtab, const CharTuple& tuple) {
  if (tuple.has_trivial_entry()) {
    throw Error(ErrorKind::TrivialCharacterInTuple, "Jacobi sums here take nontrivial characters only");
  }
  const MulCharIndex prod = tuple.product_index();
  if (prod.is_trivial()) throw Error(ErrorKind::TrivialProduct, "character product is trivial");
  cplx unit = 1.0;
  std::size_t chain = 0;
  double turns = 0;
  for (auto j : tuple.indices()) {
    unit *= gtab.phase(j);
    turns += gtab.angle(j);
    if (++chain % 64 == 0) unit /= std::abs(unit);
  }
  unit *= std::conj(gtab.phase(prod.value));
  unit /= std::abs(unit);
  turns -= gtab.angle(prod.value);
  turns -= std::floor(turns);
  if (turns >= 1.0) turns = 0.0;
  const double scale = std::pow(static_cast<double>(gtab.q()), (static_cast<double>(tuple.size()) - 1) / 2);
  return {unit * scale, turns};
}

/// Normalized Jacobi angle from the Gauss angle table:
///   theta = frac(sum_i angle(j_i) - angle(j_1 + ... + j_m)).
inline double jacobi_angle(const GaussTable& gtab, std::span<const std::uint32_t> indices) {
  const CharGroup group(gtab.q());
  std::uint64_t s = 0;
  double turns = 0;
  for (auto j : indices) {
    s += j;
    turns += gtab.angle(j);
  }
  turns -= gtab.angle(group.reduce(static_cast<std::int64_t>(s % group.order())));
  turns -= std::floor(turns);
  return turns >= 1.0 ? 0.0 : turns;
}

/// Kl_n(a) indexed by dlog(a).
struct KloostermanTable {
  unsigned n = 1;
  std::uint32_t q = 0;
  std::vector<cplx> values;

  /// Deligne: |Kl_n(a)| <= n q^{(n-1)/2}.
  [[nodiscard]] double deligne_bound() const {
    return n * std::pow(static_cast<double>(q), (static_cast<double>(n) - 1) / 2);
  }
};

/// Kl_n(a) = sum over a_1 ... a_n = a of psi(a_1 + ... + a_n), enumerating
/// a_1..a_{n-1} in F_q^x; (q-1)^{n-1} terms.
inline cplx kloosterman_direct(const Characters& chars, unsigned n, FieldElement a,
                               std::uint64_t budget = kDirectBudget) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "Kloosterman power must be >= 1");
  const auto& f = chars.field();
  const std::uint32_t order = f.group_order();
  const std::uint32_t log_a = f.dlog(a);
  double work = std::pow(static_cast<double>(order), static_cast<double>(n - 1));
  if (work > static_cast<double>(budget)) {
    throw Error(ErrorKind::BudgetExceeded, "direct Kloosterman sum needs " + std::to_string(work) + " terms");
  }
  if (n == 1) return chars.psi(a);
  const auto& exp = f.exp_table();
  PairwiseAccumulator<cplx> acc;
  // logs of a_1..a_{n-1}; a_n = a / (a_1 ... a_{n-1})
  std::vector<std::uint32_t> logs(n - 1, 0);
  for (;;) {
    std::uint64_t log_sum = 0;
    FieldElement sum(0);
    for (auto t : logs) {
      log_sum += t;
      sum = f.add(sum, FieldElement(exp[t]));
    }
    const auto last = static_cast<std::uint32_t>((log_a + order - log_sum % order) % order);
    sum = f.add(sum, FieldElement(exp[last]));
    acc.add(chars.psi(sum));
    std::size_t d = 0;
    while (d < logs.size() && ++logs[d] == order) logs[d++] = 0;
    if (d == logs.size()) break;
  }
  return acc.total();
}

/// Kl_n(g^t) = (q-1)^{-1} sum_j G(chi_j)^n e^{-2 pi i j t/(q-1)}: one inverse
/// DFT of j -> G(chi_j)^n, inverting G(chi)^n = sum_a Kl_n(a) chi(a).
inline KloostermanTable kloosterman_all(const GaussTable& gtab, unsigned n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "Kloosterman power must be >= 1");
  std::vector<cplx> powers(gtab.size());
  for (std::size_t j = 0; j < powers.size(); ++j) {
    const cplx g = gtab.values()[j];
    cplx r = 1.0;
    for (unsigned i = 0; i < n; ++i) r *= g;
    powers[j] = r;
  }
  auto values = dft(powers, -1);
  const double scale = 1.0 / static_cast<double>(gtab.size());
  for (auto& v : values) v *= scale;
  return {n, gtab.q(), std::move(values)};
}

/// S(eta, rho) = sum over chi outside C of
///   prod_i q^{-n} G(chi eta_i lambda)^n conj(G(chi rho_i lambda))^n,
/// where C = { (eta_i lambda)^{-1}, (rho_i lambda)^{-1} } is exactly the set of
/// chi making some shifted character trivial.
inline cplx s_sum(const GaussTable& gtab, std::span<const std::uint32_t> eta, std::span<const std::uint32_t> rho,
                  std::uint32_t lambda, unsigned n) {
  if (eta.size() != rho.size() || eta.empty()) {
    throw Error(ErrorKind::InvalidArgument, "eta and rho must have the same positive length s");
  }
  const CharGroup group(gtab.q());
  const std::uint32_t order = group.order();
  std::vector<bool> excluded(order, false);
  for (auto e : eta) excluded[group.conj(group.mul(e, lambda))] = true;
  for (auto r : rho) excluded[group.conj(group.mul(r, lambda))] = true;
  std::vector<cplx> terms;
  terms.reserve(order);
  for (std::uint32_t c = 0; c < order; ++c) {
    if (excluded[c]) continue;
    double turns = 0;
    for (std::size_t i = 0; i < eta.size(); ++i) {
      turns += gtab.angle(group.mul(group.mul(c, eta[i]), lambda));
      turns -= gtab.angle(group.mul(group.mul(c, rho[i]), lambda));
    }
    terms.push_back(cis_turns(turns * n));
  }
  return pairwise_sum<cplx>(terms);
}

/// True when rho is a rearrangement of eta.
inline bool is_permutation_of(std::span<const std::uint32_t> eta, std::span<const std::uint32_t> rho) {
  return eta.size() == rho.size() && std::is_permutation(eta.begin(), eta.end(), rho.begin());
}

/// Moments M^(n) = sum over A-circle of (normalized J)^n for n = 1..n_max.
struct Moments {
  std::vector<cplx> values;  // values[n-1] = M^(n)
  std::uint64_t count = 0;   // #A-circle

  [[nodiscard]] cplx operator()(unsigned n) const { return values.at(n - 1); }
};

inline unsigned resolve_workers(unsigned workers) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  return workers;
}

/// Direct moments: for each tuple of A-circle form its normalized Jacobi
/// phase z = u_1 u_2 prod u_b conj(u_prod) from the Gauss phases and
/// accumulate z, z^2, ..., z^{n_max}. Rows j1 are split over `workers`
/// contiguous blocks; each block sums pairwise and the block partials are
/// combined pairwise in block order.
inline Moments moments_direct(const GaussTable& gtab, const CharSubset& a1, const CharSubset& a2,
                              const TailSet& tails, unsigned n_max, unsigned workers = 1) {
  if (n_max < 1) throw Error(ErrorKind::InvalidArgument, "n_max must be >= 1");
  const CharGroup group(gtab.q());
  workers = std::min<unsigned>(resolve_workers(workers), static_cast<unsigned>(std::max<std::size_t>(1, a1.size())));
  const auto rows = a1.indices();
  std::vector<std::vector<PairwiseAccumulator<cplx>>> partial(workers, std::vector<PairwiseAccumulator<cplx>>(n_max));
  std::vector<std::uint64_t> counts(workers, 0);

  std::vector<cplx> tail_phase(tails.size());
  for (std::size_t b = 0; b < tails.size(); ++b) {
    cplx z = 1.0;
    for (auto j : tails.tuple(b)) z *= gtab.phase(j);
    tail_phase[b] = z;
  }

  auto work = [&](unsigned w) {
    const std::size_t lo = rows.size() * w / workers;
    const std::size_t hi = rows.size() * (w + 1) / workers;
    auto& acc = partial[w];
    for (std::size_t b = 0; b < tails.size(); ++b) {
      const std::uint32_t lambda = tails.product(b);
      for (std::size_t r = lo; r < hi; ++r) {
        const std::uint32_t j1 = rows[r];
        const cplx z1 = gtab.phase(j1) * tail_phase[b];
        for (auto j2 : a2.indices()) {
          const std::uint32_t prod = group.mul(group.mul(j1, j2), lambda);
          if (prod == 0) continue;
          cplx z = z1 * gtab.phase(j2) * std::conj(gtab.phase(prod));
          z /= std::abs(z);
          cplx zn = z;
          for (unsigned n = 0; n < n_max; ++n) {
            acc[n].add(zn);
            zn *= z;
            if ((n + 1) % 64 == 0) zn /= std::abs(zn);
          }
          ++counts[w];
        }
      }
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }

  Moments out;
  out.values.resize(n_max);
  std::vector<cplx> block(workers);
  for (unsigned n = 0; n < n_max; ++n) {
    for (unsigned w = 0; w < workers; ++w) block[w] = partial[w][n].total();
    out.values[n] = pairwise_sum<cplx>(block);
  }
  for (auto c : counts) out.count += c;
  return out;
}

/// Moments through the character group's Fourier transform. With
/// v_j = u_j^n (v_0 = 0), a = 1_{A1} v, b = 1_{A2} v and w = conj(v):
///   sum_{j1, j2} v_{j1} v_{j2} conj(v)_{j1+j2+lambda}
///     = (1/N) sum_f DFT+(a)_f DFT+(b)_f DFT-(w)_f e^{2 pi i f lambda/N},
/// and zeroing v_0 drops exactly the tuples with trivial product. Per n this
/// costs three length-(q-1) transforms plus O(q) per distinct tail product.
inline Moments moments_fast(const GaussTable& gtab, const CharSubset& a1, const CharSubset& a2, const TailSet& tails,
                            unsigned n_max) {
  if (n_max < 1) throw Error(ErrorKind::InvalidArgument, "n_max must be >= 1");
  const std::uint32_t order = gtab.q() - 1;
  const DftPlan plan(order);
  const bool same_sets = a1.size() == a2.size() && std::equal(a1.indices().begin(), a1.indices().end(),
                                                               a2.indices().begin());
  std::vector<std::uint32_t> lambdas;
  std::vector<double> tail_turns(tails.size());
  for (std::size_t b = 0; b < tails.size(); ++b) {
    lambdas.push_back(tails.product(b));
    double t = 0;
    for (auto j : tails.tuple(b)) t += gtab.angle(j);
    tail_turns[b] = t;
  }
  std::vector<std::uint32_t> distinct = lambdas;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<std::size_t> slot(order, 0);
  for (std::size_t i = 0; i < distinct.size(); ++i) slot[distinct[i]] = i;

  Moments out;
  out.values.resize(n_max);
  out.count = a_circle_count(a1, a2, tails);
  std::vector<cplx> v(order);
  std::vector<cplx> av(order);
  std::vector<cplx> bv(order);
  std::vector<cplx> wv(order);
  std::vector<cplx> corr(distinct.size());
  std::vector<cplx> terms(order);
  for (unsigned n = 1; n <= n_max; ++n) {
    v[0] = 0.0;
    for (std::uint32_t j = 1; j < order; ++j) v[j] = cis_turns(gtab.angle(j) * n);
    std::fill(av.begin(), av.end(), cplx{});
    std::fill(bv.begin(), bv.end(), cplx{});
    for (auto j : a1.indices()) av[j] = v[j];
    for (auto j : a2.indices()) bv[j] = v[j];
    for (std::uint32_t j = 0; j < order; ++j) wv[j] = std::conj(v[j]);
    auto fa = plan.transform(av, +1);
    const auto fb = same_sets ? fa : plan.transform(bv, +1);
    const auto fw = plan.transform(wv, -1);
    for (std::uint32_t f = 0; f < order; ++f) fa[f] *= fb[f] * fw[f];
    if (distinct.size() > 8) {
      auto full = plan.transform(fa, +1);
      for (std::size_t i = 0; i < distinct.size(); ++i) corr[i] = full[distinct[i]] / static_cast<double>(order);
    } else {
      for (std::size_t i = 0; i < distinct.size(); ++i) {
        const std::uint64_t lam = distinct[i];
        for (std::uint32_t f = 0; f < order; ++f) {
          terms[f] = fa[f] * unit_root(static_cast<std::int64_t>((f * lam) % order), order);
        }
        corr[i] = pairwise_sum<cplx>(terms) / static_cast<double>(order);
      }
    }
    PairwiseAccumulator<cplx> acc;
    for (std::size_t b = 0; b < tails.size(); ++b) acc.add(cis_turns(tail_turns[b] * n) * corr[slot[lambdas[b]]]);
    out.values[n - 1] = acc.total();
  }
  return out;
}

inline cplx moment(const GaussTable& gtab, const CharSubset& a1, const CharSubset& a2, const TailSet& tails,
                   unsigned n) {
  return moments_fast(gtab, a1, a2, tails, n).values.back();
}

}  // namespace jdist

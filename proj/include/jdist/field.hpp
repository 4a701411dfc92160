#pragma once

#include <jdist/error.hpp>
#include <jdist/rng.hpp>

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace jdist {

/// An element of F_q encoded as an integer in [0, q) whose base-p digits are
/// the polynomial coefficients (lowest degree first). 0 is the additive
/// identity and 1 the multiplicative identity.
struct FieldElement {
  std::uint32_t value = 0;

  constexpr FieldElement() = default;
  constexpr explicit FieldElement(std::uint32_t v) : value(v) {}

  [[nodiscard]] constexpr bool is_zero() const { return value == 0; }
  friend constexpr auto operator<=>(FieldElement, FieldElement) = default;
};

/// Largest field size for which tables are built.
inline constexpr std::uint64_t kMaxFieldSize = std::uint64_t{1} << 26;

namespace detail {

using Poly = std::vector<std::uint64_t>;  // coefficients mod p, lowest first

inline void trim(Poly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

inline std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % p);
}

inline std::uint64_t pow_mod(std::uint64_t base, std::uint64_t e, std::uint64_t p) {
  std::uint64_t r = 1 % p;
  base %= p;
  while (e > 0) {
    if (e & 1u) r = mul_mod(r, base, p);
    base = mul_mod(base, base, p);
    e >>= 1;
  }
  return r;
}

inline std::uint64_t inv_mod(std::uint64_t a, std::uint64_t p) { return pow_mod(a, p - 2, p); }

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

inline std::vector<std::uint64_t> prime_factors(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) {
      out.push_back(d);
      while (n % d == 0) n /= d;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

/// a mod f (f monic-or-not, nonzero), coefficients mod p.
inline Poly poly_mod(Poly a, const Poly& f, std::uint64_t p) {
  trim(a);
  const std::size_t df = f.size() - 1;
  const std::uint64_t lead_inv = inv_mod(f.back(), p);
  while (a.size() >= f.size()) {
    const std::uint64_t factor = mul_mod(a.back(), lead_inv, p);
    const std::size_t shift = a.size() - 1 - df;
    for (std::size_t i = 0; i <= df; ++i) {
      a[shift + i] = (a[shift + i] + p - mul_mod(factor, f[i], p)) % p;
    }
    trim(a);
  }
  return a;
}

inline Poly poly_mul(const Poly& a, const Poly& b, std::uint64_t p) {
  if (a.empty() || b.empty()) return {};
  Poly out(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] = (out[i + j] + mul_mod(a[i], b[j], p)) % p;
  }
  trim(out);
  return out;
}

inline Poly poly_mulmod(const Poly& a, const Poly& b, const Poly& f, std::uint64_t p) {
  return poly_mod(poly_mul(a, b, p), f, p);
}

inline Poly poly_powmod(Poly base, std::uint64_t e, const Poly& f, std::uint64_t p) {
  Poly r{1};
  base = poly_mod(std::move(base), f, p);
  while (e > 0) {
    if (e & 1u) r = poly_mulmod(r, base, f, p);
    base = poly_mulmod(base, base, f, p);
    e >>= 1;
  }
  return poly_mod(std::move(r), f, p);
}

inline Poly poly_gcd(Poly a, Poly b, std::uint64_t p) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    Poly r = poly_mod(a, b, p);
    a = std::move(b);
    b = std::move(r);
  }
  return a;
}

/// f of degree k is irreducible over F_p iff gcd(f, t^{p^i} - t) = 1 for
/// every 1 <= i <= k/2 (any reducible f has an irreducible factor of degree
/// d <= k/2, and such factors divide t^{p^d} - t).
inline bool is_irreducible(const Poly& f, std::uint64_t p) {
  const std::size_t k = f.size() - 1;
  if (k == 0) return false;
  if (k == 1) return true;
  if (f[0] == 0) return false;
  Poly h = poly_mod(Poly{0, 1}, f, p);
  for (std::size_t i = 1; i <= k / 2; ++i) {
    h = poly_powmod(h, p, f, p);
    Poly diff = h;
    if (diff.size() < 2) diff.resize(2, 0);
    diff[1] = (diff[1] + p - 1) % p;
    trim(diff);
    if (diff.empty()) return false;  // f | t^{p^i} - t
    const Poly g = poly_gcd(f, diff, p);
    if (g.size() > 1) return false;
  }
  return true;
}

}  // namespace detail

/// A realized finite field F_q = F_p[t]/(f) with a fixed generator g of F_q^x
/// and exponent/discrete-log tables indexing the multiplicative group.
/// Immutable after construction.
class Field {
 public:
  /// Builds F_{p^k}. When `modulus` is absent a monic irreducible polynomial
  /// is drawn at random from `seed`. For k = 1 arithmetic is plain mod-p and
  /// the modulus is recorded as t (coefficients {0, 1}).
  static Field build(std::uint64_t p, unsigned k, std::optional<std::vector<std::uint32_t>> modulus = {},
                     std::uint64_t seed = 0) {
    if (!detail::is_prime(p)) throw Error(ErrorKind::NotPrime, std::to_string(p) + " is not prime");
    if (k < 1) throw Error(ErrorKind::InvalidArgument, "extension degree must be >= 1");
    std::uint64_t q = 1;
    for (unsigned i = 0; i < k; ++i) {
      q *= p;
      if (q > kMaxFieldSize) {
        throw Error(ErrorKind::FieldTooLarge, "q = " + std::to_string(p) + "^" + std::to_string(k) +
                                                  " exceeds table limit 2^26");
      }
    }
    Field f;
    f.p_ = static_cast<std::uint32_t>(p);
    f.k_ = k;
    f.q_ = static_cast<std::uint32_t>(q);
    f.pow_p_.resize(k + 1);
    f.pow_p_[0] = 1;
    for (unsigned i = 1; i <= k; ++i) f.pow_p_[i] = f.pow_p_[i - 1] * f.p_;

    if (modulus) {
      const auto& m = *modulus;
      if (m.size() != k + 1) {
        throw Error(ErrorKind::InvalidArgument, "modulus must have k+1 = " + std::to_string(k + 1) + " coefficients");
      }
      if (m.back() != 1) throw Error(ErrorKind::InvalidArgument, "modulus must be monic");
      for (auto c : m) {
        if (c >= p) throw Error(ErrorKind::InvalidArgument, "modulus coefficient out of range [0,p)");
      }
      if (k == 1) {
        f.modulus_ = {0, 1};
      } else {
        const detail::Poly poly(m.begin(), m.end());
        if (!detail::is_irreducible(poly, p)) {
          throw Error(ErrorKind::ReducibleModulus, "modulus is reducible over F_" + std::to_string(p));
        }
        f.modulus_ = m;
      }
    } else if (k == 1) {
      f.modulus_ = {0, 1};
    } else {
      Rng rng(seed);
      for (;;) {
        detail::Poly poly(k + 1);
        for (unsigned i = 0; i < k; ++i) poly[i] = rng.below(p);
        poly[k] = 1;
        if (poly[0] == 0) continue;
        if (detail::is_irreducible(poly, p)) {
          f.modulus_.assign(poly.begin(), poly.end());
          break;
        }
      }
    }
    f.find_generator();
    f.build_tables();
    f.build_trace();
    return f;
  }

  [[nodiscard]] std::uint32_t p() const { return p_; }
  [[nodiscard]] unsigned k() const { return k_; }
  [[nodiscard]] std::uint32_t q() const { return q_; }
  /// Order of the multiplicative group, q - 1.
  [[nodiscard]] std::uint32_t group_order() const { return q_ - 1; }
  [[nodiscard]] const std::vector<std::uint32_t>& modulus() const { return modulus_; }
  [[nodiscard]] FieldElement generator() const { return FieldElement(generator_); }

  [[nodiscard]] FieldElement add(FieldElement x, FieldElement y) const {
    if (k_ == 1) {
      std::uint32_t s = x.value + y.value;
      if (s >= p_) s -= p_;
      return FieldElement(s);
    }
    if (p_ == 2) return FieldElement(x.value ^ y.value);
    std::uint32_t out = 0;
    std::uint32_t a = x.value;
    std::uint32_t b = y.value;
    for (unsigned i = 0; i < k_; ++i) {
      std::uint32_t d = a % p_ + b % p_;
      if (d >= p_) d -= p_;
      out += d * pow_p_[i];
      a /= p_;
      b /= p_;
    }
    return FieldElement(out);
  }

  [[nodiscard]] FieldElement neg(FieldElement x) const {
    if (k_ == 1) return FieldElement(x.value == 0 ? 0 : p_ - x.value);
    if (p_ == 2) return x;
    std::uint32_t out = 0;
    std::uint32_t a = x.value;
    for (unsigned i = 0; i < k_; ++i) {
      const std::uint32_t d = a % p_;
      out += (d == 0 ? 0 : p_ - d) * pow_p_[i];
      a /= p_;
    }
    return FieldElement(out);
  }

  [[nodiscard]] FieldElement sub(FieldElement x, FieldElement y) const { return add(x, neg(y)); }

  [[nodiscard]] FieldElement mul(FieldElement x, FieldElement y) const {
    if (x.is_zero() || y.is_zero()) return FieldElement(0);
    std::uint32_t e = log_[x.value] + log_[y.value];
    if (e >= q_ - 1) e -= q_ - 1;
    return FieldElement(exp_[e]);
  }

  [[nodiscard]] FieldElement inv(FieldElement x) const {
    if (x.is_zero()) throw Error(ErrorKind::ZeroInverse, "0 has no inverse");
    const std::uint32_t e = log_[x.value];
    return FieldElement(exp_[e == 0 ? 0 : q_ - 1 - e]);
  }

  /// g^e for any integer e.
  [[nodiscard]] FieldElement pow_g(std::int64_t e) const {
    const auto n = static_cast<std::int64_t>(q_ - 1);
    std::int64_t r = e % n;
    if (r < 0) r += n;
    return FieldElement(exp_[static_cast<std::size_t>(r)]);
  }

  /// Discrete log base g, in [0, q-1).
  [[nodiscard]] std::uint32_t dlog(FieldElement x) const {
    if (x.is_zero()) throw Error(ErrorKind::ZeroArgument, "dlog(0) is undefined");
    return log_[x.value];
  }

  /// Absolute trace F_q -> F_p.
  [[nodiscard]] std::uint32_t trace(FieldElement x) const {
    if (k_ == 1) return x.value;
    std::uint64_t acc = 0;
    std::uint32_t a = x.value;
    for (unsigned i = 0; i < k_; ++i) {
      acc += static_cast<std::uint64_t>(a % p_) * trace_basis_[i];
      a /= p_;
    }
    return static_cast<std::uint32_t>(acc % p_);
  }

  /// Image of an integer under Z -> F_p -> F_q.
  [[nodiscard]] FieldElement from_integer(std::int64_t n) const {
    std::int64_t r = n % static_cast<std::int64_t>(p_);
    if (r < 0) r += p_;
    return FieldElement(static_cast<std::uint32_t>(r));
  }

  /// Exponent table: position t holds the encoding of g^t.
  [[nodiscard]] const std::vector<std::uint32_t>& exp_table() const { return exp_; }

  /// Structured text record (p, k, modulus, generator); tables are rebuilt
  /// on load, never serialized.
  [[nodiscard]] std::string to_record() const {
    std::ostringstream os;
    os << "schema_version = 1\n";
    os << "p = " << p_ << "\n";
    os << "k = " << k_ << "\n";
    os << "modulus = ";
    for (std::size_t i = 0; i < modulus_.size(); ++i) os << (i ? "," : "") << modulus_[i];
    os << "\n";
    os << "generator = " << generator_ << "\n";
    return os.str();
  }

  static Field from_record(std::string_view text) {
    std::optional<std::uint64_t> p;
    std::optional<unsigned> k;
    std::optional<std::uint32_t> generator;
    std::vector<std::uint32_t> modulus;
    std::istringstream is{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto eq = line.find('=');
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      if (eq == std::string::npos) {
        throw Error(ErrorKind::ConfigError, "field record line " + std::to_string(lineno) + ": expected key = value");
      }
      auto strip = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
      };
      const std::string key = strip(line.substr(0, eq));
      const std::string value = strip(line.substr(eq + 1));
      try {
        if (key == "schema_version") {
          if (value != "1") throw Error(ErrorKind::ConfigError, "unsupported schema_version " + value);
        } else if (key == "p") {
          p = std::stoull(value);
        } else if (key == "k") {
          k = static_cast<unsigned>(std::stoul(value));
        } else if (key == "generator") {
          generator = static_cast<std::uint32_t>(std::stoul(value));
        } else if (key == "modulus") {
          std::istringstream ms(value);
          std::string tok;
          while (std::getline(ms, tok, ',')) modulus.push_back(static_cast<std::uint32_t>(std::stoul(strip(tok))));
        } else {
          throw Error(ErrorKind::ConfigError, "unknown key '" + key + "'");
        }
      } catch (const std::logic_error&) {
        throw Error(ErrorKind::ConfigError,
                    "field record line " + std::to_string(lineno) + ": bad value for '" + key + "'");
      }
    }
    if (!p || !k || modulus.empty()) throw Error(ErrorKind::ConfigError, "field record needs p, k and modulus");
    Field f = build(*p, *k, modulus);
    if (generator && *generator != f.generator_) {
      throw Error(ErrorKind::ConfigError, "recorded generator " + std::to_string(*generator) +
                                              " differs from rebuilt generator " + std::to_string(f.generator_));
    }
    return f;
  }

 private:
  Field() = default;

  [[nodiscard]] detail::Poly to_poly(std::uint32_t x) const {
    detail::Poly out(k_);
    for (unsigned i = 0; i < k_; ++i) {
      out[i] = x % p_;
      x /= p_;
    }
    detail::trim(out);
    return out;
  }

  [[nodiscard]] std::uint32_t from_poly(const detail::Poly& a) const {
    std::uint32_t out = 0;
    for (std::size_t i = 0; i < a.size(); ++i) out += static_cast<std::uint32_t>(a[i]) * pow_p_[i];
    return out;
  }

  [[nodiscard]] detail::Poly modulus_poly() const { return {modulus_.begin(), modulus_.end()}; }

  [[nodiscard]] bool is_identity_power(std::uint32_t x, std::uint64_t e) const {
    if (k_ == 1) return detail::pow_mod(x, e, p_) == 1;
    return detail::poly_powmod(to_poly(x), e, modulus_poly(), p_) == detail::Poly{1};
  }

  void find_generator() {
    const std::uint64_t n = q_ - 1;
    if (n == 1) {
      generator_ = 1;
      return;
    }
    const auto factors = detail::prime_factors(n);
    for (std::uint32_t cand = 2; cand < q_; ++cand) {
      bool ok = true;
      for (auto r : factors) {
        if (is_identity_power(cand, n / r)) {
          ok = false;
          break;
        }
      }
      if (ok) {
        generator_ = cand;
        return;
      }
    }
    throw Error(ErrorKind::InvariantViolation, "no generator found");
  }

  /// x * g using digit arithmetic (Horner in t over the digits of g).
  [[nodiscard]] std::vector<std::uint32_t> times_generator(const std::vector<std::uint32_t>& x,
                                                           const std::vector<std::uint32_t>& g) const {
    std::vector<std::uint32_t> acc(k_, 0);
    auto times_t = [&](std::vector<std::uint32_t>& v) {
      const std::uint32_t top = v[k_ - 1];
      for (unsigned i = k_ - 1; i > 0; --i) v[i] = v[i - 1];
      v[0] = 0;
      if (top != 0) {
        for (unsigned i = 0; i < k_; ++i) {
          v[i] = static_cast<std::uint32_t>((v[i] + static_cast<std::uint64_t>(p_ - top) * modulus_[i]) % p_);
        }
      }
    };
    for (std::size_t d = g.size(); d-- > 0;) {
      times_t(acc);
      if (g[d] != 0) {
        for (unsigned i = 0; i < k_; ++i) {
          acc[i] = static_cast<std::uint32_t>((acc[i] + static_cast<std::uint64_t>(g[d]) * x[i]) % p_);
        }
      }
    }
    return acc;
  }

  void build_tables() {
    const std::uint32_t n = q_ - 1;
    exp_.assign(n, 0);
    log_.assign(q_, 0);
    std::vector<bool> seen(q_, false);
    if (k_ == 1) {
      std::uint64_t x = 1;
      for (std::uint32_t t = 0; t < n; ++t) {
        exp_[t] = static_cast<std::uint32_t>(x);
        x = x * generator_ % p_;
      }
    } else {
      std::vector<std::uint32_t> g_digits;
      for (std::uint32_t v = generator_; v > 0; v /= p_) g_digits.push_back(v % p_);
      std::vector<std::uint32_t> x(k_, 0);
      x[0] = 1;
      for (std::uint32_t t = 0; t < n; ++t) {
        std::uint32_t enc = 0;
        for (unsigned i = 0; i < k_; ++i) enc += x[i] * pow_p_[i];
        exp_[t] = enc;
        x = times_generator(x, g_digits);
      }
    }
    for (std::uint32_t t = 0; t < n; ++t) {
      const std::uint32_t e = exp_[t];
      if (e == 0 || e >= q_ || seen[e]) throw Error(ErrorKind::InvariantViolation, "generator does not generate");
      seen[e] = true;
      log_[e] = t;
    }
  }

  void build_trace() {
    if (k_ == 1) return;
    const auto f = modulus_poly();
    trace_basis_.assign(k_, 0);
    for (unsigned i = 0; i < k_; ++i) {
      detail::Poly basis(i + 1, 0);
      basis[i] = 1;
      detail::Poly h = detail::poly_mod(basis, f, p_);
      detail::Poly sum;
      for (unsigned j = 0; j < k_; ++j) {
        if (sum.size() < h.size()) sum.resize(h.size(), 0);
        for (std::size_t c = 0; c < h.size(); ++c) sum[c] = (sum[c] + h[c]) % p_;
        h = detail::poly_powmod(h, p_, f, p_);
      }
      detail::trim(sum);
      if (sum.size() > 1) throw Error(ErrorKind::InvariantViolation, "trace is not in the prime field");
      trace_basis_[i] = sum.empty() ? 0 : static_cast<std::uint32_t>(sum[0]);
    }
  }

  std::uint32_t p_ = 0;
  unsigned k_ = 0;
  std::uint32_t q_ = 0;
  std::vector<std::uint32_t> modulus_;
  std::uint32_t generator_ = 0;
  std::vector<std::uint32_t> pow_p_;
  std::vector<std::uint32_t> exp_;
  std::vector<std::uint32_t> log_;
  std::vector<std::uint32_t> trace_basis_;
};

}  // namespace jdist

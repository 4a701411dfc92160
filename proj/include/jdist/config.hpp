#pragma once

#include <jdist/characters.hpp>
#include <jdist/error.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace jdist {

inline constexpr int kSchemaVersion = 1;

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

/// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <class T>
T parse_number(std::string_view text, std::string_view what) {
  T v{};
  const auto s = trim(text);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
    throw Error(ErrorKind::ConfigError, std::string(what) + ": cannot parse '" + s + "'");
  }
  return v;
}

inline std::vector<std::uint32_t> parse_index_list(std::string_view text, std::string_view what) {
  std::vector<std::uint32_t> out;
  if (trim(text).empty()) return out;
  for (const auto& part : split(text, ',')) out.push_back(parse_number<std::uint32_t>(part, what));
  return out;
}

inline std::string join(const std::vector<std::uint32_t>& v, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace detail

/// Size of a random subset, possibly as a function of q:
///   N | sqrt | qpow:e | logpow:e | qfrac:f
/// giving N, ceil(sqrt q), ceil(q^e), ceil((log q)^e), ceil(f q). Rule-based
/// sizes are clamped to [1, q - 2]; a literal N must already lie there.
struct SizeRule {
  enum class Kind { Literal, Sqrt, QPow, LogPow, QFrac };
  Kind kind = Kind::Literal;
  double param = 1;

  static SizeRule parse(std::string_view text) {
    const auto parts = detail::split(text, ':');
    SizeRule r;
    if (parts[0] == "sqrt" && parts.size() == 1) {
      r.kind = Kind::Sqrt;
    } else if (parts.size() == 2 && (parts[0] == "qpow" || parts[0] == "logpow" || parts[0] == "qfrac")) {
      r.kind = parts[0] == "qpow" ? Kind::QPow : parts[0] == "logpow" ? Kind::LogPow : Kind::QFrac;
      r.param = detail::parse_number<double>(parts[1], "size rule");
      if (!(r.param > 0)) throw Error(ErrorKind::ConfigError, "size rule parameter must be positive");
    } else if (parts.size() == 1) {
      r.param = detail::parse_number<std::uint32_t>(parts[0], "subset size");
    } else {
      throw Error(ErrorKind::ConfigError, "unknown size rule '" + std::string(text) + "'");
    }
    return r;
  }

  [[nodiscard]] std::string to_string() const {
    switch (kind) {
      case Kind::Literal: return std::to_string(static_cast<std::uint64_t>(param));
      case Kind::Sqrt: return "sqrt";
      case Kind::QPow: return "qpow:" + detail::format_double(param);
      case Kind::LogPow: return "logpow:" + detail::format_double(param);
      case Kind::QFrac: return "qfrac:" + detail::format_double(param);
    }
    return {};
  }

  [[nodiscard]] std::uint32_t evaluate(std::uint32_t q) const {
    const double qd = q;
    double v = param;
    switch (kind) {
      case Kind::Literal: {
        if (param < 1 || param > qd - 2) {
          throw Error(ErrorKind::ConfigError, "subset size " + to_string() + " outside [1, q-2] for q=" + std::to_string(q));
        }
        return static_cast<std::uint32_t>(param);
      }
      case Kind::Sqrt: v = std::ceil(std::sqrt(qd)); break;
      case Kind::QPow: v = std::ceil(std::pow(qd, param)); break;
      case Kind::LogPow: v = std::ceil(std::pow(std::log(qd), param)); break;
      case Kind::QFrac: v = std::ceil(param * qd); break;
    }
    return static_cast<std::uint32_t>(std::clamp(v, 1.0, qd - 2));
  }

  friend bool operator==(const SizeRule&, const SizeRule&) = default;
};

/// A1 / A2 specification: full | random:<size rule> | interval:lo:hi | explicit:i,j,...
struct SubsetSpec {
  enum class Kind { Full, Random, Interval, Explicit };
  Kind kind = Kind::Full;
  SizeRule size;
  std::uint32_t lo = 0;
  std::uint32_t hi = 0;
  std::vector<std::uint32_t> indices;

  static SubsetSpec parse(std::string_view text) {
    SubsetSpec s;
    const auto t = detail::trim(text);
    if (t == "full") return s;
    const auto colon = t.find(':');
    const std::string head = t.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : t.substr(colon + 1);
    if (head == "random" && !rest.empty()) {
      s.kind = Kind::Random;
      s.size = SizeRule::parse(rest);
    } else if (head == "interval") {
      const auto parts = detail::split(rest, ':');
      if (parts.size() != 2) throw Error(ErrorKind::ConfigError, "interval needs lo:hi");
      s.kind = Kind::Interval;
      s.lo = detail::parse_number<std::uint32_t>(parts[0], "interval lo");
      s.hi = detail::parse_number<std::uint32_t>(parts[1], "interval hi");
    } else if (head == "explicit") {
      s.kind = Kind::Explicit;
      s.indices = detail::parse_index_list(rest, "explicit subset");
    } else {
      throw Error(ErrorKind::ConfigError, "unknown subset spec '" + t + "'");
    }
    return s;
  }

  [[nodiscard]] std::string to_string() const {
    switch (kind) {
      case Kind::Full: return "full";
      case Kind::Random: return "random:" + size.to_string();
      case Kind::Interval: return "interval:" + std::to_string(lo) + ":" + std::to_string(hi);
      case Kind::Explicit: return "explicit:" + detail::join(indices);
    }
    return {};
  }

  [[nodiscard]] CharSubset realize(std::uint32_t q, std::uint64_t seed) const {
    switch (kind) {
      case Kind::Full: return CharSubset::full(q);
      case Kind::Random: return CharSubset::random(q, size.evaluate(q), seed);
      case Kind::Interval: return CharSubset::interval(q, lo, hi);
      case Kind::Explicit: return CharSubset::explicit_indices(q, indices);
    }
    throw Error(ErrorKind::ConfigError, "bad subset kind");
  }

  friend bool operator==(const SubsetSpec&, const SubsetSpec&) = default;
};

/// B specification: none (m = 2) | full | random:R | explicit:i,j/k,l/...
struct TailSpec {
  enum class Kind { None, Full, Random, Explicit };
  Kind kind = Kind::None;
  std::uint32_t count = 0;
  std::vector<std::vector<std::uint32_t>> tuples;

  static TailSpec parse(std::string_view text) {
    TailSpec s;
    const auto t = detail::trim(text);
    if (t == "none") return s;
    if (t == "full") {
      s.kind = Kind::Full;
      return s;
    }
    if (t.rfind("random:", 0) == 0) {
      s.kind = Kind::Random;
      s.count = detail::parse_number<std::uint32_t>(t.substr(7), "tail count");
      if (s.count < 1) throw Error(ErrorKind::ConfigError, "tail count must be >= 1");
      return s;
    }
    if (t.rfind("explicit:", 0) == 0) {
      s.kind = Kind::Explicit;
      for (const auto& row : detail::split(t.substr(9), '/')) s.tuples.push_back(detail::parse_index_list(row, "tail tuple"));
      return s;
    }
    throw Error(ErrorKind::ConfigError, "unknown tail spec '" + t + "'");
  }

  [[nodiscard]] std::string to_string() const {
    switch (kind) {
      case Kind::None: return "none";
      case Kind::Full: return "full";
      case Kind::Random: return "random:" + std::to_string(count);
      case Kind::Explicit: {
        std::string out = "explicit:";
        for (std::size_t i = 0; i < tuples.size(); ++i) {
          if (i) out += '/';
          out += detail::join(tuples[i]);
        }
        return out;
      }
    }
    return {};
  }

  friend bool operator==(const TailSpec&, const TailSpec&) = default;
};

/// fixed:K | bound-e0 | bound-e1
struct KPolicy {
  enum class Kind { Fixed, BoundE0, BoundE1 };
  Kind kind = Kind::Fixed;
  std::uint32_t k = 16;

  static KPolicy parse(std::string_view text) {
    const auto t = detail::trim(text);
    if (t == "bound-e0") return {Kind::BoundE0, 0};
    if (t == "bound-e1") return {Kind::BoundE1, 0};
    if (t.rfind("fixed:", 0) == 0) {
      const auto k = detail::parse_number<std::uint32_t>(t.substr(6), "K");
      if (k < 1) throw Error(ErrorKind::ConfigError, "K must be >= 1");
      return {Kind::Fixed, k};
    }
    throw Error(ErrorKind::ConfigError, "unknown K policy '" + t + "'");
  }

  [[nodiscard]] std::string to_string() const {
    switch (kind) {
      case Kind::Fixed: return "fixed:" + std::to_string(k);
      case Kind::BoundE0: return "bound-e0";
      case Kind::BoundE1: return "bound-e1";
    }
    return {};
  }

  friend bool operator==(const KPolicy&, const KPolicy&) = default;
};

/// fixed:s | loglog:eps
struct SPolicy {
  enum class Kind { Fixed, LogLog };
  Kind kind = Kind::Fixed;
  std::uint32_t s = 1;
  double epsilon = 0.5;

  static SPolicy parse(std::string_view text) {
    const auto t = detail::trim(text);
    if (t.rfind("fixed:", 0) == 0) {
      const auto s = detail::parse_number<std::uint32_t>(t.substr(6), "s");
      if (s < 1) throw Error(ErrorKind::ConfigError, "s must be >= 1");
      return {Kind::Fixed, s, 0.5};
    }
    if (t.rfind("loglog:", 0) == 0) {
      const auto eps = detail::parse_number<double>(t.substr(7), "epsilon");
      if (!(eps > 0 && eps <= 0.5)) throw Error(ErrorKind::ConfigError, "epsilon must lie in (0, 1/2]");
      return {Kind::LogLog, 1, eps};
    }
    throw Error(ErrorKind::ConfigError, "unknown s policy '" + t + "'");
  }

  [[nodiscard]] std::string to_string() const {
    return kind == Kind::Fixed ? "fixed:" + std::to_string(s) : "loglog:" + detail::format_double(epsilon);
  }

  friend bool operator==(const SPolicy&, const SPolicy&) = default;
};

enum class OutputFormat { Csv, Text };
enum class MomentMethod { Fast, Direct };

struct RunConfig {
  std::uint32_t p = 101;
  unsigned k = 1;
  std::optional<std::vector<std::uint32_t>> modulus;
  unsigned m = 2;
  SubsetSpec a1;
  SubsetSpec a2;
  TailSpec b;
  KPolicy k_policy;
  SPolicy s_policy;
  std::uint32_t draws = 1;
  std::uint64_t seed = 1;
  std::string output = "-";
  OutputFormat format = OutputFormat::Csv;
  std::uint64_t exact_cap = 4096;
  unsigned workers = 1;
  MomentMethod moment_method = MomentMethod::Fast;
  double c_impl = 1.0;
  double et_c0 = 1.0;
  double et_c1 = 4.0;
  std::uint32_t max_k = 64;
  std::uint64_t tail_limit = 1u << 20;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

  [[nodiscard]] std::uint64_t q() const {
    std::uint64_t q = 1;
    for (unsigned i = 0; i < k; ++i) q *= p;
    return q;
  }

  /// Cross-field checks not tied to a single key.
  void validate() const {
    auto fail = [](const std::string& field, const std::string& msg) {
      throw Error(ErrorKind::ConfigError, "field '" + field + "': " + msg);
    };
    if (p < 2) fail("p", "must be a prime >= 2");
    if (k < 1) fail("k", "must be >= 1");
    const double qd = std::pow(static_cast<double>(p), static_cast<double>(k));
    if (qd > static_cast<double>(kMaxFieldSize)) fail("k", "q = p^k exceeds 2^26");
    if (q() < 3) fail("p", "q must be at least 3 so that nontrivial characters exist");
    if (m < 2) fail("m", "tuple length must be >= 2");
    if (modulus && modulus->size() != k + 1) fail("modulus", "needs k + 1 coefficients, low to high");
    if (draws < 1) fail("draws", "must be >= 1");
    if (exact_cap < 1) fail("exact_cap", "must be >= 1");
    if (max_k < 1) fail("max_k", "must be >= 1");
    if (!(c_impl > 0) || !(et_c0 > 0) || !(et_c1 > 0)) fail("c_impl", "constants must be positive");
    const unsigned width = m - 2;
    switch (b.kind) {
      case TailSpec::Kind::None:
        if (width != 0) fail("b", "m > 2 needs a tail set (full, random:R or explicit)");
        break;
      case TailSpec::Kind::Full: {
        const double size = std::pow(static_cast<double>(q()) - 2, width);
        if (size > static_cast<double>(tail_limit)) {
          fail("b", "full tail set has (q-2)^(m-2) = " + detail::format_double(size) + " tuples, over tail_limit");
        }
        break;
      }
      case TailSpec::Kind::Random:
        if (width == 0) fail("b", "random tails need m > 2");
        break;
      case TailSpec::Kind::Explicit:
        for (const auto& t : b.tuples) {
          if (t.size() != width) fail("b", "every explicit tail tuple needs m - 2 entries");
        }
        if (b.tuples.empty()) fail("b", "explicit tail set is empty");
        break;
    }
  }
};

namespace detail {

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "schema_version", "p",         "k",      "modulus", "m",           "a1",         "a2",     "b",
      "k_policy",       "s_policy",  "draws",  "seed",    "output",      "format",     "exact_cap",
      "workers",        "moment_method", "c_impl", "et_c0", "et_c1",  "max_k",      "tail_limit"};
  return keys;
}

}  // namespace detail

/// Sets one key from its text value; shared by the file parser and CLI flags.
inline void set_config_value(RunConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_number;
  try {
    if (key == "schema_version") {
      if (parse_number<int>(value, key) != kSchemaVersion) {
        throw Error(ErrorKind::ConfigError, "unsupported schema_version " + value);
      }
    } else if (key == "p") {
      c.p = parse_number<std::uint32_t>(value, key);
    } else if (key == "k") {
      c.k = parse_number<unsigned>(value, key);
    } else if (key == "modulus") {
      if (value == "auto") {
        c.modulus.reset();
      } else {
        c.modulus = detail::parse_index_list(value, key);
      }
    } else if (key == "m") {
      c.m = parse_number<unsigned>(value, key);
    } else if (key == "a1") {
      c.a1 = SubsetSpec::parse(value);
    } else if (key == "a2") {
      c.a2 = SubsetSpec::parse(value);
    } else if (key == "b") {
      c.b = TailSpec::parse(value);
    } else if (key == "k_policy") {
      c.k_policy = KPolicy::parse(value);
    } else if (key == "s_policy") {
      c.s_policy = SPolicy::parse(value);
    } else if (key == "draws") {
      c.draws = parse_number<std::uint32_t>(value, key);
    } else if (key == "seed") {
      c.seed = parse_number<std::uint64_t>(value, key);
    } else if (key == "output") {
      c.output = value;
    } else if (key == "format") {
      if (value != "csv" && value != "text") throw Error(ErrorKind::ConfigError, "format must be csv or text");
      c.format = value == "csv" ? OutputFormat::Csv : OutputFormat::Text;
    } else if (key == "exact_cap") {
      c.exact_cap = parse_number<std::uint64_t>(value, key);
    } else if (key == "workers") {
      c.workers = parse_number<unsigned>(value, key);
    } else if (key == "moment_method") {
      if (value != "fast" && value != "direct") throw Error(ErrorKind::ConfigError, "moment_method must be fast or direct");
      c.moment_method = value == "fast" ? MomentMethod::Fast : MomentMethod::Direct;
    } else if (key == "c_impl") {
      c.c_impl = parse_number<double>(value, key);
    } else if (key == "et_c0") {
      c.et_c0 = parse_number<double>(value, key);
    } else if (key == "et_c1") {
      c.et_c1 = parse_number<double>(value, key);
    } else if (key == "max_k") {
      c.max_k = parse_number<std::uint32_t>(value, key);
    } else if (key == "tail_limit") {
      c.tail_limit = parse_number<std::uint64_t>(value, key);
    } else {
      throw Error(ErrorKind::ConfigError, "unknown key");
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ConfigError) throw;
    throw Error(ErrorKind::ConfigError, "field '" + key + "': " + std::string(e.what()).substr(13));
  }
}

inline std::string get_config_value(const RunConfig& c, const std::string& key) {
  if (key == "schema_version") return std::to_string(kSchemaVersion);
  if (key == "p") return std::to_string(c.p);
  if (key == "k") return std::to_string(c.k);
  if (key == "modulus") return c.modulus ? detail::join(*c.modulus) : "auto";
  if (key == "m") return std::to_string(c.m);
  if (key == "a1") return c.a1.to_string();
  if (key == "a2") return c.a2.to_string();
  if (key == "b") return c.b.to_string();
  if (key == "k_policy") return c.k_policy.to_string();
  if (key == "s_policy") return c.s_policy.to_string();
  if (key == "draws") return std::to_string(c.draws);
  if (key == "seed") return std::to_string(c.seed);
  if (key == "output") return c.output;
  if (key == "format") return c.format == OutputFormat::Csv ? "csv" : "text";
  if (key == "exact_cap") return std::to_string(c.exact_cap);
  if (key == "workers") return std::to_string(c.workers);
  if (key == "moment_method") return c.moment_method == MomentMethod::Fast ? "fast" : "direct";
  if (key == "c_impl") return detail::format_double(c.c_impl);
  if (key == "et_c0") return detail::format_double(c.et_c0);
  if (key == "et_c1") return detail::format_double(c.et_c1);
  if (key == "max_k") return std::to_string(c.max_k);
  if (key == "tail_limit") return std::to_string(c.tail_limit);
  throw Error(ErrorKind::ConfigError, "unknown key '" + key + "'");
}

/// Config file: one `key = value` per line, '#' starts a comment. Later
/// duplicates are rejected. Diagnostics name the line and the field.
inline RunConfig parse_config(std::string_view text, RunConfig base = {}) {
  std::map<std::string, int> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::ConfigError, "line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const auto key = detail::trim(body.substr(0, eq));
    const auto value = detail::trim(body.substr(eq + 1));
    if (seen.count(key)) {
      throw Error(ErrorKind::ConfigError, "line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    seen[key] = lineno;
    try {
      set_config_value(base, key, value);
    } catch (const Error& e) {
      throw Error(e.kind(), "line " + std::to_string(lineno) + ": " + std::string(e.what()).substr(13));
    }
  }
  if (!seen.count("schema_version")) throw Error(ErrorKind::ConfigError, "missing schema_version");
  base.validate();
  return base;
}

/// Keys present in a config text, in file order; lets the CLI report which
/// flags a config file overrides.
inline std::vector<std::string> config_keys_in(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto eq = line.find('=');
    if (eq != std::string::npos) out.push_back(detail::trim(std::string_view(line).substr(0, eq)));
  }
  return out;
}

inline std::string serialize_config(const RunConfig& c) {
  std::string out;
  for (const auto& key : detail::config_keys()) out += key + " = " + get_config_value(c, key) + "\n";
  return out;
}

inline const std::vector<std::string>& config_key_names() { return detail::config_keys(); }

}  // namespace jdist

#pragma once

#include <jdist/charsums.hpp>
#include <jdist/config.hpp>
#include <jdist/equidist.hpp>
#include <jdist/rng.hpp>

#include <chrono>
#include <cmath>
#include <functional>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace jdist {

/// Subset streams per draw.
inline constexpr std::uint64_t kStreamA1 = 1;
inline constexpr std::uint64_t kStreamA2 = 2;
inline constexpr std::uint64_t kStreamB = 3;

/// One measured-vs-bound comparison. Optional numbers print as empty cells.
struct ResultRow {
  std::uint64_t q = 0;
  unsigned m = 0;
  std::uint64_t a1 = 0;
  std::uint64_t a2 = 0;
  std::uint64_t b = 0;
  std::optional<unsigned> s_or_n;
  std::uint32_t k_cut = 0;
  std::optional<double> measured;
  std::optional<double> rhs;
  std::optional<double> constant;
  std::string bound;
  std::uint32_t draw = 0;
  unsigned s = 0;
  std::uint64_t n_points = 0;
  std::optional<double> d_star;
  std::string method;
  bool convention = false;
  double et_c0 = 1;
  std::uint64_t seed = 0;
  std::uint32_t p = 0;
  unsigned k = 0;
  std::string modulus;
  std::string a1_spec;
  std::string a2_spec;
  std::string b_spec;
  std::string status = "ok";
  std::string message;
};

struct ResultTable {
  std::vector<ResultRow> rows;
};

inline const std::vector<std::string>& csv_header() {
  static const std::vector<std::string> h = {
      "q",      "m",        "A1",   "A2",    "B",        "s_or_n",  "K",       "measured", "rhs",
      "constant", "bound",  "draw", "s",     "n_points", "d_star",  "method",  "convention",
      "et_c0",  "seed",     "p",    "k",     "modulus",  "a1_spec", "a2_spec", "b_spec",   "status", "message"};
  return h;
}

namespace detail {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

inline std::vector<std::string> row_fields(const ResultRow& r) {
  return {std::to_string(r.q),
          std::to_string(r.m),
          std::to_string(r.a1),
          std::to_string(r.a2),
          std::to_string(r.b),
          r.s_or_n ? std::to_string(*r.s_or_n) : "",
          std::to_string(r.k_cut),
          opt(r.measured),
          opt(r.rhs),
          opt(r.constant),
          r.bound,
          std::to_string(r.draw),
          std::to_string(r.s),
          std::to_string(r.n_points),
          opt(r.d_star),
          r.method,
          r.convention ? "empty-set-D1" : "",
          format_double(r.et_c0),
          std::to_string(r.seed),
          std::to_string(r.p),
          std::to_string(r.k),
          r.modulus,
          r.a1_spec,
          r.a2_spec,
          r.b_spec,
          r.status,
          r.message};
}

}  // namespace detail

inline void write_csv(std::ostream& out, const ResultTable& table) {
  const auto& h = csv_header();
  for (std::size_t i = 0; i < h.size(); ++i) out << (i ? "," : "") << h[i];
  out << '\n';
  for (const auto& r : table.rows) {
    const auto f = detail::row_fields(r);
    for (std::size_t i = 0; i < f.size(); ++i) out << (i ? "," : "") << detail::csv_escape(f[i]);
    out << '\n';
  }
}

/// Structured text: one block per row, `key: value` lines, blank line between.
inline void write_text(std::ostream& out, const ResultTable& table) {
  const auto& h = csv_header();
  for (const auto& r : table.rows) {
    const auto f = detail::row_fields(r);
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (!f[i].empty()) out << h[i] << ": " << f[i] << '\n';
    }
    out << '\n';
  }
}

using Logger = std::function<void(const std::string&)>;

namespace detail {

class StageTimer {
 public:
  StageTimer(const Logger& log, std::string name)
      : log_(log), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    if (!log_) return;
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    log_("stage " + name_ + ": " + format_double(std::round(ms * 1000) / 1000) + " ms");
  }
  StageTimer(const StageTimer&) = delete;
  StageTimer& operator=(const StageTimer&) = delete;

 private:
  const Logger& log_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

inline Field build_field(const RunConfig& c) {
  return Field::build(c.p, c.k, c.modulus, c.seed);
}

inline TailSet realize_tails(const RunConfig& c, std::uint32_t q, std::uint32_t draw) {
  const unsigned width = c.m - 2;
  switch (c.b.kind) {
    case TailSpec::Kind::None: return TailSet::empty_tail(q);
    case TailSpec::Kind::Full: return width == 0 ? TailSet::empty_tail(q) : TailSet::full(q, width, c.tail_limit);
    case TailSpec::Kind::Random: return TailSet::random(q, width, c.b.count, stream_seed(c.seed, kStreamB, draw));
    case TailSpec::Kind::Explicit: return TailSet::explicit_tuples(q, width, c.b.tuples);
  }
  throw Error(ErrorKind::ConfigError, "bad tail kind");
}

/// Resolves the s and K policies for one draw.
inline unsigned resolve_s(const RunConfig& c, double q) {
  return c.s_policy.kind == SPolicy::Kind::Fixed ? c.s_policy.s : choose_s(q, c.s_policy.epsilon);
}

inline std::uint32_t resolve_k(const RunConfig& c, double q, double a1, double a2, unsigned s) {
  double k = c.k_policy.k;
  if (c.k_policy.kind == KPolicy::Kind::BoundE0) k = std::floor(choose_k_e0(q, a1, s));
  if (c.k_policy.kind == KPolicy::Kind::BoundE1) k = std::floor(choose_k_e1(q, a1, a2));
  return static_cast<std::uint32_t>(std::clamp(k, 1.0, static_cast<double>(c.max_k)));
}

/// Everything measured for one draw; rows are derived from it.
struct DrawResult {
  CharSubset a1;
  CharSubset a2;
  TailSet tails;
  DiscrepancyReport disc;
  Moments moments;
  unsigned s = 1;
  std::uint32_t k_cut = 1;
};

inline DrawResult measure_draw(const RunConfig& c, const GaussTable& gtab, std::uint32_t draw, const Logger& log = {}) {
  const std::uint32_t q = gtab.q();
  auto a1 = c.a1.realize(q, stream_seed(c.seed, kStreamA1, draw));
  auto a2 = c.a2.realize(q, stream_seed(c.seed, kStreamA2, draw));
  auto tails = realize_tails(c, q, draw);
  const unsigned s = resolve_s(c, q);
  const std::uint32_t k_cut = resolve_k(c, q, static_cast<double>(a1.size()), static_cast<double>(a2.size()), s);
  DiscrepancyReport disc;
  {
    detail::StageTimer t(log, "angles+discrepancy");
    disc = discrepancy_exact(angles_from_subsets(gtab, a1, a2, tails, c.workers), c.exact_cap, c.workers);
  }
  Moments mom;
  {
    detail::StageTimer t(log, "moments");
    mom = c.moment_method == MomentMethod::Fast ? moments_fast(gtab, a1, a2, tails, k_cut)
                                                : moments_direct(gtab, a1, a2, tails, k_cut, c.workers);
  }
  return {std::move(a1), std::move(a2), std::move(tails), disc, std::move(mom), s, k_cut};
}

inline ResultRow base_row(const RunConfig& c, std::uint64_t q, std::uint32_t draw) {
  ResultRow r;
  r.q = q;
  r.m = c.m;
  r.draw = draw;
  r.et_c0 = c.et_c0;
  r.seed = c.seed;
  r.p = c.p;
  r.k = c.k;
  r.modulus = get_config_value(c, "modulus");
  r.a1_spec = c.a1.to_string();
  r.a2_spec = c.a2.to_string();
  r.b_spec = c.b.to_string();
  return r;
}

/// Rows for one draw: D against e.0, e.1 and Erdos-Turan, then |M^(n)|
/// against e.M1 and e.M2 for n = 1..K.
inline std::vector<ResultRow> rows_for_draw(const RunConfig& c, std::uint64_t q, std::uint32_t draw, const DrawResult& d) {
  std::vector<ResultRow> rows;
  const double qd = static_cast<double>(q);
  const double a1 = static_cast<double>(d.a1.size());
  const double a2 = static_cast<double>(d.a2.size());
  const double bsz = static_cast<double>(d.tails.size());
  ResultRow proto = base_row(c, q, draw);
  proto.a1 = d.a1.size();
  proto.a2 = d.a2.size();
  proto.b = d.tails.size();
  proto.k_cut = d.k_cut;
  proto.s = d.s;
  proto.n_points = d.disc.n_points;
  proto.d_star = d.disc.d_star;
  proto.method = std::string(to_string(d.disc.method));
  proto.convention = d.disc.empty_convention;
  if (d.disc.empty_convention) proto.method = "convention";

  auto guarded = [&](ResultRow r, const std::function<void(ResultRow&)>& fill) {
    try {
      fill(r);
    } catch (const Error& e) {
      r.status = "error";
      r.message = e.what();
      r.rhs.reset();
    }
    rows.push_back(std::move(r));
  };

  guarded(proto, [&](ResultRow& r) {
    r.bound = "D_vs_e0";
    r.s_or_n = d.s;
    r.measured = d.disc.d_exact;
    r.constant = c.c_impl;
    r.rhs = bound_e0_rhs(qd, a1, a2, d.s, c.c_impl);
  });
  guarded(proto, [&](ResultRow& r) {
    r.bound = "D_vs_e1";
    r.measured = d.disc.d_exact;
    r.constant = c.c_impl;
    r.rhs = bound_e1_rhs(qd, a1, a2, c.c_impl);
  });
  guarded(proto, [&](ResultRow& r) {
    r.bound = "D_vs_ET";
    r.measured = d.disc.d_exact;
    r.constant = c.et_c1;
    if (d.moments.count == 0) {
      r.status = "convention";
      r.message = "empty A-circle; D = 1 by convention";
      return;
    }
    r.rhs = erdos_turan_rhs(d.moments.values, d.moments.count, d.k_cut, c.et_c0, c.et_c1);
  });
  for (unsigned n = 1; n <= d.k_cut; ++n) {
    const double measured = std::abs(d.moments(n));
    guarded(proto, [&](ResultRow& r) {
      r.bound = "M_vs_eM1";
      r.s_or_n = n;
      r.measured = measured;
      r.constant = 1.0;
      r.rhs = bound_em1_rhs(qd, a1, a2, bsz, d.s, n);
    });
    guarded(proto, [&](ResultRow& r) {
      r.bound = "M_vs_eM2";
      r.s_or_n = n;
      r.measured = measured;
      r.constant = 1.0;
      r.rhs = bound_em2_rhs(qd, a1, a2, bsz, n);
    });
  }
  return rows;
}

inline ResultRow error_row(const RunConfig& c, std::uint32_t draw, const std::string& message) {
  ResultRow r = base_row(c, c.q(), draw);
  r.bound = "error";
  r.status = "error";
  r.message = message;
  return r;
}

/// Runs every draw of a validated config. Deterministic in (config, seed);
/// numeric fields depend on the worker count only through summation order.
inline ResultTable run_experiment(const RunConfig& c, const Logger& log = {}) {
  c.validate();
  ResultTable table;
  std::optional<Field> field;
  {
    detail::StageTimer t(log, "field");
    field.emplace(build_field(c));
  }
  const Characters chars(*field);
  std::optional<GaussTable> gtab;
  {
    detail::StageTimer t(log, "gauss");
    gtab.emplace(gauss_all(chars));
  }
  for (std::uint32_t draw = 0; draw < c.draws; ++draw) {
    const auto d = measure_draw(c, *gtab, draw, log);
    auto rows = rows_for_draw(c, field->q(), draw, d);
    table.rows.insert(table.rows.end(), rows.begin(), rows.end());
  }
  return table;
}

inline void write_table(const RunConfig& c, const ResultTable& table, std::ostream& out) {
  if (c.format == OutputFormat::Csv) {
    write_csv(out, table);
  } else {
    write_text(out, table);
  }
}

// ---------------------------------------------------------------------------
// Sweeps

/// Applies "key=value;key=value" to a copy of `base`.
inline RunConfig apply_delta(const RunConfig& base, const std::string& delta) {
  RunConfig c = base;
  for (const auto& part : detail::split(delta, ';')) {
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::ConfigError, "delta '" + part + "' is not key=value");
    set_config_value(c, detail::trim(part.substr(0, eq)), detail::trim(part.substr(eq + 1)));
  }
  return c;
}

struct SweepSpec {
  std::string name = "sweep";
  RunConfig base;
  std::vector<std::string> deltas;
};

/// Built-in sweeps. The base's output/format/workers/seed are kept.
inline SweepSpec preset_sweep(const std::string& name, const RunConfig& base) {
  SweepSpec s;
  s.name = name;
  s.base = base;
  s.base.m = 2;
  s.base.b = TailSpec{};
  s.base.modulus.reset();
  s.base.k = 1;
  const std::vector<std::string> primes = {"101", "1009", "10007"};
  if (name == "e1-trend") {
    s.base.a1 = SubsetSpec::parse("full");
    s.base.a2 = SubsetSpec::parse("full");
    s.base.k_policy = KPolicy::parse("bound-e1");
    s.base.draws = 1;
    for (const auto& p : primes) s.deltas.push_back("p=" + p);
  } else if (name == "e0-trend") {
    s.base.a1 = SubsetSpec::parse("random:qpow:0.6");
    s.base.a2 = SubsetSpec::parse("random:logpow:3");
    s.base.s_policy = SPolicy::parse("loglog:0.5");
    s.base.k_policy = KPolicy::parse("bound-e0");
    s.base.draws = 5;
    for (const auto& p : primes) s.deltas.push_back("p=" + p);
  } else if (name == "katz-fixed-tail") {
    // chi_1 runs over every nontrivial character; chi_2, chi_3 stay fixed.
    s.base.m = 3;
    s.base.a1 = SubsetSpec::parse("full");
    s.base.a2 = SubsetSpec::parse("explicit:1");
    s.base.b = TailSpec::parse("explicit:2");
    s.base.k_policy = KPolicy::parse("fixed:16");
    s.base.draws = 1;
    for (const auto& p : primes) s.deltas.push_back("p=" + p);
  } else if (name == "moment-bounds") {
    s.base.a1 = SubsetSpec::parse("random:sqrt");
    s.base.a2 = SubsetSpec::parse("random:qfrac:0.1");
    s.base.k_policy = KPolicy::parse("fixed:8");
    s.base.draws = 5;
    for (const auto& p : {"101", "1009", "9973"}) {
      for (const auto& sv : {"1", "2", "3"}) s.deltas.push_back(std::string("p=") + p + ";s_policy=fixed:" + sv);
    }
  } else {
    throw Error(ErrorKind::ConfigError, "unknown preset '" + name + "' (e0-trend, e1-trend, katz-fixed-tail, moment-bounds)");
  }
  return s;
}

struct SweepSummary {
  std::string bound;
  std::size_t rows = 0;
  double fitted_c = 0;  // max of measured * constant / rhs
  std::optional<double> slope;
};

/// Per bound kind: the smallest C with measured <= C * (rhs / constant) over
/// all ok rows, and for D rows the least-squares slope of log D against
/// log(A1 A2 / q).
inline std::vector<SweepSummary> summarize(const ResultTable& table) {
  std::vector<SweepSummary> out;
  for (const std::string kind : {"D_vs_e0", "D_vs_e1", "D_vs_ET", "M_vs_eM1", "M_vs_eM2"}) {
    SweepSummary s;
    s.bound = kind;
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& r : table.rows) {
      if (r.bound != kind || r.status != "ok" || !r.rhs || !r.measured) continue;
      ++s.rows;
      if (*r.rhs > 0) s.fitted_c = std::max(s.fitted_c, *r.measured * r.constant.value_or(1.0) / *r.rhs);
      if (kind.rfind("D_", 0) == 0 && !r.convention && *r.measured > 0) {
        xs.push_back(std::log(static_cast<double>(r.a1) * static_cast<double>(r.a2) / static_cast<double>(r.q)));
        ys.push_back(std::log(*r.measured));
      }
    }
    if (s.rows == 0) continue;
    if (xs.size() >= 2) {
      double mx = 0;
      double my = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
      }
      mx /= static_cast<double>(xs.size());
      my /= static_cast<double>(xs.size());
      double sxy = 0;
      double sxx = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
      }
      if (sxx > 0) s.slope = sxy / sxx;
    }
    out.push_back(s);
  }
  return out;
}

inline void write_summary_csv(std::ostream& out, const std::string& sweep_name, const std::vector<SweepSummary>& sums) {
  out << "sweep,bound,rows,fitted_C,trend_slope\n";
  for (const auto& s : sums) {
    out << detail::csv_escape(sweep_name) << ',' << s.bound << ',' << s.rows << ',' << detail::format_double(s.fitted_c)
        << ',' << (s.slope ? detail::format_double(*s.slope) : "") << '\n';
  }
}

/// Runs every cell; a failing cell contributes one error row and the sweep
/// continues.
inline ResultTable run_sweep(const SweepSpec& spec, const Logger& log = {}) {
  ResultTable table;
  for (const auto& delta : spec.deltas) {
    RunConfig c = spec.base;
    try {
      c = apply_delta(spec.base, delta);
      if (log) log("cell " + delta);
      auto t = run_experiment(c, log);
      table.rows.insert(table.rows.end(), t.rows.begin(), t.rows.end());
    } catch (const Error& e) {
      auto r = error_row(c, 0, delta + ": " + e.what());
      table.rows.push_back(std::move(r));
    }
  }
  return table;
}

}  // namespace jdist

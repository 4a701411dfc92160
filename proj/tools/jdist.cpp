// jdist: command-line front end for the jdist library.
#include <jdist/harness.hpp>
#include <jdist/verify.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace {

using namespace jdist;

void log_stderr(const std::string& msg) { std::cerr << "[jdist] " << msg << '\n'; }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string flag_name(const std::string& key) {
  std::string f = key;
  for (auto& c : f) {
    if (c == '_') c = '-';
  }
  return "--" + f;
}

/// RunConfig keys exposed as flags on a subcommand, plus --config.
struct ConfigFlags {
  std::map<std::string, std::string> values;
  std::string config_path;

  void attach(CLI::App* app) {
    for (const auto& key : config_key_names()) {
      if (key == "schema_version") continue;
      app->add_option(flag_name(key), values[key], "RunConfig field '" + key + "'");
    }
    app->add_option("--config", config_path, "config file (key = value lines; overrides flags)");
  }

  /// Flags first, then the config file on top (each override reported), then
  /// JDIST_WORKERS.
  RunConfig resolve(CLI::App* app) const {
    RunConfig c;
    for (const auto& [key, value] : values) {
      if (app->count(flag_name(key)) > 0) set_config_value(c, key, value);
    }
    if (!config_path.empty()) {
      const auto text = read_file(config_path);
      for (const auto& key : config_keys_in(text)) {
        if (values.count(key) && app->count(flag_name(key)) > 0) {
          log_stderr("warning: config file '" + config_path + "' overrides " + flag_name(key));
        }
      }
      c = parse_config(text, c);
    }
    if (const char* env = std::getenv("JDIST_WORKERS")) {
      set_config_value(c, "workers", env);
      log_stderr("workers = " + std::to_string(c.workers) + " from JDIST_WORKERS");
    }
    c.validate();
    return c;
  }
};

struct FieldFlags {
  std::uint32_t p = 0;
  unsigned k = 1;
  std::string modulus;
  std::uint64_t seed = 1;

  void attach(CLI::App* app) {
    app->add_option("--p", p, "characteristic")->required();
    app->add_option("--k", k, "extension degree");
    app->add_option("--modulus", modulus, "monic irreducible modulus, coefficients low to high");
    app->add_option("--seed", seed, "seed for a random modulus");
  }

  [[nodiscard]] Field build() const {
    std::optional<std::vector<std::uint32_t>> mod;
    if (!modulus.empty()) mod = detail::parse_index_list(modulus, "modulus");
    return Field::build(p, k, mod, seed);
  }
};

void print_complex_table(std::ostream& out, std::span<const cplx> values) {
  out << "index,re,im\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    out << i << ',' << detail::format_double(values[i].real()) << ',' << detail::format_double(values[i].imag()) << '\n';
  }
}

template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot open output '" + path + "'");
  fn(out);
}

int run(int argc, char** argv) {
  CLI::App app{"Gauss, Jacobi and Kloosterman sums; discrepancy of normalized Jacobi sums"};
  app.require_subcommand(1);

  FieldFlags field_flags;
  auto* field_cmd = app.add_subcommand("field", "build a field and print its record");
  field_flags.attach(field_cmd);

  FieldFlags gauss_flags;
  std::string gauss_out;
  auto* gauss_cmd = app.add_subcommand("gauss", "all Gauss sums G(chi_j) as CSV (index, re, im)");
  gauss_flags.attach(gauss_cmd);
  gauss_cmd->add_option("--output", gauss_out, "output path, '-' for stdout");

  FieldFlags jacobi_flags;
  std::string jacobi_chars;
  std::string jacobi_method = "both";
  auto* jacobi_cmd = app.add_subcommand("jacobi", "one Jacobi sum");
  jacobi_flags.attach(jacobi_cmd);
  jacobi_cmd->add_option("--chars", jacobi_chars, "character indices j_1,...,j_m")->required();
  jacobi_cmd->add_option("--method", jacobi_method, "direct | gauss | both")
      ->check(CLI::IsMember({"direct", "gauss", "both"}));

  FieldFlags kl_flags;
  unsigned kl_n = 2;
  std::string kl_out;
  auto* kl_cmd = app.add_subcommand("kloosterman", "Kl_n(g^t) for all t as CSV (index = t, re, im)");
  kl_flags.attach(kl_cmd);
  kl_cmd->add_option("--n", kl_n, "number of factors")->required();
  kl_cmd->add_option("--output", kl_out, "output path, '-' for stdout");

  ConfigFlags moments_flags;
  auto* moments_cmd = app.add_subcommand("moments", "moments M^(n), n <= K, per draw");
  moments_flags.attach(moments_cmd);

  ConfigFlags disc_flags;
  auto* disc_cmd = app.add_subcommand("discrepancy", "discrepancy of the angle set per draw");
  disc_flags.attach(disc_cmd);

  double b_q = 0;
  double b_a1 = 0;
  double b_a2 = 0;
  double b_b = 1;
  unsigned b_s = 1;
  unsigned b_n = 1;
  double b_eps = 0;
  double b_c = 1;
  auto* bounds_cmd = app.add_subcommand("bounds", "evaluate the bound right-hand sides");
  bounds_cmd->add_option("--q", b_q, "field size")->required();
  bounds_cmd->add_option("--a1", b_a1, "#A1")->required();
  bounds_cmd->add_option("--a2", b_a2, "#A2")->required();
  bounds_cmd->add_option("--b", b_b, "#B");
  bounds_cmd->add_option("--s", b_s, "Holder exponent s");
  bounds_cmd->add_option("--n", b_n, "moment order n");
  bounds_cmd->add_option("--epsilon", b_eps, "if set, s = ceil(eps log q / (2 log log q))");
  bounds_cmd->add_option("--c-impl", b_c, "constant for e0 / e1");

  ConfigFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "run one experiment and write its table");
  run_flags.attach(run_cmd);

  ConfigFlags sweep_flags;
  std::string preset;
  std::vector<std::string> deltas;
  std::string sweep_name = "sweep";
  auto* sweep_cmd = app.add_subcommand("sweep", "run a base config over deltas or a preset");
  sweep_flags.attach(sweep_cmd);
  sweep_cmd->add_option("--preset", preset, "e0-trend | e1-trend | katz-fixed-tail | moment-bounds");
  sweep_cmd->add_option("--delta", deltas, "cell as key=value;key=value (repeatable)");
  sweep_cmd->add_option("--name", sweep_name, "sweep name in the summary");

  std::string level = "quick";
  std::string fault;
  std::string verify_json;
  std::uint64_t verify_seed = 1;
  auto* verify_cmd = app.add_subcommand("verify", "run the self-check suites");
  verify_cmd->add_option("level", level, "quick | full")->check(CLI::IsMember({"quick", "full"}));
  verify_cmd->add_option("--inject-fault", fault, "corrupt a table on purpose: gauss")->check(CLI::IsMember({"gauss"}));
  verify_cmd->add_option("--json", verify_json, "write the JSON summary here instead of stdout");
  verify_cmd->add_option("--seed", verify_seed, "seed for random cases");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*field_cmd) {
    std::cout << field_flags.build().to_record();
  } else if (*gauss_cmd) {
    const auto f = gauss_flags.build();
    const Characters chars(f);
    const auto g = gauss_all(chars);
    with_output(gauss_out, [&](std::ostream& out) { print_complex_table(out, g.values()); });
  } else if (*jacobi_cmd) {
    const auto f = jacobi_flags.build();
    const Characters chars(f);
    const CharTuple tuple(f.q(), detail::parse_index_list(jacobi_chars, "chars"));
    std::cout << "route,re,im,abs,angle\n";
    auto print = [](const char* route, const JacobiValue& v) {
      std::cout << route << ',' << detail::format_double(v.value.real()) << ',' << detail::format_double(v.value.imag())
                << ',' << detail::format_double(std::abs(v.value)) << ',' << detail::format_double(v.angle) << '\n';
    };
    if (jacobi_method != "gauss") print("direct", jacobi_direct(chars, tuple));
    if (jacobi_method != "direct") print("gauss", jacobi_via_gauss(gauss_all(chars), tuple));
  } else if (*kl_cmd) {
    const auto f = kl_flags.build();
    const Characters chars(f);
    const auto table = kloosterman_all(gauss_all(chars), kl_n);
    with_output(kl_out, [&](std::ostream& out) { print_complex_table(out, table.values); });
  } else if (*moments_cmd) {
    const auto c = moments_flags.resolve(moments_cmd);
    const auto field = build_field(c);
    const Characters chars(field);
    const auto gtab = gauss_all(chars);
    with_output(c.output, [&](std::ostream& out) {
      out << "draw,n,re,im,abs,count\n";
      for (std::uint32_t d = 0; d < c.draws; ++d) {
        const auto r = measure_draw(c, gtab, d, log_stderr);
        for (unsigned n = 1; n <= r.k_cut; ++n) {
          out << d << ',' << n << ',' << detail::format_double(r.moments(n).real()) << ','
              << detail::format_double(r.moments(n).imag()) << ',' << detail::format_double(std::abs(r.moments(n)))
              << ',' << r.moments.count << '\n';
        }
      }
    });
  } else if (*disc_cmd) {
    const auto c = disc_flags.resolve(disc_cmd);
    const auto field = build_field(c);
    const Characters chars(field);
    const auto gtab = gauss_all(chars);
    with_output(c.output, [&](std::ostream& out) {
      out << "draw,A1,A2,B,n_points,d_exact,d_star,method,convention\n";
      for (std::uint32_t d = 0; d < c.draws; ++d) {
        const auto r = measure_draw(c, gtab, d, log_stderr);
        out << d << ',' << r.a1.size() << ',' << r.a2.size() << ',' << r.tails.size() << ',' << r.disc.n_points << ','
            << detail::format_double(r.disc.d_exact) << ',' << detail::format_double(r.disc.d_star) << ','
            << to_string(r.disc.method) << ',' << (r.disc.empty_convention ? "empty-set-D1" : "") << '\n';
      }
    });
  } else if (*bounds_cmd) {
    const unsigned s = b_eps > 0 ? choose_s(b_q, b_eps) : b_s;
    std::cout << "name,value\n";
    std::cout << "s," << s << '\n';
    std::cout << "e0," << detail::format_double(bound_e0_rhs(b_q, b_a1, b_a2, s, b_c)) << '\n';
    std::cout << "e1," << detail::format_double(bound_e1_rhs(b_q, b_a1, b_a2, b_c)) << '\n';
    std::cout << "eM1," << detail::format_double(bound_em1_rhs(b_q, b_a1, b_a2, b_b, s, b_n)) << '\n';
    std::cout << "eM2," << detail::format_double(bound_em2_rhs(b_q, b_a1, b_a2, b_b, b_n)) << '\n';
    std::cout << "K_e0," << detail::format_double(choose_k_e0(b_q, b_a1, s)) << '\n';
    std::cout << "K_e1," << detail::format_double(choose_k_e1(b_q, b_a1, b_a2)) << '\n';
    std::cout << "A_circle_lower," << detail::format_double(a_circle_lower_bound(b_a1, b_a2, b_b)) << '\n';
  } else if (*run_cmd) {
    const auto c = run_flags.resolve(run_cmd);
    const auto table = run_experiment(c, log_stderr);
    with_output(c.output, [&](std::ostream& out) { write_table(c, table, out); });
  } else if (*sweep_cmd) {
    const auto base = sweep_flags.resolve(sweep_cmd);
    SweepSpec spec;
    if (!preset.empty()) {
      spec = preset_sweep(preset, base);
    } else {
      spec.name = sweep_name;
      spec.base = base;
    }
    spec.deltas.insert(spec.deltas.end(), deltas.begin(), deltas.end());
    const auto table = run_sweep(spec, log_stderr);
    with_output(spec.base.output, [&](std::ostream& out) { write_table(spec.base, table, out); });
    const auto summary = summarize(table);
    if (spec.base.output.empty() || spec.base.output == "-") {
      write_summary_csv(std::cerr, spec.name, summary);
    } else {
      std::ofstream out(spec.base.output + ".summary.csv");
      write_summary_csv(out, spec.name, summary);
    }
  } else if (*verify_cmd) {
    VerifyOptions opt;
    opt.level = level == "full" ? VerifyLevel::Full : VerifyLevel::Quick;
    opt.corrupt_gauss = fault == "gauss";
    opt.seed = verify_seed;
    const auto rep = verify_suite(opt);
    const auto j = rep.to_json(opt.level).dump(2);
    if (verify_json.empty()) {
      std::cout << j << '\n';
    } else {
      std::ofstream(verify_json) << j << '\n';
    }
    for (const auto& f : rep.failures) log_stderr("violation: " + f.dump());
    return rep.passed() ? 0 : exit_code_for(ErrorKind::InvariantViolation);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const jdist::Error& e) {
    std::cerr << "jdist: " << e.what() << '\n';
    return jdist::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "jdist: " << e.what() << '\n';
    return 1;
  }
}

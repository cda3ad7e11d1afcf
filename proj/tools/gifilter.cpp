// SPDX-License-Identifier: Apache-2.0
// Experiment driver: config-driven runs of the check suites, the filter and
// the Monte Carlo comparison. Exit codes: 0 all checks pass, 1 a check (or
// the run) failed, 2 configuration or I/O error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "config.hpp"

namespace {

namespace fs = std::filesystem;
using gifilter::cli::ConfigError;
using gifilter::cli::json;
using namespace gifilter::experiments;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Run {
  std::string command;
  std::string config_path;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
}

class Writer {
 public:
  Writer(const Run& run, const json& config, std::uint64_t seed) : dir_(run.out) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory '" + run.out + "': " + ec.message());
    header_ = {{"version", kVersion},
               {"command", run.command},
               {"config_hash", hex64(fnv1a(config.dump()))},
               {"seed", seed}};
  }

  const json& header() const { return header_; }

  std::string stamp() const {
    return "# " + header_["version"].get<std::string>() + " config=" + header_["config_hash"].get<std::string>() +
           " seed=" + std::to_string(header_["seed"].get<std::uint64_t>()) + "\n";
  }

  void text(const std::string& name, const std::string& body) const {
    const fs::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary);
    out << body;
    if (!out) throw IoError("cannot write '" + p.string() + "'");
  }

  void csv(const Table& t) const { text(t.name + ".csv", stamp() + t.csv()); }

  /// report.json plus one CSV per table; returns the exit code.
  int report(const Report& r) const {
    json checks = json::array();
    for (const auto& c : r.checks) {
      checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
      std::cout << (c.pass ? "PASS  " : "FAIL  ") << c.name << ": " << c.detail << "\n";
    }
    for (const auto& t : r.tables) csv(t);
    text("report.json", json{{"header", header_}, {"checks", checks}, {"all_pass", r.all_pass()}}.dump(2) + "\n");
    return r.all_pass() ? 0 : 1;
  }

 private:
  fs::path dir_;
  json header_;
};

json vec_json(const gifilter::Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json mat_json(const gifilter::Mat& m) {
  json rows = json::array();
  for (long i = 0; i < m.rows(); ++i) rows.push_back(vec_json(m.row(i).transpose()));
  return rows;
}

template <class Options>
std::uint64_t apply(Options& o, const Run& run) {
  if (run.seed) o.seed = *run.seed;
  if constexpr (requires { o.threads; }) o.threads = run.threads;
  return o.seed;
}

int run_filter_command(const Run& run, const json& config) {
  FilterRunOptions o = gifilter::cli::filter_run_options(config);
  const std::uint64_t seed = apply(o, run);
  const Writer w(run, config, seed);
  const auto records = run_filter(o);
  json steps = json::array();
  Table t{"trajectory", {"step", "x_true_1", "x_true_2", "x0_prime_1", "x0_prime_2", "ekf_1", "ekf_2", "zhat"}, {}};
  for (const auto& r : records) {
    steps.push_back({{"step", r.step},
                     {"x_true", vec_json(r.x_true)},
                     {"y1", vec_json(r.y1)},
                     {"x_delta", vec_json(r.x_delta)},
                     {"zhat", vec_json(r.zhat)},
                     {"mu_hat", vec_json(r.mu_hat)},
                     {"Sigma_hat", mat_json(r.Sigma_hat)},
                     {"x0_prime", vec_json(r.x0_prime)},
                     {"ekf_x", vec_json(r.ekf_x)},
                     {"ekf_P", mat_json(r.ekf_P)}});
    std::vector<std::string> row{num(r.step)};
    const long p = r.x_true.size();
    for (const gifilter::Vec* v : {&r.x_true, &r.x0_prime, &r.ekf_x}) {
      for (long i = 0; i < 2; ++i) row.push_back(i < p ? num((*v)(i)) : "");
    }
    row.push_back(num(r.zhat(0)));
    t.rows.push_back(row);
  }
  w.csv(t);
  w.text("records.json", json{{"header", w.header()}, {"steps", steps}}.dump(2) + "\n");
  std::cout << "wrote " << records.size() << " steps to " << run.out << "\n";
  return 0;
}

int dispatch(const Run& run) {
  const json config = load_config(run.config_path);
  auto suite = [&](auto options, auto&&... suites) {
    const std::uint64_t seed = apply(options, run);
    const Writer w(run, config, seed);
    Report r;
    (r.merge(suites(options)), ...);
    return w.report(r);
  };
  if (run.command == "check-geometry") {
    return suite(gifilter::cli::geometry_options(config), exp_expansion_suite, curvature_suite);
  }
  if (run.command == "check-jacobi") return suite(gifilter::cli::jacobi_options(config), zeta_suite);
  if (run.command == "check-barycentre") return suite(gifilter::cli::barycentre_options(config), barycentre_suite);
  if (run.command == "check-conditional") return suite(gifilter::cli::conditional_options(config), conditional_suite);
  if (run.command == "mc-compare") return suite(gifilter::cli::mc_compare_options(config), filter_mc_suite);
  if (run.command == "run-filter") return run_filter_command(run, config);
  throw ConfigError("unknown command '" + run.command + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"intrinsic filtering experiments"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  Run run;
  std::uint64_t seed = 0;
  for (const char* name :
       {"check-geometry", "check-jacobi", "check-barycentre", "check-conditional", "run-filter", "mc-compare"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", run.config_path, "JSON config (defaults apply when omitted)")->check(CLI::ExistingFile);
    sub->add_option("--out", run.out, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "overrides the config seed");
    sub->add_option("--threads", run.threads, "worker threads (results do not depend on it)")
        ->check(CLI::Range(1, 256))
        ->capture_default_str();
    sub->callback([&run, sub, &seed] {
      run.command = sub->get_name();
      if (sub->count("--seed")) run.seed = seed;
    });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    return dispatch(run);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return 1;
  }
}

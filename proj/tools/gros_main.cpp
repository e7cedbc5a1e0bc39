// gros: Galton rank order statistics toolkit.
//
// Subcommands: galton | index | contact | limit-sample | verify | oracle.
// Exit codes: 0 success, 1 domain error, 2 usage error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "gros/contact.hpp"
#include "gros/distribution.hpp"
#include "gros/galton.hpp"
#include "gros/limit_laws.hpp"
#include "gros/oracle.hpp"
#include "gros/rng.hpp"
#include "gros/verify.hpp"
#include "gros/version.hpp"

namespace {

using nlohmann::json;

std::vector<double> read_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    out.push_back(std::stod(line));
  }
  if (out.empty()) throw std::runtime_error("no values in " + path);
  return out;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void write_output(const json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << j.dump(2) << "\n";
  }
}

json stamp(json j, const json& config_echo, std::uint64_t seed) {
  j["tool_version"] = gros::kToolVersion;
  j["config_hash"] = gros::config_hash_hex(config_echo);
  j["seed"] = seed;
  return j;
}

struct GaltonArgs {
  std::string x_path, y_path;
  bool as_json = false;
  std::string out;
};

int run_galton_compute(const GaltonArgs& a) {
  auto xs = read_values(a.x_path);
  auto ys = read_values(a.y_path);
  gros::IndexReport rep = gros::empirical_index(xs, ys);
  json cfg = {{"x", a.x_path}, {"y", a.y_path}};
  json j;
  j["n"] = rep.n;
  j["m"] = rep.m;
  j["gamma_hat"] = rep.gamma_hat.str();
  j["gamma_hat_decimal"] = rep.gamma_hat.to_double();
  j["tie_measure"] = rep.tie_measure.str();
  if (rep.count) {
    j["count"] = *rep.count;
    j["p_value"] = gros::chung_feller_pvalue(*rep.count, static_cast<std::int64_t>(rep.n)).str();
  }
  j = stamp(std::move(j), cfg, 0);
  if (a.as_json || !a.out.empty()) {
    write_output(j, a.out);
  } else {
    std::printf("n=%zu m=%zu\n", rep.n, rep.m);
    std::printf("gamma_hat   = %s = %.10g\n", rep.gamma_hat.str().c_str(),
                rep.gamma_hat.to_double());
    std::printf("tie_measure = %s\n", rep.tie_measure.str().c_str());
    if (rep.count)
      std::printf("count = %lld   p_value = %s\n", static_cast<long long>(*rep.count),
                  j["p_value"].get<std::string>().c_str());
    std::printf("[gros %s config %s]\n", gros::kToolVersion,
                j["config_hash"].get<std::string>().c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Galton rank order statistic and stochastic-dominance index toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", gros::kToolVersion);

  // galton compute
  auto* galton_cmd = app.add_subcommand("galton", "Empirical rank statistics");
  galton_cmd->require_subcommand(1);
  GaltonArgs ga;
  auto* compute = galton_cmd->add_subcommand("compute", "Exact empirical index of two samples");
  compute->add_option("--x", ga.x_path, "newline-separated sample")->required();
  compute->add_option("--y", ga.y_path, "newline-separated sample")->required();
  compute->add_flag("--json", ga.as_json, "JSON output");
  compute->add_option("--out", ga.out, "write JSON to file");

  // index
  struct {
    std::string f_path, g_path, out;
    bool as_json = false;
    int budget = 1 << 14;
  } ia;
  auto* index_cmd = app.add_subcommand("index", "Population dominance index");
  index_cmd->add_option("--F", ia.f_path, "distribution spec JSON")->required();
  index_cmd->add_option("--G", ia.g_path, "distribution spec JSON")->required();
  index_cmd->add_flag("--json", ia.as_json);
  index_cmd->add_option("--out", ia.out);
  index_cmd->add_option("--budget", ia.budget, "sign-scan cells");

  // contact analyze
  struct {
    std::string f_path, g_path, out;
    bool as_json = false;
    double t0 = -1.0;
    int budget = 1 << 14;
    double eta = 0.08;
  } ca;
  auto* contact_cmd = app.add_subcommand("contact", "Contact-point analysis");
  contact_cmd->require_subcommand(1);
  auto* analyze = contact_cmd->add_subcommand("analyze", "Locate and classify contact points");
  analyze->add_option("--F", ca.f_path)->required();
  analyze->add_option("--G", ca.g_path)->required();
  analyze->add_option("--t0", ca.t0, "analyze a single point instead of scanning");
  analyze->add_option("--budget", ca.budget);
  analyze->add_option("--eta", ca.eta, "dyadic fit window");
  analyze->add_flag("--json", ca.as_json);
  analyze->add_option("--out", ca.out);

  // limit-sample
  struct {
    std::string spec_path, out;
    std::size_t reps = 1000;
    std::uint64_t seed = 1;
  } la;
  auto* limit_cmd = app.add_subcommand("limit-sample", "Draw from a limiting law");
  limit_cmd->add_option("--spec", la.spec_path, "limit law spec JSON")->required();
  limit_cmd->add_option("--reps", la.reps);
  limit_cmd->add_option("--seed", la.seed);
  limit_cmd->add_option("--out", la.out, "CSV output path")->required();

  // verify
  struct {
    std::string cfg_path, out, csv_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::size_t reps = 0;
    int threads = 0;
  } va;
  auto* verify_cmd = app.add_subcommand("verify", "Monte Carlo convergence experiment");
  verify_cmd->add_option("--config", va.cfg_path)->required();
  verify_cmd->add_option("--out", va.out, "report JSON path");
  verify_cmd->add_option("--csv", va.csv_dir, "directory for raw-sample CSV dumps");
  verify_cmd->add_option("--seed", va.seed)->each([&](const std::string&) { va.seed_set = true; });
  verify_cmd->add_option("--reps", va.reps);
  verify_cmd->add_option("--threads", va.threads, "worker threads (0 = hardware)")
      ->envname("GROS_THREADS");

  // oracle
  struct {
    int n = 4;
    std::string f_path, g_path, out;
    bool as_json = false;
  } oa;
  auto* oracle_cmd = app.add_subcommand("oracle", "Brute-force ground truth");
  oracle_cmd->require_subcommand(1);
  auto* pmf_cmd = oracle_cmd->add_subcommand("galton-pmf", "Exact pmf by enumeration");
  pmf_cmd->add_option("--n", oa.n, "sample size (<= 8)")->required();
  pmf_cmd->add_flag("--json", oa.as_json);
  pmf_cmd->add_option("--out", oa.out);
  auto* oidx_cmd = oracle_cmd->add_subcommand("index", "Exact finite-support index");
  oidx_cmd->add_option("--F", oa.f_path)->required();
  oidx_cmd->add_option("--G", oa.g_path)->required();
  oidx_cmd->add_flag("--json", oa.as_json);
  oidx_cmd->add_option("--out", oa.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (compute->parsed()) return run_galton_compute(ga);

    if (index_cmd->parsed()) {
      json fj = read_json(ia.f_path), gj = read_json(ia.g_path);
      gros::Distribution f = gros::Distribution::from_json(fj);
      gros::Distribution g = gros::Distribution::from_json(gj);
      json cfg = {{"f", fj}, {"g", gj}, {"budget", ia.budget}};
      json j;
      if (f.is_finite_support() && g.is_finite_support()) {
        gros::Rat exact =
            gros::population_index_exact(f.to_finite_support(), g.to_finite_support());
        j["gamma"] = exact.str();
        j["gamma_decimal"] = exact.to_double();
      } else {
        j["gamma_decimal"] = gros::population_index(f, g, ia.budget);
      }
      j = stamp(std::move(j), cfg, 0);
      if (ia.as_json || !ia.out.empty())
        write_output(j, ia.out);
      else
        std::printf("gamma = %.12g\n", j["gamma_decimal"].get<double>());
      return 0;
    }

    if (analyze->parsed()) {
      json fj = read_json(ca.f_path), gj = read_json(ca.g_path);
      gros::Distribution f = gros::Distribution::from_json(fj);
      gros::Distribution g = gros::Distribution::from_json(gj);
      json cfg = {{"f", fj}, {"g", gj}, {"budget", ca.budget}, {"eta", ca.eta}};
      std::vector<gros::ContactPoint> pts;
      if (ca.t0 >= 0.0)
        pts.push_back(gros::analyze_contact_point(f, g, ca.t0, ca.eta));
      else
        pts = gros::find_contacts(f, g, ca.budget);
      json arr = json::array();
      for (const auto& cp : pts) {
        json cj;
        cj["t0"] = cp.t0;
        cj["position"] = gros::to_string(cp.position);
        cj["class"] = gros::to_string(cp.cls);
        cj["source"] = gros::to_string(cp.source);
        if (cp.r_left) cj["r_l"] = *cp.r_left;
        if (cp.r_right) cj["r_r"] = *cp.r_right;
        if (cp.c_left) cj["c_l"] = *cp.c_left;
        if (cp.c_right) cj["c_r"] = *cp.c_right;
        if (cp.r_left_stderr) cj["r_l_stderr"] = *cp.r_left_stderr;
        if (cp.r_right_stderr) cj["r_r_stderr"] = *cp.r_right_stderr;
        if (cp.r_left_snapped) cj["r_l_snapped"] = *cp.r_left_snapped;
        if (cp.r_right_snapped) cj["r_r_snapped"] = *cp.r_right_snapped;
        arr.push_back(std::move(cj));
      }
      json j;
      j["contacts"] = arr;
      j["grid"] = ca.budget;
      j = stamp(std::move(j), cfg, 0);
      if (ca.as_json || !ca.out.empty()) {
        write_output(j, ca.out);
      } else {
        for (const auto& cj : j["contacts"])
          std::printf("t0=%-10.8g %-10s %-28s %s\n", cj["t0"].get<double>(),
                      cj["position"].get<std::string>().c_str(),
                      cj["class"].get<std::string>().c_str(),
                      cj["source"].get<std::string>().c_str());
        if (j["contacts"].empty()) std::printf("no contact points found\n");
      }
      return 0;
    }

    if (limit_cmd->parsed()) {
      json sj = read_json(la.spec_path);
      gros::LimitLawSpec spec = gros::LimitLawSpec::from_json(sj);
      std::ofstream out(la.out);
      if (!out) throw std::runtime_error("cannot write " + la.out);
      out << "# tool=gros-" << gros::kToolVersion << " spec_hash=" << gros::config_hash_hex(sj)
          << " seed=" << la.seed << " reps=" << la.reps << "\n";
      out << "value\n";
      out.precision(17);
      for (std::size_t r = 0; r < la.reps; ++r) {
        gros::Rng rng(gros::derive_seed(la.seed, r));
        out << spec.sample(rng) << "\n";
      }
      return 0;
    }

    if (verify_cmd->parsed()) {
      json cj = read_json(va.cfg_path);
      gros::ExperimentConfig cfg = gros::ExperimentConfig::from_json(cj);
      if (va.seed_set) cfg.seed = va.seed;
      if (va.reps > 0) cfg.reps = va.reps;
      if (va.threads != 0) cfg.threads = va.threads;
      if (cfg.mode == gros::ExperimentMode::residual) {
        json j = stamp(json{}, cfg.to_json(), cfg.seed);
        json per_size = json::array();
        for (auto [n, m] : cfg.sizes) {
          std::vector<double> res =
              gros::decomposition_residual(cfg.f, cfg.g, n, m, cfg.reps, cfg.seed, cfg.threads);
          double worst = 0.0, mean = 0.0;
          for (double v : res) {
            worst = std::max(worst, std::fabs(v));
            mean += v / static_cast<double>(res.size());
          }
          per_size.push_back({{"n", n}, {"m", m}, {"max_abs", worst}, {"mean", mean}});
        }
        j["residuals"] = per_size;
        write_output(j, va.out);
        return 0;
      }
      gros::ExperimentReport report = gros::run_convergence_experiment(cfg);
      json j = report.to_json(cfg);
      if (!va.csv_dir.empty()) {
        for (const auto& s : report.sizes) {
          std::string path =
              va.csv_dir + "/scaled_" + std::to_string(s.n) + "_" + std::to_string(s.m) + ".csv";
          std::ofstream csv(path);
          if (!csv) throw std::runtime_error("cannot write " + path);
          csv << "# tool=gros-" << gros::kToolVersion << " config=" << report.config_hash
              << " seed=" << cfg.seed << "\n";
          csv << "value\n";
          csv.precision(17);
          for (double v : s.scaled_samples) csv << v << "\n";
        }
        if (!report.limit_samples.empty()) {
          std::ofstream csv(va.csv_dir + "/limit_samples.csv");
          csv << "# tool=gros-" << gros::kToolVersion << " config=" << report.config_hash
              << " seed=" << cfg.seed << "\n";
          csv << "value\n";
          csv.precision(17);
          for (double v : report.limit_samples) csv << v << "\n";
        }
      }
      write_output(j, va.out);
      return 0;
    }

    if (pmf_cmd->parsed()) {
      std::vector<gros::Rat> pmf = gros::oracle::enumerate_galton_distribution(oa.n);
      json cfg = {{"n", oa.n}};
      json j;
      json arr = json::array();
      for (const auto& p : pmf) arr.push_back(p.str());
      j["pmf"] = arr;
      j = stamp(std::move(j), cfg, 0);
      if (oa.as_json || !oa.out.empty()) {
        write_output(j, oa.out);
      } else {
        for (std::size_t k = 0; k < pmf.size(); ++k)
          std::printf("P(count = %zu) = %s\n", k, pmf[k].str().c_str());
      }
      return 0;
    }

    if (oidx_cmd->parsed()) {
      json fj = read_json(oa.f_path), gj = read_json(oa.g_path);
      gros::Distribution f = gros::Distribution::from_json(fj);
      gros::Distribution g = gros::Distribution::from_json(gj);
      if (!f.is_finite_support() || !g.is_finite_support())
        throw std::runtime_error("oracle index requires finite-support laws");
      gros::Rat idx = gros::oracle::exact_index_finite(f.to_finite_support(), g.to_finite_support());
      json cfg = {{"f", fj}, {"g", gj}};
      json j;
      j["gamma"] = idx.str();
      j["gamma_decimal"] = idx.to_double();
      j = stamp(std::move(j), cfg, 0);
      if (oa.as_json || !oa.out.empty())
        write_output(j, oa.out);
      else
        std::printf("gamma = %s = %.12g\n", idx.str().c_str(), idx.to_double());
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spb/oracles.hpp"
#include "spb/shape.hpp"
#include "spb/specio.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

int verbosity() {
  const char* v = std::getenv("SPBOUND_VERBOSE");
  return v ? std::atoi(v) : 0;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

void log_result(const spb::BoundResult& r) {
  if (verbosity() < 1) return;
  for (size_t i = 0; i < r.trace.size(); ++i)
    std::cerr << "iter " << i + 1 << ": objective=" << fmt(r.trace[i].master_objective)
              << " reduced_cost=" << fmt(r.trace[i].reduced_cost)
              << " atom=" << fmt(r.trace[i].new_atom) << "\n";
}

nlohmann::json result_json(const spb::BoundResult& r) {
  nlohmann::json j;
  j["bound"] = r.bound;
  j["gap"] = r.gap;
  j["iterations"] = r.iterations;
  j["atoms"] = r.atoms;
  j["weights"] = r.weights;
  j["family"] = r.family.name();
  j["converged"] = r.converged;
  j["epsilon"] = r.epsilon_used;
  std::vector<std::string> paths;
  for (const auto& t : r.trace)
    paths.push_back(t.path == spb::SubproblemPath::ExactPolynomial ? "exact" : "numeric");
  j["subproblem_paths"] = paths;
  return j;
}

spb::ProblemSpec load_spec(const std::string& path, double epsilon, double cap) {
  spb::ProblemSpec spec = spb::io::parse_problem_file(path);
  if (epsilon > 0) spec.cg_epsilon = epsilon;
  if (cap > 0) spec.search_cap = cap;
  spec.validate();
  return spec;
}

class CsvWriter {
public:
  CsvWriter(const std::filesystem::path& path, const std::string& provenance,
            std::vector<std::string> header)
      : out_(path, std::ios::binary) {
    if (!out_) throw spb::Error("cannot open " + path.string() + " for writing");
    out_ << "# spbound " << kVersion << ", " << provenance << "\n";
    for (size_t i = 0; i < header.size(); ++i)
      out_ << header[i] << (i + 1 < header.size() ? "," : "\n");
  }
  void row(const std::vector<double>& vals) {
    for (size_t i = 0; i < vals.size(); ++i)
      out_ << fmt(vals[i]) << (i + 1 < vals.size() ? "," : "\n");
  }

private:
  std::ofstream out_;
};

int cmd_bound(const std::string& path, double epsilon, double cap) {
  spb::BoundResult r = spb::run_cg(load_spec(path, epsilon, cap));
  log_result(r);
  std::cout << result_json(r).dump(2) << "\n";
  return r.converged ? 0 : 1;
}

int cmd_export(const std::string& path, int points, const std::string& out, double epsilon,
               double cap) {
  spb::ProblemSpec spec = load_spec(path, epsilon, cap);
  spb::BoundResult r = spb::run_cg(spec);
  log_result(r);
  spb::MixtureDistribution dist = spb::make_distribution(r);
  spb::DistributionTable t = spb::export_distribution(dist, points);
  std::string prov = std::string("family=") + r.family.name() +
                     ", epsilon=" + fmt(r.epsilon_used) + ", points=" + std::to_string(points) +
                     ", converged=" + (r.converged ? "true" : "false");
  if (t.atom_table) {
    CsvWriter w(out, prov, {"atom", "weight"});
    for (size_t i = 0; i < t.atoms.size(); ++i) w.row({t.atoms[i], t.weights[i]});
  } else {
    CsvWriter w(out, prov, {"u", "pdf", "cdf"});
    for (size_t i = 0; i < t.u.size(); ++i) w.row({t.u[i], t.pdf[i], t.cdf[i]});
  }
  return r.converged ? 0 : 1;
}

// Deductible sweep: expected-LER bounds with and without unimodality.
bool figure_ler(const std::filesystem::path& dir, double mode, const std::string& name) {
  const double mu = 50.0, sigma2 = 225.0, b = 100.0;
  CsvWriter w(dir / (name + ".csv"),
              "ler sweep mu=50 sigma2=225 b=100 mode=" + fmt(mode) + ", d=0..100",
              {"d", "ler_lo", "ler_hi", "gap", "ler_lo_unimodal", "ler_hi_unimodal",
               "gap_unimodal"});
  bool ok = true;
  for (int d = 0; d <= 100; ++d) {
    spb::LerBounds plain = spb::ler_bounds(mu, sigma2, b, d, spb::MixtureFamily::dirac());
    spb::LerBounds uni =
        spb::ler_bounds(mu, sigma2, b, d, spb::MixtureFamily::khintchine(mode));
    ok = ok && plain.upper_solve.converged && plain.lower_solve.converged &&
         uni.upper_solve.converged && uni.lower_solve.converged;
    w.row({static_cast<double>(d), plain.ler_lo, plain.ler_hi, plain.ler_hi - plain.ler_lo,
           uni.ler_lo, uni.ler_hi, uni.ler_hi - uni.ler_lo});
  }
  return ok;
}

// At-the-money policy priced with lognormal mixtures across alpha.
bool figure_alpha(const std::filesystem::path& dir) {
  const double x0 = 49.50, r = 0.01, nu = 0.20, t = 1.0;
  const double mu = x0 * std::exp(r * t);
  const double sigma = mu * std::sqrt(std::exp(nu * nu * t) - 1.0);
  const double parametric =
      std::exp(r * t) * spb::oracles::black_scholes_call(x0, x0, r, nu, t);
  spb::ProblemSpec base = spb::standard_policy_problem(mu, sigma * sigma, x0, spb::kInf, 2);
  CsvWriter w(dir / "fig3.csv",
              "alpha sweep, mu=" + fmt(mu) + " sigma=" + fmt(sigma) + " d=" + fmt(x0) +
                  ", parametric=" + fmt(parametric),
              {"alpha", "bound", "pct_above_parametric", "feasible"});
  bool ok = true;
  for (double alpha = 1.0; alpha <= 20.0 + 1e-9; alpha += 0.5) {
    spb::ProblemSpec s = base;
    s.family = spb::MixtureFamily::lognormal(alpha);
    try {
      spb::BoundResult res = spb::run_cg(s);
      ok = ok && res.converged;
      w.row({alpha, res.bound, 100.0 * (res.bound / parametric - 1.0), 1.0});
    } catch (const spb::InfeasibleError&) {
      w.row({alpha, std::nan(""), std::nan(""), 0.0});
    }
  }
  return ok;
}

// Smoothed-uniform bounds converging to the uniform-mixture bound.
bool figure_eta(const std::filesystem::path& dir) {
  const double x0 = 49.50, r = 0.01, nu = 0.20, t = 1.0;
  const double mu = x0 * std::exp(r * t);
  const double sigma = mu * std::sqrt(std::exp(nu * nu * t) - 1.0);
  spb::ProblemSpec base = spb::standard_policy_problem(mu, sigma * sigma, x0, spb::kInf, 2);
  spb::ProblemSpec kh = base;
  kh.family = spb::MixtureFamily::khintchine(x0);
  spb::BoundResult ref = spb::run_cg(kh);
  bool ok = ref.converged;
  CsvWriter w(dir / "fig8.csv",
              "eta sweep, mode=" + fmt(x0) + ", uniform_bound=" + fmt(ref.bound),
              {"eta", "bound", "uniform_bound", "pct_difference"});
  for (double eta : {1.0, 5.0, 10.0, 50.0, 100.0}) {
    spb::ProblemSpec s = base;
    s.family = spb::MixtureFamily::smoothed_uniform(x0, eta);
    spb::BoundResult res = spb::run_cg(s);
    ok = ok && res.converged;
    w.row({eta, res.bound, ref.bound, 100.0 * std::abs(res.bound - ref.bound) / ref.bound});
  }
  return ok;
}

// Logistic-difference approximations of the Unif(20,30) density.
bool figure_density(const std::filesystem::path& dir) {
  const double a = 20.0, b = 30.0;
  const std::vector<double> etas = {1.0, 5.0, 10.0, 50.0};
  std::vector<std::string> header = {"u", "exact"};
  for (double eta : etas) header.push_back("eta_" + fmt(eta));
  CsvWriter w(dir / "fig9.csv", "Unif(20,30) density approximation, grid n=1001", header);
  for (int i = 0; i <= 1000; ++i) {
    double u = 50.0 * i / 1000.0;
    std::vector<double> row = {u, (u >= a && u <= b) ? 1.0 / (b - a) : 0.0};
    for (double eta : etas) row.push_back(spb::smoothed_uniform_pdf(a, b, eta, u));
    w.row(row);
  }
  return true;
}

int cmd_figure(const std::string& id, const std::string& outdir) {
  std::filesystem::path dir(outdir);
  std::filesystem::create_directories(dir);
  bool ok = false;
  if (id == "fig1") ok = figure_ler(dir, 45.0, "fig1");
  else if (id == "fig2") ok = figure_ler(dir, 50.0, "fig2");
  else if (id == "fig3") ok = figure_alpha(dir);
  else if (id == "fig8") ok = figure_eta(dir);
  else if (id == "fig9") ok = figure_density(dir);
  else throw spb::ValidationError("unknown figure id: " + id +
                                  " (expected fig1, fig2, fig3, fig8, fig9)");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semiparametric bound solver"};
  app.require_subcommand(1);

  std::string spec_path, out_path, figure_id, out_dir;
  double epsilon = 0.0, cap = 0.0;
  int points = 1024;

  CLI::App* bound = app.add_subcommand("bound", "Compute a bound for a problem file");
  bound->add_option("spec", spec_path, "problem JSON file")->required();
  bound->add_option("--epsilon", epsilon, "column-generation tolerance override");
  bound->add_option("--cap", cap, "search cap override for unbounded supports");

  CLI::App* exp = app.add_subcommand("export", "Export the extremal distribution as CSV");
  exp->add_option("spec", spec_path, "problem JSON file")->required();
  exp->add_option("--points", points, "number of evaluation points")->required();
  exp->add_option("-o,--output", out_path, "output CSV path")->required();
  exp->add_option("--epsilon", epsilon, "column-generation tolerance override");
  exp->add_option("--cap", cap, "search cap override for unbounded supports");

  CLI::App* fig = app.add_subcommand("figure", "Reproduce a figure series as CSV");
  fig->add_option("id", figure_id, "series id: fig1, fig2, fig3, fig8, fig9")->required();
  fig->add_option("-o,--output", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (bound->parsed()) return cmd_bound(spec_path, epsilon, cap);
    if (exp->parsed()) return cmd_export(spec_path, points, out_path, epsilon, cap);
    return cmd_figure(figure_id, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

// langevin-kit: command-line front end for the sampler library.
//
// Subcommands:
//   couple    synchronously coupled chain pairs, distance traces as CSV
//   spectral  contraction-rate contour grids over (gamma, h) as CSV
//   certify   positive-definiteness certificate for the one-step form, JSON
//   sample    posterior sampling runs, one summary row per scheme as CSV
//   bias      bias-vs-reference tables over (scheme, h, gamma) as CSV
//
// Exit codes: 0 success, 2 usage/config/data error, 3 every requested run
// diverged, 4 certificate failed.
//
// Every option can also be supplied through --config FILE (JSON, keys named
// after the long options, "version": 1); explicit flags win over the file.
// Outputs are deterministic for a fixed seed: reruns are byte-identical.
// LANGEVIN_KIT_THREADS caps worker threads (outputs do not depend on it).

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "langevin/certificate.hpp"
#include "langevin/constants.hpp"
#include "langevin/coupling.hpp"
#include "langevin/csv.hpp"
#include "langevin/diagnostics.hpp"
#include "langevin/estimator.hpp"
#include "langevin/idx.hpp"
#include "langevin/integrator.hpp"
#include "langevin/logistic.hpp"
#include "langevin/potential.hpp"
#include "langevin/spectral.hpp"

namespace {

using nlohmann::json;
using namespace langevin;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// config file support

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    throw UsageError("config '" + path + "': " + e.what());
  }
  if (!cfg.is_object()) throw UsageError("config '" + path + "': not a JSON object");
  if (!cfg.contains("version") || !cfg["version"].is_number_integer() ||
      cfg["version"].get<int>() != 1)
    throw UsageError("config '" + path + "': expected \"version\": 1");
  return cfg;
}

// Fill `value` from the config when the flag was not given on the command
// line.  Config keys are the long option names without the leading dashes.
template <typename T>
void merge(const json& cfg, const CLI::App& sub, const std::string& flag, T& value) {
  if (sub.count("--" + flag) > 0) return;
  if (cfg.is_null() || !cfg.contains(flag)) return;
  try {
    value = cfg.at(flag).get<T>();
  } catch (const json::exception& e) {
    throw UsageError("config key '" + flag + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// shared option blocks

struct TargetOptions {
  std::string target = "gaussian";
  // gaussian
  double m = 1.0, M = 10.0;
  long long dim = 2;
  // blr-synth
  long long n = 500, d = 20;
  double sep = 1.0;
  long long data_seed = 7;
  // blr-* shared
  double sigma2 = 1.0;
  bool at_minimizer = false;
  // blr-idx
  std::string images, labels;
  std::vector<long long> digits = {3, 5};
};

void add_target_options(CLI::App* sub, TargetOptions& t) {
  sub->add_option("--target", t.target, "gaussian | blr-synth | blr-idx");
  sub->add_option("--m", t.m, "smallest curvature (gaussian target)");
  sub->add_option("--M", t.M, "largest curvature (gaussian target)");
  sub->add_option("--dim", t.dim, "gaussian dimension (curvatures linearly spaced)");
  sub->add_option("--n", t.n, "synthetic dataset size");
  sub->add_option("--d", t.d, "synthetic feature dimension");
  sub->add_option("--sep", t.sep, "synthetic class separation");
  sub->add_option("--data-seed", t.data_seed, "synthetic dataset seed");
  sub->add_option("--sigma2", t.sigma2, "Gaussian prior variance for blr targets");
  sub->add_flag("--at-minimizer", t.at_minimizer,
                "use Hessian curvature at the minimizer for (m, M)");
  sub->add_option("--images", t.images, "IDX image file (blr-idx)");
  sub->add_option("--labels", t.labels, "IDX label file (blr-idx)");
  sub->add_option("--digits", t.digits, "two digits to keep for blr-idx")
      ->delimiter(',');
}

void merge_target(const json& cfg, const CLI::App& sub, TargetOptions& t) {
  merge(cfg, sub, "target", t.target);
  merge(cfg, sub, "m", t.m);
  merge(cfg, sub, "M", t.M);
  merge(cfg, sub, "dim", t.dim);
  merge(cfg, sub, "n", t.n);
  merge(cfg, sub, "d", t.d);
  merge(cfg, sub, "sep", t.sep);
  merge(cfg, sub, "data-seed", t.data_seed);
  merge(cfg, sub, "sigma2", t.sigma2);
  merge(cfg, sub, "at-minimizer", t.at_minimizer);
  merge(cfg, sub, "images", t.images);
  merge(cfg, sub, "labels", t.labels);
  merge(cfg, sub, "digits", t.digits);
}

struct TargetBundle {
  std::unique_ptr<Potential> pot;
  LogisticRegressionPotential* blr = nullptr;  // non-null for blr targets
};

TargetBundle make_target(const TargetOptions& t) {
  TargetBundle b;
  if (t.target == "gaussian") {
    if (!(t.m > 0.0) || !(t.M >= t.m))
      throw UsageError("gaussian target needs 0 < m <= M");
    if (t.dim < 1) throw UsageError("--dim must be positive");
    std::vector<double> eig(static_cast<std::size_t>(t.dim));
    for (std::size_t i = 0; i < eig.size(); ++i)
      eig[i] = eig.size() == 1
                   ? t.m
                   : t.m + (t.M - t.m) * double(i) / double(eig.size() - 1);
    b.pot = std::make_unique<DiagonalGaussian>(eig);
    return b;
  }
  LogisticData data;
  if (t.target == "blr-synth") {
    if (t.n < 1 || t.d < 1) throw UsageError("blr-synth needs --n >= 1, --d >= 1");
    data = synth_dataset(static_cast<std::uint64_t>(t.data_seed),
                         static_cast<std::size_t>(t.n),
                         static_cast<std::size_t>(t.d), t.sep);
  } else if (t.target == "blr-idx") {
    if (t.images.empty() || t.labels.empty())
      throw UsageError("blr-idx needs --images and --labels");
    if (t.digits.size() != 2)
      throw UsageError("--digits must name exactly two digits");
    data = load_idx(t.images, t.labels,
                    {static_cast<int>(t.digits[0]), static_cast<int>(t.digits[1])});
  } else {
    throw UsageError("unknown target '" + t.target +
                     "' (expected gaussian, blr-synth or blr-idx)");
  }
  if (!(t.sigma2 > 0.0)) throw UsageError("--sigma2 must be positive");
  auto blr = std::make_unique<LogisticRegressionPotential>(std::move(data), t.sigma2);
  if (t.at_minimizer) blr->use_minimizer_curvature();
  b.blr = blr.get();
  b.pot = std::move(blr);
  return b;
}

struct GradOptions {
  std::string grad = "full";
  long long batch = 0;
};

void add_grad_options(CLI::App* sub, GradOptions& g) {
  sub->add_option("--grad", g.grad, "full | sg | vrsg");
  sub->add_option("--batch", g.batch, "subsampling batch size (sg / vrsg)");
}

void merge_grad(const json& cfg, const CLI::App& sub, GradOptions& g) {
  merge(cfg, sub, "grad", g.grad);
  merge(cfg, sub, "batch", g.batch);
}

// Builds the estimator for sg/vrsg (anchored at the minimizer); null for full.
std::unique_ptr<GradientEstimator> make_cli_estimator(const TargetBundle& tb,
                                                      const GradOptions& g,
                                                      GradientKind& kind_out) {
  kind_out = parse_gradient_kind(g.grad);
  if (kind_out == GradientKind::full) return nullptr;
  if (tb.blr == nullptr)
    throw UsageError("--grad " + g.grad + " requires a blr-* target");
  if (g.batch < 1) throw UsageError("--grad " + g.grad + " requires --batch >= 1");
  std::vector<double> anchor;
  if (kind_out == GradientKind::variance_reduced) anchor = tb.blr->minimizer();
  return std::make_unique<GradientEstimator>(make_estimator(
      *tb.blr, kind_out, static_cast<std::size_t>(g.batch), anchor));
}

// ---------------------------------------------------------------------------
// output helpers

struct OutStream {
  std::ofstream file;
  std::ostream* os = &std::cout;
};

OutStream open_out(const std::string& path) {
  OutStream o;
  if (path.empty() || path == "-") return o;
  o.file.open(path, std::ios::binary);
  if (!o.file) throw UsageError("cannot open output file '" + path + "'");
  o.os = &o.file;
  return o;
}

std::vector<Scheme> expand_schemes(const std::vector<std::string>& tags) {
  std::vector<Scheme> out;
  for (const auto& tag : tags) {
    if (tag == "all") {
      out.insert(out.end(), kKineticSchemes.begin(), kKineticSchemes.end());
    } else {
      out.push_back(parse_scheme(tag));
    }
  }
  if (out.empty()) throw UsageError("no scheme given");
  return out;
}

std::string fmt_bool(bool v) { return v ? "1" : "0"; }

// ---------------------------------------------------------------------------
// couple

struct CoupleOptions {
  std::vector<std::string> schemes;
  TargetOptions target;
  GradOptions grad;
  double gamma = 0.0, h = 0.0;
  long long steps = 1000;
  long long pairs = 8;      // full-gradient mode
  long long replicas = 64;  // sg/vrsg mode
  double offset = 1.0;
  long long seed = 0;
  std::string out = "-";
};

int cmd_couple(const CoupleOptions& o) {
  auto schemes = expand_schemes(o.schemes);
  if (!(o.h > 0.0)) throw UsageError("couple requires --h > 0");
  if (!(o.gamma > 0.0)) throw UsageError("couple requires --gamma > 0");
  if (o.steps < 1) throw UsageError("--steps must be positive");

  TargetBundle tb = make_target(o.target);
  GradientKind kind = GradientKind::full;
  auto est = make_cli_estimator(tb, o.grad, kind);
  const std::size_t d = tb.pot->dim();
  const double m = tb.pot->convexity();
  const double M = tb.pot->smoothness();

  bool any_od = false, any_kinetic = false;
  for (Scheme s : schemes) (is_overdamped(s) ? any_od : any_kinetic) = true;
  if (any_od && any_kinetic)
    throw UsageError("cannot mix kinetic and overdamped schemes in one couple run");
  const bool tag_all = schemes.size() > 1;

  OutStream out = open_out(o.out);
  std::vector<std::string> header;
  if (tag_all) header.push_back("scheme");
  // Monte-Carlo runs (stochastic gradients, and the overdamped couplers)
  // report mean squared distance with a standard error; deterministic kinetic
  // pairs report the distance itself.
  const bool sq_schema = (kind != GradientKind::full) || any_od;
  if (sq_schema) {
    header.insert(header.end(), {"k", "mean_sq_distance", "se"});
  } else {
    header.insert(header.end(), {"pair", "k", "distance"});
  }
  CsvWriter csv(*out.os, header);

  // Initial pairs: both chains at the minimizer with zero velocity, second
  // chain offset along a seed-deterministic random direction (one direction
  // per pair index).
  const std::vector<double> x_min = tb.pot->minimizer();
  auto offset_start = [&](long long pair_index) {
    NoiseStream dirs(static_cast<std::uint64_t>(o.seed),
                     900100 + static_cast<std::uint64_t>(pair_index));
    std::vector<double> dir(d);
    double nrm = 0.0;
    for (auto& v : dir) {
      v = dirs.gaussian();
      nrm += v * v;
    }
    nrm = std::sqrt(nrm);
    std::vector<double> x1 = x_min;
    for (std::size_t i = 0; i < d; ++i) x1[i] += o.offset * dir[i] / nrm;
    return x1;
  };

  long long total_runs = 0, divergent_runs = 0;
  for (Scheme s : schemes) {
    const std::vector<double>& x0 = x_min;
    std::vector<double> x1 = offset_start(0);

    if (is_overdamped(s)) {
      if (est == nullptr) {
        if (tb.blr == nullptr)
          throw UsageError("overdamped couple needs a blr-* target");
        est = std::make_unique<GradientEstimator>(
            make_estimator(*tb.blr, GradientKind::full, 0));
      }
      auto r = coupled_run_overdamped(s, *est, x0, x1,
                                      IntegratorParams::overdamped(o.h), o.steps,
                                      static_cast<int>(o.replicas),
                                      static_cast<std::uint64_t>(o.seed));
      ++total_runs;
      if (r.divergent_replicas == r.replicas) ++divergent_runs;
      for (std::size_t k = 0; k < r.mean_sq.size(); ++k) {
        std::vector<std::string> row;
        if (tag_all) row.push_back(to_string(s));
        row.insert(row.end(),
                   {std::to_string(k), fmt17(r.mean_sq[k]), fmt17(r.se[k])});
        csv.row(row);
      }
      continue;
    }

    SchemeConstants cs = constants_for(s, m, M, o.gamma, o.h);
    ModifiedNorm norm = [&] {
      try {
        return cs.norm();
      } catch (const std::invalid_argument&) {
        throw UsageError(std::string("(") + to_string(s) +
                         ") the contraction norm is not defined at this "
                         "(gamma, h): pick an in-region pair");
      }
    }();
    if (!cs.in_region)
      std::cerr << "note: (" << to_string(s) << ") gamma=" << o.gamma
                << " h=" << o.h << " is outside the proven region\n";

    PhaseState z0(d), z1(d);
    z0.x = x0;
    z1.x = x1;
    const IntegratorParams p = IntegratorParams::kinetic(o.h, o.gamma);

    if (kind == GradientKind::full) {
      for (long long pr = 0; pr < o.pairs; ++pr) {
        z1.x = offset_start(pr);
        NoiseStream ns(static_cast<std::uint64_t>(o.seed),
                       static_cast<std::uint64_t>(pr));
        auto r = coupled_run(s, *tb.pot, norm, z0, z1, p, o.steps, ns);
        ++total_runs;
        if (r.divergent) ++divergent_runs;
        for (std::size_t k = 0; k < r.distances.size(); ++k) {
          std::vector<std::string> row;
          if (tag_all) row.push_back(to_string(s));
          row.insert(row.end(), {std::to_string(pr), std::to_string(k),
                                 fmt17(r.distances[k])});
          csv.row(row);
        }
      }
    } else {
      auto r = coupled_run_sg(s, *est, norm, z0, z1, p, o.steps,
                              static_cast<int>(o.replicas),
                              static_cast<std::uint64_t>(o.seed));
      ++total_runs;
      if (r.divergent_replicas == r.replicas) ++divergent_runs;
      for (std::size_t k = 0; k < r.mean_sq.size(); ++k) {
        std::vector<std::string> row;
        if (tag_all) row.push_back(to_string(s));
        row.insert(row.end(),
                   {std::to_string(k), fmt17(r.mean_sq[k]), fmt17(r.se[k])});
        csv.row(row);
      }
    }
  }
  if (out.file.is_open()) out.file.close();
  if (divergent_runs == total_runs && total_runs > 0) {
    std::cerr << "couple: every run diverged\n";
    return 3;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// spectral

struct SpectralOptions {
  std::string scheme = "em";
  double m = 1.0, M = 10.0;
  double gamma_min = 0.0, gamma_max = 0.0;
  long long gammas = 20;
  double h_min = 0.0, h_max = 0.0;
  long long hs = 20;
  long long products = 10000;
  long long replicas = 8;
  long long seed = 0;
  std::string out = "-";
};

int cmd_spectral(const SpectralOptions& o) {
  Scheme s = parse_scheme(o.scheme);
  if (is_overdamped(s)) throw UsageError("spectral expects a kinetic scheme");
  if (!(o.gamma_min > 0.0) || !(o.gamma_max >= o.gamma_min))
    throw UsageError("spectral requires 0 < gamma-min <= gamma-max");
  if (!(o.h_min > 0.0) || !(o.h_max >= o.h_min))
    throw UsageError("spectral requires 0 < h-min <= h-max");
  if (o.gammas < 1 || o.hs < 1) throw UsageError("grid point counts must be >= 1");

  ContourOptions copts;
  copts.gamma_points = static_cast<int>(o.gammas);
  copts.h_points = static_cast<int>(o.hs);
  copts.lyapunov_products = o.products;
  copts.lyapunov_replicas = static_cast<int>(o.replicas);
  copts.seed = static_cast<std::uint64_t>(o.seed);
  ContourGrid grid = contour_grid(s, o.m, o.M, o.gamma_min, o.gamma_max, o.h_min,
                                  o.h_max, copts);

  OutStream out = open_out(o.out);
  std::vector<std::string> header = {"gamma", "h", "value", "divergent"};
  const bool with_ci = (s == Scheme::roabao);
  if (with_ci) header.push_back("ci");
  CsvWriter csv(*out.os, header);
  std::size_t divergent = 0;
  for (const auto& c : grid.cells) {
    if (c.divergent) ++divergent;
    std::vector<std::string> row = {fmt17(c.gamma), fmt17(c.h), fmt17(c.value),
                                    fmt_bool(c.divergent)};
    if (with_ci) row.push_back(fmt17(c.ci));
    csv.row(row);
  }
  if (out.file.is_open()) out.file.close();
  if (!grid.cells.empty() && divergent == grid.cells.size()) {
    std::cerr << "spectral: every grid cell diverged\n";
    return 3;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// certify

struct CertifyOptions {
  std::string scheme;
  double m = 1.0, M = 10.0;
  double gamma = 0.0, h = 0.0;
  long long lambdas = 2048;
  long long us = 256;
  bool extended = false;
  std::string out;
};

int cmd_certify(const CertifyOptions& o) {
  if (o.scheme.empty()) throw UsageError("certify requires --scheme");
  Scheme s = parse_scheme(o.scheme);
  if (!(o.h > 0.0) || !(o.gamma > 0.0))
    throw UsageError("certify requires --gamma > 0 and --h > 0");
  CertificateReport rep;
  try {
    rep = certify(s, o.m, o.M, o.gamma, o.h, static_cast<int>(o.lambdas),
                  static_cast<int>(o.us), o.extended);
  } catch (const std::logic_error& e) {
    throw UsageError(e.what());
  }
  json j;
  j["version"] = 1;
  j["scheme"] = to_string(rep.scheme);
  j["m"] = rep.m;
  j["M"] = rep.M;
  j["gamma"] = rep.gamma;
  j["h"] = rep.h;
  j["lambda_points"] = rep.lambda_points;
  j["u_points"] = rep.u_points;
  j["extended"] = rep.extended;
  j["min_A"] = rep.min_A;
  j["min_det"] = rep.min_det;
  j["lambda_at_min_A"] = rep.lambda_at_min_A;
  j["lambda_at_min_det"] = rep.lambda_at_min_det;
  j["u_at_min_det"] = rep.u_at_min_det;
  j["pass"] = rep.pass;
  if (!o.out.empty()) {
    OutStream out = open_out(o.out);
    *out.os << j.dump(2) << '\n';
  }
  std::cout << "certificate " << to_string(rep.scheme) << ": "
            << (rep.pass ? "PASS" : "FAIL") << " min_A=" << fmt17(rep.min_A)
            << " min_det=" << fmt17(rep.min_det) << '\n';
  return rep.pass ? 0 : 4;
}

// ---------------------------------------------------------------------------
// sample / bias (shared CSV schema)

const std::vector<std::string> kSummaryHeader = {
    "scheme", "h",   "gamma", "grad",       "batch",
    "bias",   "se",  "ess",   "grad_evals", "status"};

void summary_row(CsvWriter& csv, Scheme s, double h, double gamma,
                 GradientKind kind, std::size_t batch, double bias, double se,
                 double ess_v, long long evals, bool ok) {
  csv.row({to_string(s), fmt17(h), fmt17(gamma), to_string(kind),
           std::to_string(batch), ok ? fmt17(bias) : "nan",
           ok ? fmt17(se) : "nan", ok ? fmt17(ess_v) : "nan",
           std::to_string(evals), ok ? "ok" : "N.A."});
}

struct SampleOptions {
  std::vector<std::string> schemes;
  TargetOptions target;
  GradOptions grad;
  double gamma = 0.0, h = 0.0;
  long long iterations = 10000;
  long long burn_in = 1000;
  long long replicas = 8;
  long long seed = 0;
  double reference = 0.0;  // bias column = mean - reference
  std::string out = "-";
};

int cmd_sample(const SampleOptions& o) {
  auto schemes = expand_schemes(o.schemes);
  if (!(o.h > 0.0)) throw UsageError("sample requires --h > 0");
  if (o.iterations <= o.burn_in)
    throw UsageError("sample requires --iterations > --burn-in");
  TargetBundle tb = make_target(o.target);
  GradientKind kind = GradientKind::full;
  auto est = make_cli_estimator(tb, o.grad, kind);

  OutStream out = open_out(o.out);
  CsvWriter csv(*out.os, kSummaryHeader);
  std::size_t failed = 0;
  for (Scheme s : schemes) {
    if (is_kinetic(s) && !(o.gamma > 0.0))
      throw UsageError("sample requires --gamma > 0 for kinetic schemes");
    IntegratorParams p = is_kinetic(s) ? IntegratorParams::kinetic(o.h, o.gamma)
                                       : IntegratorParams::overdamped(o.h);
    RunSummary r = run_sampler(s, *tb.pot, est.get(), p, o.iterations, o.burn_in,
                               static_cast<int>(o.replicas),
                               static_cast<std::uint64_t>(o.seed));
    if (r.failed) ++failed;
    summary_row(csv, s, o.h, is_kinetic(s) ? o.gamma : 0.0, kind,
                est ? est->batch_size() : 0, r.mean - o.reference, r.se, r.ess,
                r.grad_evals, !r.failed);
  }
  if (out.file.is_open()) out.file.close();
  if (failed == schemes.size()) {
    std::cerr << "sample: every run diverged\n";
    return 3;
  }
  return 0;
}

struct BiasOptions {
  std::vector<std::string> schemes;
  TargetOptions target;
  GradOptions grad;
  std::vector<double> h_list;
  std::vector<double> gamma_list;
  long long iterations = 10000;
  long long burn_in = 1000;
  long long replicas = 8;
  long long seed = 0;
  double reference = std::numeric_limits<double>::quiet_NaN();
  std::string out = "-";
};

int cmd_bias(const BiasOptions& o) {
  auto schemes = expand_schemes(o.schemes);
  if (o.h_list.empty()) throw UsageError("bias requires --h-list");
  if (o.gamma_list.empty()) throw UsageError("bias requires --gamma-list");
  for (double h : o.h_list)
    if (!(h > 0.0)) throw UsageError("--h-list entries must be positive");
  if (o.iterations <= o.burn_in)
    throw UsageError("bias requires --iterations > --burn-in");
  TargetBundle tb = make_target(o.target);
  GradientKind kind = GradientKind::full;
  auto est = make_cli_estimator(tb, o.grad, kind);

  std::optional<double> ref;
  if (!std::isnan(o.reference)) ref = o.reference;
  BiasTable table = bias_table(schemes, *tb.pot, est.get(), o.h_list,
                               o.gamma_list, o.iterations, o.burn_in,
                               static_cast<int>(o.replicas),
                               static_cast<std::uint64_t>(o.seed), ref);
  std::cerr << "bias: reference mean " << fmt17(table.reference_mean) << " (se "
            << fmt17(table.reference_se) << ", "
            << (table.reference_internal ? "internal" : "supplied") << ")\n";

  OutStream out = open_out(o.out);
  CsvWriter csv(*out.os, kSummaryHeader);
  std::size_t failed = 0;
  for (const auto& c : table.cells) {
    if (!c.ok) ++failed;
    summary_row(csv, c.scheme, c.h, c.gamma, kind, est ? est->batch_size() : 0,
                c.bias, c.se, c.ess, c.grad_evals, c.ok);
  }
  if (out.file.is_open()) out.file.close();
  if (!table.cells.empty() && failed == table.cells.size()) {
    std::cerr << "bias: every cell diverged\n";
    return 3;
  }
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
  CLI::App app{"langevin-kit: kinetic Langevin samplers with contraction-rate "
               "verification"};
  app.require_subcommand(1);
  // lets --config appear either before or after the subcommand name
  app.fallthrough();
  // --h is a real option (the stepsize), so help must not claim the short -h.
  app.set_help_flag("--help", "print help and exit");
  std::string config_path;
  app.add_option("--config", config_path,
                 "JSON config file (\"version\": 1); flags override")
      ->expected(1);

  CoupleOptions co;
  auto* couple = app.add_subcommand("couple", "coupled chain-pair distances");
  couple->set_help_flag("--help", "print help and exit");
  couple->add_option("--scheme", co.schemes, "scheme tag(s), or 'all'")
      ->delimiter(',');
  add_target_options(couple, co.target);
  add_grad_options(couple, co.grad);
  couple->add_option("--gamma", co.gamma, "friction");
  couple->add_option("--h", co.h, "stepsize");
  couple->add_option("--steps", co.steps, "coupled steps per pair");
  couple->add_option("--pairs", co.pairs, "chain pairs (full gradients)");
  couple->add_option("--replicas", co.replicas, "MC replicas (sg/vrsg)");
  couple->add_option("--offset", co.offset, "initial position offset length");
  couple->add_option("--seed", co.seed, "noise seed");
  couple->add_option("--out", co.out, "output CSV path ('-' = stdout)");

  SpectralOptions so;
  auto* spectral = app.add_subcommand("spectral", "rate contours over (gamma, h)");
  spectral->set_help_flag("--help", "print help and exit");
  spectral->add_option("--scheme", so.scheme, "kinetic scheme tag");
  spectral->add_option("--m", so.m, "smallest curvature");
  spectral->add_option("--M", so.M, "largest curvature");
  spectral->add_option("--gamma-min", so.gamma_min, "smallest friction");
  spectral->add_option("--gamma-max", so.gamma_max, "largest friction");
  spectral->add_option("--gammas", so.gammas, "friction grid points");
  spectral->add_option("--h-min", so.h_min, "smallest stepsize");
  spectral->add_option("--h-max", so.h_max, "largest stepsize");
  spectral->add_option("--hs", so.hs, "stepsize grid points");
  spectral->add_option("--products", so.products, "Lyapunov products (roabao)");
  spectral->add_option("--replicas", so.replicas, "Lyapunov replicas (roabao)");
  spectral->add_option("--seed", so.seed, "noise seed");
  spectral->add_option("--out", so.out, "output CSV path ('-' = stdout)");

  CertifyOptions ce;
  auto* certify_cmd = app.add_subcommand(
      "certify", "one-step contraction-form positivity certificate");
  certify_cmd->set_help_flag("--help", "print help and exit");
  certify_cmd->add_option("--scheme", ce.scheme,
                          "bbk | spv | svv | roabao (others need --extended)");
  certify_cmd->add_option("--m", ce.m, "smallest curvature");
  certify_cmd->add_option("--M", ce.M, "largest curvature");
  certify_cmd->add_option("--gamma", ce.gamma, "friction");
  certify_cmd->add_option("--h", ce.h, "stepsize");
  certify_cmd->add_option("--lambdas", ce.lambdas, "curvature grid points");
  certify_cmd->add_option("--us", ce.us, "midpoint grid points (roabao)");
  certify_cmd->add_flag("--extended", ce.extended,
                        "matrix-built form for em/baoab/obabo/ses");
  certify_cmd->add_option("--out", ce.out, "JSON report path");

  SampleOptions sa;
  auto* sample = app.add_subcommand("sample", "posterior sampling summaries");
  sample->set_help_flag("--help", "print help and exit");
  sample->add_option("--scheme", sa.schemes, "scheme tag(s), or 'all'")
      ->delimiter(',');
  add_target_options(sample, sa.target);
  add_grad_options(sample, sa.grad);
  sample->add_option("--gamma", sa.gamma, "friction (kinetic schemes)");
  sample->add_option("--h", sa.h, "stepsize");
  sample->add_option("--iterations", sa.iterations, "iterations per replica");
  sample->add_option("--burn-in", sa.burn_in, "discarded iterations");
  sample->add_option("--replicas", sa.replicas, "independent chains");
  sample->add_option("--seed", sa.seed, "noise seed");
  sample->add_option("--reference", sa.reference,
                     "subtract this from the mean (bias column)");
  sample->add_option("--out", sa.out, "output CSV path ('-' = stdout)");

  BiasOptions bi;
  auto* bias = app.add_subcommand("bias", "bias tables over (scheme, h, gamma)");
  bias->set_help_flag("--help", "print help and exit");
  bias->add_option("--scheme", bi.schemes, "scheme tag(s), or 'all'")
      ->delimiter(',');
  add_target_options(bias, bi.target);
  add_grad_options(bias, bi.grad);
  bias->add_option("--h-list", bi.h_list, "stepsizes")->delimiter(',');
  bias->add_option("--gamma-list", bi.gamma_list, "frictions")->delimiter(',');
  bias->add_option("--iterations", bi.iterations, "iterations per replica");
  bias->add_option("--burn-in", bi.burn_in, "discarded iterations");
  bias->add_option("--replicas", bi.replicas, "independent chains per cell");
  bias->add_option("--seed", bi.seed, "noise seed");
  bias->add_option("--reference", bi.reference,
                   "reference mean (omit for an internal fine-step reference)");
  bias->add_option("--out", bi.out, "output CSV path ('-' = stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    json cfg;
    if (!config_path.empty()) cfg = load_config(config_path);

    if (couple->parsed()) {
      merge(cfg, *couple, "scheme", co.schemes);
      merge_target(cfg, *couple, co.target);
      merge_grad(cfg, *couple, co.grad);
      merge(cfg, *couple, "gamma", co.gamma);
      merge(cfg, *couple, "h", co.h);
      merge(cfg, *couple, "steps", co.steps);
      merge(cfg, *couple, "pairs", co.pairs);
      merge(cfg, *couple, "replicas", co.replicas);
      merge(cfg, *couple, "offset", co.offset);
      merge(cfg, *couple, "seed", co.seed);
      merge(cfg, *couple, "out", co.out);
      return cmd_couple(co);
    }
    if (spectral->parsed()) {
      merge(cfg, *spectral, "scheme", so.scheme);
      merge(cfg, *spectral, "m", so.m);
      merge(cfg, *spectral, "M", so.M);
      merge(cfg, *spectral, "gamma-min", so.gamma_min);
      merge(cfg, *spectral, "gamma-max", so.gamma_max);
      merge(cfg, *spectral, "gammas", so.gammas);
      merge(cfg, *spectral, "h-min", so.h_min);
      merge(cfg, *spectral, "h-max", so.h_max);
      merge(cfg, *spectral, "hs", so.hs);
      merge(cfg, *spectral, "products", so.products);
      merge(cfg, *spectral, "replicas", so.replicas);
      merge(cfg, *spectral, "seed", so.seed);
      merge(cfg, *spectral, "out", so.out);
      return cmd_spectral(so);
    }
    if (certify_cmd->parsed()) {
      merge(cfg, *certify_cmd, "scheme", ce.scheme);
      merge(cfg, *certify_cmd, "m", ce.m);
      merge(cfg, *certify_cmd, "M", ce.M);
      merge(cfg, *certify_cmd, "gamma", ce.gamma);
      merge(cfg, *certify_cmd, "h", ce.h);
      merge(cfg, *certify_cmd, "lambdas", ce.lambdas);
      merge(cfg, *certify_cmd, "us", ce.us);
      merge(cfg, *certify_cmd, "extended", ce.extended);
      merge(cfg, *certify_cmd, "out", ce.out);
      return cmd_certify(ce);
    }
    if (sample->parsed()) {
      merge(cfg, *sample, "scheme", sa.schemes);
      merge_target(cfg, *sample, sa.target);
      merge_grad(cfg, *sample, sa.grad);
      merge(cfg, *sample, "gamma", sa.gamma);
      merge(cfg, *sample, "h", sa.h);
      merge(cfg, *sample, "iterations", sa.iterations);
      merge(cfg, *sample, "burn-in", sa.burn_in);
      merge(cfg, *sample, "replicas", sa.replicas);
      merge(cfg, *sample, "seed", sa.seed);
      merge(cfg, *sample, "reference", sa.reference);
      merge(cfg, *sample, "out", sa.out);
      return cmd_sample(sa);
    }
    // bias
    merge(cfg, *bias, "scheme", bi.schemes);
    merge_target(cfg, *bias, bi.target);
    merge_grad(cfg, *bias, bi.grad);
    merge(cfg, *bias, "h-list", bi.h_list);
    merge(cfg, *bias, "gamma-list", bi.gamma_list);
    merge(cfg, *bias, "iterations", bi.iterations);
    merge(cfg, *bias, "burn-in", bi.burn_in);
    merge(cfg, *bias, "replicas", bi.replicas);
    merge(cfg, *bias, "seed", bi.seed);
    merge(cfg, *bias, "reference", bi.reference);
    merge(cfg, *bias, "out", bi.out);
    return cmd_bias(bi);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

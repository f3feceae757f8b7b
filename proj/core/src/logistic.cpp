#include "langevin/logistic.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace langevin {

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  double e = std::exp(t);
  return e / (1.0 + e);
}

// log(1 + exp(t)) without overflow.
static double log1pexp(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

LogisticData synth_dataset(std::uint64_t seed, std::size_t n, std::size_t d,
                           double separation) {
  if (n == 0 || d == 0)
    throw std::invalid_argument("synth_dataset: N and d must be >= 1");
  if (separation < 0.0)
    throw std::invalid_argument("synth_dataset: separation must be >= 0");
  NoiseStream ns(seed, 0);

  std::vector<double> truth(d, 0.0);
  if (separation > 0.0) {
    double norm = 0.0;
    for (double& w : truth) {
      w = ns.gaussian();
      norm += w * w;
    }
    norm = std::sqrt(norm);
    for (double& w : truth) w *= separation / norm;
  }

  LogisticData data;
  data.n_features = d;
  data.features.resize(n * d);
  data.labels.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    double t = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      double f = ns.gaussian();
      data.features[j * d + i] = f;
      t += f * truth[i];
    }
    data.labels[j] = ns.uniform01() < sigmoid(t) ? 1 : 0;
  }
  return data;
}

void write_dataset_csv(const LogisticData& data, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("write_dataset_csv: cannot open " + path);
  std::fprintf(f, "y");
  for (std::size_t i = 1; i <= data.n_features; ++i) std::fprintf(f, ",x%zu", i);
  std::fprintf(f, "\n");
  for (std::size_t j = 0; j < data.size(); ++j) {
    std::fprintf(f, "%d", static_cast<int>(data.labels[j]));
    for (std::size_t i = 0; i < data.n_features; ++i)
      std::fprintf(f, ",%.17g", data.features[j * data.n_features + i]);
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

LogisticRegressionPotential::LogisticRegressionPotential(LogisticData data,
                                                         double sigma2)
    : data_(std::move(data)), sigma2_(sigma2) {
  if (data_.size() == 0 || data_.n_features == 0)
    throw std::invalid_argument("blr_potential: empty dataset");
  if (!(sigma2_ > 0.0))
    throw std::invalid_argument("blr_potential: prior variance must be positive");
  for (std::uint8_t y : data_.labels)
    if (y > 1) throw std::invalid_argument("blr_potential: labels must be 0/1");

  // lambda_max(X^T X) by power iteration on v -> X^T (X v).
  const std::size_t n = data_.size(), d = data_.n_features;
  std::vector<double> v(d), xv(n), w(d);
  for (std::size_t i = 0; i < d; ++i) v[i] = 1.0 + 1e-3 * static_cast<double>(i);
  double lmax = 0.0;
  for (int it = 0; it < 200; ++it) {
    for (std::size_t j = 0; j < n; ++j) {
      double t = 0.0;
      const double* row = data_.features.data() + j * d;
      for (std::size_t i = 0; i < d; ++i) t += row[i] * v[i];
      xv[j] = t;
    }
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double* row = data_.features.data() + j * d;
      for (std::size_t i = 0; i < d; ++i) w[i] += row[i] * xv[j];
    }
    double norm = 0.0;
    for (double wi : w) norm += wi * wi;
    norm = std::sqrt(norm);
    if (norm == 0.0) break;
    double prev = lmax;
    lmax = norm;
    for (std::size_t i = 0; i < d; ++i) v[i] = w[i] / norm;
    if (it > 4 && std::abs(lmax - prev) <= 1e-12 * lmax) break;
  }
  xtx_lmax_ = lmax;
  m_ = 1.0 / sigma2_;
  M_ = 1.0 / sigma2_ + 0.25 * xtx_lmax_;
}

double LogisticRegressionPotential::value(std::span<const double> q) const {
  const std::size_t n = data_.size(), d = data_.n_features;
  double u = 0.0;
  for (std::size_t i = 0; i < d; ++i) u += q[i] * q[i];
  u /= 2.0 * sigma2_;
  for (std::size_t j = 0; j < n; ++j) {
    const double* row = data_.features.data() + j * d;
    double t = 0.0;
    for (std::size_t i = 0; i < d; ++i) t += row[i] * q[i];
    u += log1pexp(t) - (data_.labels[j] ? t : 0.0);
  }
  return u;
}

void LogisticRegressionPotential::gradient(std::span<const double> q,
                                           std::span<double> g) const {
  const std::size_t n = data_.size(), d = data_.n_features;
  for (std::size_t i = 0; i < d; ++i) g[i] = q[i] / sigma2_;
  for (std::size_t j = 0; j < n; ++j) {
    const double* row = data_.features.data() + j * d;
    double t = 0.0;
    for (std::size_t i = 0; i < d; ++i) t += row[i] * q[i];
    double r = sigmoid(t) - static_cast<double>(data_.labels[j]);
    for (std::size_t i = 0; i < d; ++i) g[i] += r * row[i];
  }
}

void LogisticRegressionPotential::prior_gradient(std::span<const double> q,
                                                 std::span<double> g) const {
  for (std::size_t i = 0; i < q.size(); ++i) g[i] = q[i] / sigma2_;
}

void LogisticRegressionPotential::add_component_gradient(std::size_t j,
                                                         std::span<const double> q,
                                                         std::span<double> g,
                                                         double w) const {
  const std::size_t d = data_.n_features;
  const double* row = data_.features.data() + j * d;
  double t = 0.0;
  for (std::size_t i = 0; i < d; ++i) t += row[i] * q[i];
  double r = w * (sigmoid(t) - static_cast<double>(data_.labels[j]));
  for (std::size_t i = 0; i < d; ++i) g[i] += r * row[i];
}

void LogisticRegressionPotential::add_component_hessian_vec(
    std::size_t j, std::span<const double> q, std::span<const double> p,
    std::span<double> out, double w) const {
  const std::size_t d = data_.n_features;
  const double* row = data_.features.data() + j * d;
  double t = 0.0, xp = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    t += row[i] * q[i];
    xp += row[i] * p[i];
  }
  double s = sigmoid(t);
  double r = w * s * (1.0 - s) * xp;
  for (std::size_t i = 0; i < d; ++i) out[i] += r * row[i];
}

void LogisticRegressionPotential::hessian_vec(std::span<const double> q,
                                              std::span<const double> p,
                                              std::span<double> out) const {
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] / sigma2_;
  for (std::size_t j = 0; j < data_.size(); ++j)
    add_component_hessian_vec(j, q, p, out, 1.0);
}

std::vector<double> LogisticRegressionPotential::minimizer() const {
  if (!minimizer_.empty()) return minimizer_;
  const std::size_t d = data_.n_features;
  std::vector<double> q(d, 0.0), g(d), q_new(d), g_new(d);
  gradient(q, g);
  double step = 1.0 / M_;

  // Barzilai-Borwein with Armijo backtracking down to |grad| <= 1e-3.  The
  // sufficient-decrease test can't certify progress much below that (the
  // required f decrease falls under the resolution of f itself), so the last
  // decades go to a Newton polish instead.
  double fq = value(q);
  for (int it = 0; it < 5000; ++it) {
    double gnorm2 = 0.0;
    for (double gi : g) gnorm2 += gi * gi;
    if (std::sqrt(gnorm2) <= 1e-3) break;

    double trial = step;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < d; ++i) q_new[i] = q[i] - trial * g[i];
      double f_new = value(q_new);
      if (f_new <= fq - 1e-4 * trial * gnorm2) {
        fq = f_new;
        break;
      }
      trial *= 0.5;
      if (ls == 59)
        throw std::runtime_error("minimizer: line search failed");
    }
    gradient(q_new, g_new);

    double sy = 0.0, yy = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      double s = q_new[i] - q[i];
      double y = g_new[i] - g[i];
      sy += s * y;
      yy += y * y;
    }
    step = (yy > 0.0 && sy > 0.0) ? sy / yy : 1.0 / M_;
    q.swap(q_new);
    g.swap(g_new);
  }

  // Newton polish: solve H p = g by conjugate gradients on Hessian-vector
  // products (H >= I/sigma2 keeps CG well posed) and take full steps.
  // Quadratic convergence reaches |grad| <= 1e-8 in a few rounds.
  std::vector<double> p(d), r(d), cg_d(d), hd(d);
  for (int round = 0; round < 50; ++round) {
    double gnorm2 = 0.0;
    for (double gi : g) gnorm2 += gi * gi;
    if (std::sqrt(gnorm2) <= 1e-8) break;

    std::fill(p.begin(), p.end(), 0.0);
    r = g;  // residual of H p = g at p = 0
    cg_d = r;
    double rr = gnorm2;
    for (std::size_t cg_it = 0; cg_it < 4 * d; ++cg_it) {
      hessian_vec(q, cg_d, hd);
      double dhd = 0.0;
      for (std::size_t i = 0; i < d; ++i) dhd += cg_d[i] * hd[i];
      double alpha = rr / dhd;
      double rr_new = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        p[i] += alpha * cg_d[i];
        r[i] -= alpha * hd[i];
        rr_new += r[i] * r[i];
      }
      if (rr_new <= 1e-24 * gnorm2) break;
      double beta = rr_new / rr;
      for (std::size_t i = 0; i < d; ++i) cg_d[i] = r[i] + beta * cg_d[i];
      rr = rr_new;
    }
    for (std::size_t i = 0; i < d; ++i) q[i] -= p[i];
    gradient(q, g);
  }

  double gnorm2 = 0.0;
  for (double gi : g) gnorm2 += gi * gi;
  if (std::sqrt(gnorm2) > 1e-8)
    throw std::runtime_error("minimizer: did not reach gradient tolerance");
  minimizer_ = q;
  return minimizer_;
}

void LogisticRegressionPotential::use_minimizer_curvature() {
  const std::size_t d = data_.n_features;
  std::vector<double> q = minimizer();
  std::vector<double> v(d), w(d);

  auto power_iterate = [&](auto&& matvec) {
    for (std::size_t i = 0; i < d; ++i) v[i] = 1.0 + 1e-3 * static_cast<double>(i);
    double norm = 0.0;
    for (double vi : v) norm += vi * vi;
    norm = std::sqrt(norm);
    for (double& vi : v) vi /= norm;
    double lam = 0.0;
    for (int it = 0; it < 500; ++it) {
      matvec(v, w);
      double nn = 0.0;
      for (double wi : w) nn += wi * wi;
      nn = std::sqrt(nn);
      if (nn == 0.0) return 0.0;
      double prev = lam;
      lam = nn;
      for (std::size_t i = 0; i < d; ++i) v[i] = w[i] / nn;
      if (it > 4 && std::abs(lam - prev) <= 1e-12 * lam) break;
    }
    return lam;
  };

  double lmax = power_iterate([&](const std::vector<double>& p, std::vector<double>& out) {
    hessian_vec(q, p, out);
  });
  // Smallest eigenvalue from the shifted operator lmax*I - H (H is PSD here).
  double shifted = power_iterate([&](const std::vector<double>& p, std::vector<double>& out) {
    hessian_vec(q, p, out);
    for (std::size_t i = 0; i < d; ++i) out[i] = lmax * p[i] - out[i];
  });
  m_ = lmax - shifted;
  M_ = lmax;
}

std::unique_ptr<LogisticRegressionPotential> blr_potential(LogisticData data,
                                                           double sigma2) {
  return std::make_unique<LogisticRegressionPotential>(std::move(data), sigma2);
}

}  // namespace langevin

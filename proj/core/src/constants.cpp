#include "endolab/constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "parallel.hpp"

namespace endolab {
namespace {

double fit_log_rate(const std::vector<double>& values) {
  // least squares of log(values[n]) = a + n log(rate) over n = 1..depth
  const std::size_t count = values.size() - 1;
  if (count == 0) throw PreconditionError("constants need depth >= 1");
  if (count == 1) return values[1];
  double mx = 0, my = 0;
  for (std::size_t n = 1; n < values.size(); ++n) {
    mx += static_cast<double>(n);
    my += std::log(values[n]);
  }
  mx /= static_cast<double>(count);
  my /= static_cast<double>(count);
  double sxy = 0, sxx = 0;
  for (std::size_t n = 1; n < values.size(); ++n) {
    const double dx = static_cast<double>(n) - mx;
    sxy += dx * (std::log(values[n]) - my);
    sxx += dx * dx;
  }
  return std::exp(sxy / sxx);
}

// Singular values (descending) of the restricted products Df^n|E, n = 0..depth.
std::vector<Vec> restricted_growth(const Endomorphism& f, const std::vector<TorusPoint>& orbit,
                                   const std::vector<Mat>& frames, int depth) {
  const auto k = frames.front().cols();
  std::vector<Vec> out;
  Mat product = Mat::Identity(k, k);
  out.push_back(Vec::Ones(k));
  for (int j = 0; j < depth; ++j) {
    const auto jj = static_cast<std::size_t>(j);
    product = frames[jj + 1].transpose() * f.derivative(orbit[jj]) * frames[jj] * product;
    Eigen::JacobiSVD<Mat> svd(product);
    out.push_back(svd.singularValues());
  }
  return out;
}

// Rayleigh-quotient bounds of the quadratic form (upper if g >= 1, lower otherwise).
double upper_rate(double g, double low, double high) {
  return std::sqrt(g >= 1.0 ? 1.0 + (g - 1.0) / low : 1.0 - (1.0 - g) / high);
}
double lower_rate(double a, double low, double high) {
  return std::sqrt(a >= 1.0 ? 1.0 + (a - 1.0) / high : 1.0 - (1.0 - a) / low);
}

struct SampleFrames {
  TorusPoint p;
  TorusPoint image;
  Mat df;
  Mat s, c, u;
};

std::pair<double, double> generalized_ratio(const Mat& q, const Mat& df, const Mat& g_here,
                                            const Mat& g_there) {
  const Mat a = q.transpose() * df.transpose() * g_there * df * q;
  const Mat b = q.transpose() * g_here * q;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      Eigen::MatrixXd(a), Eigen::MatrixXd(b), Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return {std::sqrt(std::max(ev.minCoeff(), 0.0)), std::sqrt(std::max(ev.maxCoeff(), 0.0))};
}

std::pair<double, double> rayleigh(const Mat& q, const Mat& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(Eigen::MatrixXd(q.transpose() * g * q),
                                                        Eigen::EigenvaluesOnly);
  return {solver.eigenvalues().minCoeff(), solver.eigenvalues().maxCoeff()};
}

}  // namespace

std::string HyperbolicityConstants::violation() const {
  std::ostringstream why;
  if (!(nu > 0.0)) why << "nu <= 0; ";
  if (!(nu < 1.0)) why << "nu >= 1; ";
  if (!(mu > 1.0)) why << "mu <= 1; ";
  if (!(nu < gamma1)) why << "nu >= gamma1; ";
  if (!(gamma1 <= gamma2)) why << "gamma1 > gamma2; ";
  if (!(gamma2 < mu)) why << "gamma2 >= mu; ";
  if (!(C >= 1.0)) why << "C < 1; ";
  std::string out = why.str();
  if (!out.empty()) out.resize(out.size() - 2);
  return out;
}

BundleTrack bundle_track(const Endomorphism& f, const TorusPoint& x, int depth,
                         const SplittingOptions& options) {
  const Dims d = f.dims();
  BundleTrack track;
  const auto orbit = forward_orbit(f, x, depth + options.forward_depth);
  const auto sweep = inverse_sweep(f, orbit, generic_frame(f.dim(), options.seed));
  const auto unstable = unstable_and_cu_frames(f, backward_orbit(f, x, zero_code(options)), options);

  Mat u = unstable.u.basis();
  Mat cu = unstable.cu.basis();
  for (int j = 0; j <= depth; ++j) {
    const auto jj = static_cast<std::size_t>(j);
    if (j > 0) {
      const Mat df = f.derivative(orbit[jj - 1]);
      u = thin_q(df * u);
      cu = thin_q(df * cu);
    }
    const Mat cs = sweep[jj].leftCols(d.s + d.c);
    track.orbit.push_back(orbit[jj]);
    track.s.push_back(sweep[jj].leftCols(d.s));
    track.u.push_back(u);
    track.c.push_back(center_frame(SubspaceFrame(cu), SubspaceFrame(cs), d.c).basis());
  }
  return track;
}

ConstantsFit estimate_constants(const Endomorphism& f, const std::vector<TorusPoint>& samples,
                                const ConstantsOptions& options) {
  if (samples.empty()) throw PreconditionError("estimate_constants needs sample points");
  const Dims d = f.dims();
  const int depth = options.depth;
  const auto count = samples.size();

  struct Growth {
    std::vector<Vec> s, c, u;
  };
  std::vector<Growth> growth(count);
  detail::parallel_for(count, [&](std::size_t i) {
    const auto track = bundle_track(f, samples[i], depth, options.splitting);
    growth[i].s = restricted_growth(f, track.orbit, track.s, depth);
    growth[i].u = restricted_growth(f, track.orbit, track.u, depth);
    if (d.c > 0) growth[i].c = restricted_growth(f, track.orbit, track.c, depth);
  });

  RateEnvelope env;
  const double inf = std::numeric_limits<double>::infinity();
  for (int n = 0; n <= depth; ++n) {
    const auto nn = static_cast<std::size_t>(n);
    double s_max = 0, c_max = 0, c_min = inf, u_min = inf;
    for (const auto& g : growth) {
      s_max = std::max(s_max, g.s[nn].maxCoeff());
      u_min = std::min(u_min, g.u[nn].minCoeff());
      if (d.c > 0) {
        c_max = std::max(c_max, g.c[nn].maxCoeff());
        c_min = std::min(c_min, g.c[nn].minCoeff());
      }
    }
    env.s_max.push_back(s_max);
    env.u_min.push_back(u_min);
    if (d.c > 0) {
      env.c_max.push_back(c_max);
      env.c_min.push_back(c_min);
    }
  }

  HyperbolicityConstants k;
  k.dims = d;
  k.nu = fit_log_rate(env.s_max);
  k.mu = fit_log_rate(env.u_min);
  if (d.c > 0) {
    k.gamma1 = fit_log_rate(env.c_min);
    k.gamma2 = fit_log_rate(env.c_max);
    if (k.gamma1 > k.gamma2) k.gamma1 = k.gamma2 = std::sqrt(k.gamma1 * k.gamma2);
  } else {
    k.gamma1 = k.gamma2 = std::sqrt(k.nu * k.mu);
  }

  double envelope = 1.0;
  for (int n = 0; n <= depth; ++n) {
    const auto nn = static_cast<std::size_t>(n);
    envelope = std::max(envelope, env.s_max[nn] / std::pow(k.nu, n));
    envelope = std::max(envelope, std::pow(k.mu, n) / env.u_min[nn]);
    if (d.c > 0) {
      envelope = std::max(envelope, env.c_max[nn] / std::pow(k.gamma2, n));
      envelope = std::max(envelope, std::pow(k.gamma1, n) / env.c_min[nn]);
    }
  }
  k.C = envelope * (1.0 + options.envelope_slack);

  ConstantsFit fit;
  fit.constants = k;
  fit.violation = k.violation();
  fit.valid = fit.violation.empty();
  fit.envelope = std::move(env);
  fit.samples = static_cast<int>(count);
  return fit;
}

std::optional<int> minimal_horizon(const HyperbolicityConstants& k, int max_n) {
  for (int n = 1; n <= max_n; ++n) {
    const double contraction = k.C * std::pow(k.nu, n);
    const double expansion = std::pow(k.mu, n) / k.C;
    if (contraction < 1.0 && expansion * expansion > 1.0) return n;
  }
  return std::nullopt;
}

Mat metric_tensor(const Endomorphism& f, const TorusPoint& x, int horizon) {
  const int n = f.dim();
  Mat g = Mat::Zero(n, n);
  Mat power = Mat::Identity(n, n);
  TorusPoint p = x;
  for (int j = 0; j < horizon; ++j) {
    g += power.transpose() * power;
    if (j + 1 < horizon) {
      power = f.derivative(p) * power;
      p = f.evaluate(p);
    }
  }
  return g;
}

double OneStepMargins::min() const { return std::min({s, c_lower, c_upper, u}); }

void derive_adapted_constants(const HyperbolicityConstants& k, AdaptedMetric& m) {
  const int n = m.horizon;
  const double cn = k.C * std::pow(k.nu, n);
  const double mu_n = std::pow(k.mu, n) / k.C;
  m.nu = upper_rate(cn * cn, m.L_s, m.K_s);
  m.mu = lower_rate(mu_n * mu_n, m.L_u, m.K_u);
  if (k.dims.c > 0) {
    const double g1 = std::pow(k.gamma1, n) / k.C;
    const double g2 = k.C * std::pow(k.gamma2, n);
    m.gamma1 = lower_rate(g1 * g1, m.L_c, m.K_c);
    m.gamma2 = upper_rate(g2 * g2, m.L_c, m.K_c);
  } else {
    m.gamma1 = m.gamma2 = std::sqrt(m.nu * m.mu);
  }
  m.chain_holds = 0.0 < m.nu && m.nu < m.gamma1 && m.gamma1 <= m.gamma2 && m.gamma2 < m.mu &&
                  m.nu < 1.0 && m.mu > 1.0;
}

AdaptedMetric adapted_metric(const Endomorphism& f, const TorusPoint& x,
                             const std::vector<TorusPoint>& samples,
                             const HyperbolicityConstants& constants,
                             const AdaptedMetricOptions& options) {
  if (const auto why = constants.violation(); !why.empty()) {
    throw PreconditionError("adapted metric needs valid constants: " + why);
  }
  const Dims d = f.dims();
  if (constants.dims != d) throw PreconditionError("constants were fitted for other dimensions");

  if (samples.empty()) throw PreconditionError("adapted metric needs sample points");
  const std::vector<TorusPoint>& points = samples;
  std::vector<SampleFrames> frames(points.size());
  const BranchCode code = zero_code(options.splitting);
  detail::parallel_for(points.size(), [&](std::size_t i) {
    const auto est = compute_splitting(f, points[i], code, options.splitting);
    frames[i] = {points[i], f.evaluate(points[i]), f.derivative(points[i]), est.s.basis(),
                 est.c.basis(), est.u.basis()};
  });

  int first = 0;
  int last = 0;
  if (options.forced_horizon) {
    first = last = *options.forced_horizon;
    if (first < 1) throw PreconditionError("forced horizon must be positive");
  } else {
    const auto n0 = minimal_horizon(constants, options.max_horizon);
    if (!n0) {
      throw ConvergenceError("no horizon N <= " + std::to_string(options.max_horizon) +
                             " satisfies C nu^N < 1 and (mu^N / C)^2 > 1");
    }
    first = *n0;
    last = options.max_horizon;
  }

  const double inf = std::numeric_limits<double>::infinity();
  for (int horizon = first; horizon <= last; ++horizon) {
    AdaptedMetric m;
    m.x = x;
    m.horizon = horizon;
    m.samples = static_cast<int>(points.size());
    std::vector<Mat> g_here(points.size()), g_there(points.size());
    detail::parallel_for(points.size(), [&](std::size_t i) {
      g_here[i] = metric_tensor(f, frames[i].p, horizon);
      g_there[i] = metric_tensor(f, frames[i].image, horizon);
    });
    m.G = metric_tensor(f, x, horizon);
    m.K = 1.0;
    m.L_s = m.L_c = m.L_u = inf;
    m.K_s = m.K_c = m.K_u = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Eigen::MatrixXd(g_here[i]),
                                                         Eigen::EigenvaluesOnly);
      m.K = std::max(m.K, eig.eigenvalues().maxCoeff());
      const auto [ls, ks] = rayleigh(frames[i].s, g_here[i]);
      const auto [lu, ku] = rayleigh(frames[i].u, g_here[i]);
      m.L_s = std::min(m.L_s, ls);
      m.K_s = std::max(m.K_s, ks);
      m.L_u = std::min(m.L_u, lu);
      m.K_u = std::max(m.K_u, ku);
      if (d.c > 0) {
        const auto [lc, kc] = rayleigh(frames[i].c, g_here[i]);
        m.L_c = std::min(m.L_c, lc);
        m.K_c = std::max(m.K_c, kc);
      }
    }
    if (d.c == 0) m.L_c = m.K_c = 1.0;
    derive_adapted_constants(constants, m);
    if (!m.chain_holds && !options.forced_horizon) continue;

    m.margins.s = m.margins.c_lower = m.margins.c_upper = m.margins.u = inf;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& fr = frames[i];
      const auto s_ratio = generalized_ratio(fr.s, fr.df, g_here[i], g_there[i]);
      const auto u_ratio = generalized_ratio(fr.u, fr.df, g_here[i], g_there[i]);
      if (m.nu - s_ratio.second < m.margins.s) {
        m.margins.s = m.nu - s_ratio.second;
        m.margins.witness_s = fr.p;
      }
      if (u_ratio.first - m.mu < m.margins.u) {
        m.margins.u = u_ratio.first - m.mu;
        m.margins.witness_u = fr.p;
      }
      if (d.c > 0) {
        const auto c_ratio = generalized_ratio(fr.c, fr.df, g_here[i], g_there[i]);
        if (c_ratio.first - m.gamma1 < m.margins.c_lower) {
          m.margins.c_lower = c_ratio.first - m.gamma1;
          m.margins.witness_c_lower = fr.p;
        }
        if (m.gamma2 - c_ratio.second < m.margins.c_upper) {
          m.margins.c_upper = m.gamma2 - c_ratio.second;
          m.margins.witness_c_upper = fr.p;
        }
      }
    }
    if (d.c == 0) {
      m.margins.c_lower = m.margins.c_upper = inf;
    }
    return m;
  }
  throw ConvergenceError("no horizon N <= " + std::to_string(last) +
                         " gives 0 < nu' < gamma1' <= gamma2' < mu' with nu' < 1 < mu'");
}

}  // namespace endolab

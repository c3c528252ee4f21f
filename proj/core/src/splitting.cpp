#include "endolab/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/LU>
#include <Eigen/QR>

#include "parallel.hpp"

namespace endolab {
namespace {

constexpr double kOrbitCheck = 1e-9;
constexpr double kPivotFloor = 1e-12;
constexpr double kDegenerateAngle = 1e-12;
constexpr double kGapFloor = 1e-10;

void check_link(const Endomorphism& f, const TorusPoint& from, const TorusPoint& to) {
  if (!f.is_torus_map()) return;  // cocycle models carry no orbit structure
  const double miss = torus_distance(f.evaluate(from), to);
  if (miss > kOrbitCheck) {
    throw PreconditionError("consecutive points are not f-related (miss " +
                            std::to_string(miss) + ")");
  }
}

// Rescales by a power of two so the largest entry lies in [0.5, 1).
void renormalize(Mat& m, double& log_scale) {
  const double peak = m.cwiseAbs().maxCoeff();
  if (peak == 0.0 || !std::isfinite(peak)) return;
  int e = 0;
  std::frexp(peak, &e);
  m = m * std::ldexp(1.0, -e);
  log_scale += e * std::numbers::ln2;
}

struct QrStep {
  Mat q;
  Vec r_diag;
};

QrStep qr_step(const Mat& m) {
  Eigen::HouseholderQR<Mat> qr(m);
  const auto k = m.cols();
  Mat q = qr.householderQ() * Mat::Identity(m.rows(), k);
  Vec diag(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    diag(j) = qr.matrixQR()(j, j);
    if (diag(j) < 0) {
      q.col(j) *= -1.0;
      diag(j) = -diag(j);
    }
  }
  return {q, diag};
}

Mat leading(const Mat& frame, int k) { return frame.leftCols(k); }

double drift(const Mat& a, const Mat& b) {
  if (a.cols() == 0) return 0.0;
  return subspace_distance(SubspaceFrame(a), SubspaceFrame(b));
}

// Pushes `frame` forward along points[from] -> points[from+1] -> ... in the given order.
Mat push_along(const Endomorphism& f, const std::vector<TorusPoint>& chain, Mat frame) {
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    const Mat df = f.derivative(chain[i]);
    const auto step = qr_step(df * frame);
    const double scale = df.norm();
    for (Eigen::Index j = 0; j < step.r_diag.size(); ++j) {
      if (step.r_diag(j) < kPivotFloor * scale) {
        throw ConvergenceError("pushed frame collapsed (QR pivot below 1e-12)");
      }
    }
    frame = step.q;
  }
  return frame;
}

// x_{-k}, ..., x_0 from a backward orbit.
std::vector<TorusPoint> chain_from(const BackwardOrbit& orbit, int k) {
  std::vector<TorusPoint> chain;
  chain.reserve(static_cast<std::size_t>(k) + 1);
  for (int i = k; i >= 0; --i) chain.push_back(orbit.back(i));
  return chain;
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

void check_dims(const Dims& d) {
  if (d.s < 1 || d.u < 1) {
    throw PreconditionError("splitting needs nontrivial stable and unstable bundles");
  }
}

}  // namespace

Mat CocycleProduct::value() const { return matrix * std::exp(log_scale); }

CocycleProduct cocycle_product(const Endomorphism& f, const std::vector<TorusPoint>& orbit,
                               CocycleDirection direction) {
  if (orbit.empty()) throw PreconditionError("cocycle product of an empty orbit");
  const int n = f.dim();
  CocycleProduct out{Mat::Identity(n, n), 0.0};
  if (direction == CocycleDirection::forward) {
    for (std::size_t i = 0; i < orbit.size(); ++i) {
      if (i + 1 < orbit.size()) check_link(f, orbit[i], orbit[i + 1]);
      out.matrix = f.derivative(orbit[i]) * out.matrix;
      renormalize(out.matrix, out.log_scale);
    }
  } else {
    // Df_{x_{-1}} ... Df_{x_{-m}}: apply from the tail inward.
    for (std::size_t k = orbit.size() - 1; k >= 1; --k) {
      check_link(f, orbit[k], orbit[k - 1]);
      out.matrix = f.derivative(orbit[k]) * out.matrix;
      renormalize(out.matrix, out.log_scale);
    }
  }
  return out;
}

Mat generic_frame(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Mat g(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) g(i, j) = normal(rng);
  }
  return thin_q(g);
}

std::vector<Mat> inverse_sweep(const Endomorphism& f, const std::vector<TorusPoint>& orbit,
                               const Mat& start, std::vector<double>* log_growth) {
  std::vector<Mat> frames(orbit.size());
  frames.back() = start;
  if (log_growth) log_growth->assign(static_cast<std::size_t>(start.cols()), 0.0);
  for (std::size_t j = orbit.size() - 1; j-- > 0;) {
    const Mat df = f.derivative(orbit[j]);
    const Mat pulled = df.partialPivLu().solve(frames[j + 1]);
    const auto step = qr_step(pulled);
    frames[j] = step.q;
    if (log_growth) {
      for (Eigen::Index i = 0; i < step.r_diag.size(); ++i) {
        (*log_growth)[static_cast<std::size_t>(i)] += std::log(step.r_diag(i));
      }
    }
  }
  return frames;
}

StableFrames stable_and_cs_frames(const Endomorphism& f, const TorusPoint& x,
                                  const SplittingOptions& options) {
  const Dims d = f.dims();
  check_dims(d);
  const int m = options.forward_depth;
  const int w = options.drift_window;
  if (m <= w) throw PreconditionError("forward depth must exceed the drift window");
  const auto orbit = forward_orbit(f, x, m);
  const Mat start = generic_frame(f.dim(), options.seed);

  StableFrames out;
  const auto frames = inverse_sweep(f, orbit, start, &out.log_growth);

  const auto gap = [&](int pos) {
    return out.log_growth[static_cast<std::size_t>(pos - 1)] -
           out.log_growth[static_cast<std::size_t>(pos)];
  };
  if (gap(d.s) < kGapFloor || (d.c > 0 && gap(d.s + d.c) < kGapFloor)) {
    throw ConvergenceError("singular-value gap below 1e-10 in the forward cocycle");
  }

  out.s = SubspaceFrame(leading(frames.front(), d.s), x);
  out.cs = SubspaceFrame(leading(frames.front(), d.s + d.c), x);
  if (options.residuals) {
    const std::vector<TorusPoint> shorter(orbit.begin(), orbit.end() - w);
    const auto coarse = inverse_sweep(f, shorter, start);
    out.residual_s = drift(leading(frames.front(), d.s), leading(coarse.front(), d.s));
    out.residual_cs =
        drift(leading(frames.front(), d.s + d.c), leading(coarse.front(), d.s + d.c));
  }
  return out;
}

SubspaceFrame push_frame(const Endomorphism& f, const BackwardOrbit& orbit, const Mat& initial) {
  const Mat pushed = push_along(f, chain_from(orbit, orbit.depth()), thin_q(initial));
  return SubspaceFrame(pushed, orbit.back(0));
}

SubspaceFrame push_forward(const Endomorphism& f, const std::vector<TorusPoint>& orbit,
                           const Mat& initial) {
  return SubspaceFrame(push_along(f, orbit, thin_q(initial)), orbit.back());
}

UnstableFrames unstable_and_cu_frames(const Endomorphism& f, const BackwardOrbit& orbit,
                                      const SplittingOptions& options) {
  const Dims d = f.dims();
  check_dims(d);
  const int m = orbit.depth();
  const int w = options.drift_window;
  if (m < 10) throw PreconditionError("backward orbit depth must be at least 10");
  const auto full = chain_from(orbit, m);
  const auto part = chain_from(orbit, m - w);

  UnstableFrames best;
  double best_residual = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
    const std::uint64_t seed = options.seed + static_cast<std::uint64_t>(attempt) * 0x9e3779b9ULL;
    const Mat start = generic_frame(f.dim(), seed);
    const Mat deep = push_along(f, full, start);
    UnstableFrames out;
    out.u = SubspaceFrame(leading(deep, d.u), orbit.back(0));
    out.cu = SubspaceFrame(leading(deep, d.u + d.c), orbit.back(0));
    out.seed_used = seed;
    if (!options.residuals) return out;
    const Mat shallow = push_along(f, part, start);
    out.residual_u = drift(leading(deep, d.u), leading(shallow, d.u));
    out.residual_cu = drift(leading(deep, d.u + d.c), leading(shallow, d.u + d.c));
    const double residual = std::max(out.residual_u, out.residual_cu);
    if (residual < best_residual) {
      best = out;
      best_residual = residual;
    }
    if (residual <= options.retry_residual) break;
  }
  return best;
}

double SplittingEstimate::max_residual() const {
  return std::max({residual_s, residual_c, residual_u, residual_cs, residual_cu});
}

BranchCode zero_code(const SplittingOptions& options) {
  return BranchCode{std::vector<int>(static_cast<std::size_t>(options.backward_depth), 0)};
}

SplittingEstimate compute_splitting(const Endomorphism& f, const TorusPoint& x,
                                    const BranchCode& code, const SplittingOptions& options) {
  const Dims d = f.dims();
  check_dims(d);
  const auto stable = stable_and_cs_frames(f, x, options);
  const auto orbit = backward_orbit(f, x, code);
  const auto unstable = unstable_and_cu_frames(f, orbit, options);

  SplittingEstimate est;
  est.point = x;
  est.dims = d;
  est.s = stable.s;
  est.cs = stable.cs;
  est.u = unstable.u;
  est.cu = unstable.cu;
  est.residual_s = stable.residual_s;
  est.residual_cs = stable.residual_cs;
  est.residual_u = unstable.residual_u;
  est.residual_cu = unstable.residual_cu;
  est.c = center_frame(est.cu, est.cs, d.c);
  est.code = code;
  est.forward_depth = options.forward_depth;

  if (d.c > 0 && options.residuals) {
    // Center drift: intersect the shallower estimates too.
    SplittingOptions shallow = options;
    shallow.forward_depth -= options.drift_window;
    const auto stable2 = stable_and_cs_frames(f, x, shallow);
    BackwardOrbit orbit2;
    orbit2.code = code.prefix(code.depth() - options.drift_window);
    orbit2.points.assign(orbit.points.begin(), orbit.points.end() - options.drift_window);
    const auto unstable2 = unstable_and_cu_frames(f, orbit2, options);
    const auto c2 = center_frame(unstable2.cu, stable2.cs, d.c);
    est.residual_c = subspace_distance(est.c, c2);
  }

  est.transversality = minimal_angle(est.s, est.u);
  if (d.c > 0) {
    est.transversality =
        std::min({est.transversality, minimal_angle(est.s, est.c), minimal_angle(est.c, est.u)});
  }
  Mat stacked(f.dim(), f.dim());
  stacked << est.s.basis(), est.c.basis(), est.u.basis();
  est.spanning_volume = std::abs(stacked.determinant());
  return est;
}

SubspaceFrame pushed_cs_frame(const Endomorphism& f, const BackwardOrbit& orbit, int push_steps,
                              const SplittingOptions& options) {
  if (push_steps < 0 || push_steps > orbit.depth()) {
    throw PreconditionError("push depth exceeds the backward orbit");
  }
  const auto tail = stable_and_cs_frames(f, orbit.back(push_steps), options);
  const Mat pushed = push_along(f, chain_from(orbit, push_steps), tail.cs.basis());
  return SubspaceFrame(pushed, orbit.back(0));
}

AngleSeries angle_decay_series(const Endomorphism& f, const TorusPoint& x,
                               const SubspaceFrame& e1, const SubspaceFrame& e2,
                               const AngleDecayOptions& options) {
  if (e1.dim() != e2.dim() || e1.dim() == 0) {
    throw PreconditionError("angle decay needs two frames of the same positive dimension");
  }
  const Dims d = f.dims();
  const int n_max = options.n_max;
  const bool confine = options.confine_center && d.c > 0 && d.s > 0 && e1.dim() == d.c;

  std::vector<Mat> cs_frames;
  const auto orbit = forward_orbit(f, x, n_max + (confine ? options.splitting.forward_depth : 0));
  if (confine) {
    const auto sweep =
        inverse_sweep(f, orbit, generic_frame(f.dim(), options.splitting.seed));
    for (int k = 0; k <= n_max; ++k) {
      cs_frames.push_back(leading(sweep[static_cast<std::size_t>(k)], d.s + d.c));
    }
  }

  AngleSeries out;
  Mat q1 = e1.basis();
  Mat q2 = e2.basis();
  for (int k = 0; k <= n_max; ++k) {
    if (k > 0) {
      const Mat df = f.derivative(orbit[static_cast<std::size_t>(k - 1)]);
      q1 = df * q1;
      q2 = df * q2;
      if (confine) {
        const Mat& cs = cs_frames[static_cast<std::size_t>(k)];
        q1 = cs * (cs.transpose() * q1);
        q2 = cs * (cs.transpose() * q2);
      }
      q1 = thin_q(q1);
      q2 = thin_q(q2);
    }
    out.n.push_back(k);
    out.angle.push_back(subspace_distance(SubspaceFrame(q1), SubspaceFrame(q2)));
  }

  if (out.angle.front() <= kDegenerateAngle) {
    out.degenerate = true;
    return out;
  }
  const auto collect = [&](double ceiling) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < out.angle.size(); ++i) {
      if (out.angle[i] > options.fit_floor && out.angle[i] <= ceiling) {
        xs.push_back(out.n[i]);
        ys.push_back(std::log(out.angle[i]));
      }
    }
    return std::pair{xs, ys};
  };
  auto [xs, ys] = collect(options.fit_ceiling);
  if (xs.size() < 5) std::tie(xs, ys) = collect(std::numbers::pi);
  if (xs.size() < 5) {
    throw ConvergenceError("fewer than 5 usable angle samples above the fit floor");
  }
  out.slope = fit_slope(xs, ys);
  out.fitted = static_cast<int>(xs.size());
  return out;
}

TransversalityFloor transversality_floor(const Endomorphism& f, int grid,
                                         const SplittingOptions& options) {
  if (grid < 1) throw PreconditionError("grid resolution must be positive");
  const int n = f.dim();
  std::size_t total = 1;
  for (int i = 0; i < n; ++i) total *= static_cast<std::size_t>(grid);
  std::vector<double> angles(total);
  std::vector<TorusPoint> points(total);
  const BranchCode code = zero_code(options);
  SplittingOptions fast = options;
  fast.residuals = false;
  detail::parallel_for(total, [&](std::size_t idx) {
    Vec c(n);
    std::size_t rest = idx;
    for (int i = 0; i < n; ++i) {
      c(i) = (static_cast<double>(rest % grid) + 0.5) / grid;
      rest /= static_cast<std::size_t>(grid);
    }
    points[idx] = TorusPoint(c);
    angles[idx] = compute_splitting(f, points[idx], code, fast).transversality;
  });
  const auto it = std::min_element(angles.begin(), angles.end());
  return {*it, points[static_cast<std::size_t>(it - angles.begin())], grid};
}

}  // namespace endolab

#include "endolab/cones.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/LU>
#include <Eigen/QR>

#include "parallel.hpp"

namespace endolab {
namespace {

constexpr double kGolden = 0.6180339887498949;
constexpr double kGolden2 = 0.7548776662466927;  // plastic-number companion sequence

Vec unit_from(int dim, double t, double u) {
  Vec v(dim);
  if (dim == 1) {
    v(0) = t < 0.5 ? 1.0 : -1.0;
  } else if (dim == 2) {
    v << std::cos(2 * std::numbers::pi * t), std::sin(2 * std::numbers::pi * t);
  } else {
    const double z = 1.0 - 2.0 * t;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    v << r * std::cos(2 * std::numbers::pi * u), r * std::sin(2 * std::numbers::pi * u), z;
  }
  return v;
}

struct Bundles {
  Mat s, c, u;
};

Bundles split(const ReferenceSplitting& ref) {
  const auto& d = ref.dims;
  return {ref.basis.leftCols(d.s), ref.basis.middleCols(d.s, d.c), ref.basis.rightCols(d.u)};
}

Mat hcat(const Mat& a, const Mat& b) {
  Mat out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

double ratio_of(const Vec& y, int k) {
  const double e = y.head(k).norm();
  const double f = y.tail(y.size() - k).norm();
  return e == 0.0 ? std::numeric_limits<double>::infinity() : f / e;
}

struct PointResult {
  double ratio[4] = {0, 0, 0, 0};  // indexed by ConeFamily
  double sup_s = 0, sup_cs = 0;
  double inf_u = std::numeric_limits<double>::infinity();
  double inf_cu = std::numeric_limits<double>::infinity();
};

}  // namespace

std::string to_string(ConeFamily family) {
  switch (family) {
    case ConeFamily::s:
      return "s";
    case ConeFamily::u:
      return "u";
    case ConeFamily::cs:
      return "cs";
    case ConeFamily::cu:
      return "cu";
  }
  return "?";
}

std::string to_string(ConeMetric metric) {
  return metric == ConeMetric::adapted ? "adapted" : "flat";
}

std::string to_string(ReferenceSource source) {
  return source == ReferenceSource::linear ? "linear" : "computed";
}

ConeMetric parse_cone_metric(const std::string& name) {
  if (name == "adapted") return ConeMetric::adapted;
  if (name == "flat") return ConeMetric::flat;
  throw PreconditionError("cone metric must be 'adapted' or 'flat' (got '" + name + "')");
}

ReferenceSource parse_reference_source(const std::string& name) {
  if (name == "linear") return ReferenceSource::linear;
  if (name == "computed") return ReferenceSource::computed;
  throw PreconditionError("reference source must be 'linear' or 'computed' (got '" + name +
                          "')");
}

ConeField::ConeField(double beta_, ConeFamily family_, ReferenceSource source_,
                     ConeMetric metric_)
    : beta(beta_), family(family_), source(source_), metric(metric_) {
  // beta = 1 is accepted here for boundary tests of in_cone; verification requires beta < 1.
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw PreconditionError("cone angle beta must lie in (0, 1]");
  }
}

int cone_axis_dim(const Dims& d, ConeFamily family) {
  switch (family) {
    case ConeFamily::s:
      return d.s;
    case ConeFamily::u:
      return d.u;
    case ConeFamily::cs:
      return d.s + d.c;
    case ConeFamily::cu:
      return d.c + d.u;
  }
  return 0;
}

Mat cone_coordinates(const ReferenceSplitting& ref, ConeFamily family, ConeMetric metric) {
  const auto b = split(ref);
  Mat axis, complement;
  switch (family) {
    case ConeFamily::s:
      axis = b.s;
      complement = hcat(b.c, b.u);
      break;
    case ConeFamily::u:
      axis = b.u;
      complement = hcat(b.s, b.c);
      break;
    case ConeFamily::cs:
      axis = hcat(b.s, b.c);
      complement = b.u;
      break;
    case ConeFamily::cu:
      axis = hcat(b.c, b.u);
      complement = b.s;
      break;
  }
  if (metric == ConeMetric::adapted) return hcat(axis, complement);
  const auto n = axis.rows();
  Eigen::HouseholderQR<Mat> qr(axis);
  return Mat(qr.householderQ() * Mat::Identity(n, n));
}

bool in_cone(const ConeField& cone, const ReferenceSplitting& ref, const Vec& v) {
  if (v.norm() == 0.0) throw PreconditionError("cone membership of the zero vector");
  const Mat b = cone_coordinates(ref, cone.family, cone.metric);
  const Vec y = b.partialPivLu().solve(v);
  const int k = cone_axis_dim(ref.dims, cone.family);
  return y.tail(y.size() - k).norm() <= cone.beta * y.head(k).norm();
}

std::vector<Vec> cone_boundary_samples(int axis_dim, int dim, double beta, int count,
                                       std::uint64_t seed) {
  const int comp = dim - axis_dim;
  std::vector<Vec> out;
  const double shift = std::fmod(static_cast<double>(seed % 1000003) * kGolden, 1.0);
  for (int i = 0; i < count; ++i) {
    const double t1 = std::fmod(shift + i * kGolden, 1.0);
    const double t2 = std::fmod(shift + i * kGolden2, 1.0);
    const double t3 = std::fmod(shift + 0.5 + i * kGolden * kGolden2, 1.0);
    Vec y(dim);
    y.head(axis_dim) = unit_from(axis_dim, t1, t3);
    if (comp > 0) y.tail(comp) = beta * unit_from(comp, t2, t1);
    out.push_back(y);
  }
  // axis-aligned boundary vectors, where extremes sit for maps diagonal in these coordinates
  for (int a = 0; a < axis_dim; ++a) {
    for (int b = 0; b < comp; ++b) {
      for (double sa : {1.0, -1.0}) {
        for (double sb : {1.0, -1.0}) {
          Vec y = Vec::Zero(dim);
          y(a) = sa;
          y(axis_dim + b) = sb * beta;
          out.push_back(y);
        }
      }
    }
  }
  return out;
}

double Certificate::min_margin() const {
  return std::min({invariance_s.value, invariance_u.value, invariance_cs.value,
                   invariance_cu.value, rate_s.value, rate_u.value, rate_cu.value,
                   rate_cs.value});
}

Certificate verify_cone_conditions(const Endomorphism& f, const ConeOptions& options) {
  if (options.grid < 8) throw PreconditionError("cone verification grid must be at least 8");
  if (!(options.beta > 0.0 && options.beta < 1.0)) {
    throw PreconditionError("cone angle beta must lie in (0, 1)");
  }
  const int n = f.dim();
  const Dims d = f.dims();
  if (d.s < 1 || d.u < 1) throw PreconditionError("cones need stable and unstable bundles");
  const int grid = options.grid;
  std::size_t total = 1;
  for (int i = 0; i < n; ++i) total *= static_cast<std::size_t>(grid);

  const auto node_point = [&](std::size_t idx) {
    Vec c(n);
    for (int i = 0; i < n; ++i) {
      c(i) = (static_cast<double>(idx % grid) + 0.5) / grid;
      idx /= static_cast<std::size_t>(grid);
    }
    return TorusPoint(c);
  };
  const auto nearest_node = [&](const TorusPoint& p) {
    std::size_t idx = 0;
    for (int i = n - 1; i >= 0; --i) {
      auto cell = static_cast<std::size_t>(std::floor(p[i] * grid));
      idx = idx * static_cast<std::size_t>(grid) + std::min<std::size_t>(cell, grid - 1);
    }
    return idx;
  };

  std::vector<ReferenceSplitting> nodes;
  const ReferenceSplitting linear{f.linear().bundle_basis(d), d};
  if (options.source == ReferenceSource::computed) {
    nodes.resize(total);
    const BranchCode code = zero_code(options.splitting);
    SplittingOptions fast = options.splitting;
    fast.residuals = false;
    detail::parallel_for(total, [&](std::size_t idx) {
      const auto est = compute_splitting(f, node_point(idx), code, fast);
      Mat basis(n, n);
      basis << est.s.basis(), est.c.basis(), est.u.basis();
      nodes[idx] = {basis, d};
    });
  }
  const auto reference = [&](const TorusPoint& p) -> const ReferenceSplitting& {
    return nodes.empty() ? linear : nodes[nearest_node(p)];
  };

  constexpr ConeFamily families[4] = {ConeFamily::s, ConeFamily::u, ConeFamily::cs,
                                      ConeFamily::cu};
  std::vector<std::vector<Vec>> samples(4);
  for (int fam = 0; fam < 4; ++fam) {
    samples[fam] = cone_boundary_samples(cone_axis_dim(d, families[fam]), n, options.beta,
                                         options.samples_per_cone, options.seed + fam);
    const auto axis = cone_boundary_samples(cone_axis_dim(d, families[fam]), n, 0.0,
                                            options.samples_per_cone / 4, options.seed + fam);
    samples[fam].insert(samples[fam].end(), axis.begin(), axis.end());
  }

  std::vector<PointResult> results(total);
  std::vector<TorusPoint> points(total);
  detail::parallel_for(total, [&](std::size_t idx) {
    const TorusPoint x = node_point(idx);
    points[idx] = x;
    const Mat df = f.derivative(x);
    if (std::abs(df.determinant()) < 1e-12) {
      throw Error("singular derivative at a grid point; f is not a local diffeomorphism");
    }
    const TorusPoint fx = f.evaluate(x);
    const auto& ref_x = reference(x);
    const auto& ref_fx = reference(fx);
    PointResult& r = results[idx];
    for (int fam = 0; fam < 4; ++fam) {
      const ConeFamily family = families[fam];
      const int k = cone_axis_dim(d, family);
      const Mat bx = cone_coordinates(ref_x, family, options.metric);
      const Mat bfx = cone_coordinates(ref_fx, family, options.metric);
      const bool forward = family == ConeFamily::u || family == ConeFamily::cu;
      // Df in cone coordinates, from x to f(x)
      const Mat m = bfx.partialPivLu().solve(df * bx);
      const Mat m_inv = m.inverse();
      for (const Vec& y : samples[fam]) {
        const Vec w = forward ? Vec(m * y) : Vec(m_inv * y);
        const bool boundary = y.tail(n - k).norm() > 0.0;
        if (boundary) r.ratio[fam] = std::max(r.ratio[fam], ratio_of(w, k));
        // one-step rate |Df v| / |v| for v in the cone
        const double rate = forward ? w.norm() / y.norm() : y.norm() / w.norm();
        switch (family) {
          case ConeFamily::s:
            r.sup_s = std::max(r.sup_s, rate);
            break;
          case ConeFamily::cs:
            r.sup_cs = std::max(r.sup_cs, rate);
            break;
          case ConeFamily::u:
            r.inf_u = std::min(r.inf_u, rate);
            break;
          case ConeFamily::cu:
            r.inf_cu = std::min(r.inf_cu, rate);
            break;
        }
      }
    }
  });

  Certificate cert;
  cert.grid = grid;
  cert.dim = n;
  cert.beta = options.beta;
  cert.seed = options.seed;
  cert.metric = options.metric;
  cert.source = options.source;
  cert.vectors_per_cone = static_cast<int>(samples[0].size());

  const double inf = std::numeric_limits<double>::infinity();
  MarginEntry* inv[4] = {&cert.invariance_s, &cert.invariance_u, &cert.invariance_cs,
                         &cert.invariance_cu};
  for (auto* m : inv) m->value = inf;
  cert.inf_u = cert.inf_cu = inf;
  TorusPoint at_sup_s, at_sup_cs, at_inf_u, at_inf_cu;
  for (std::size_t idx = 0; idx < total; ++idx) {
    const auto& r = results[idx];
    for (int fam = 0; fam < 4; ++fam) {
      const double margin = options.beta - r.ratio[fam];
      if (margin < inv[fam]->value) *inv[fam] = {margin, points[idx]};
    }
    if (r.sup_s > cert.sup_s) {
      cert.sup_s = r.sup_s;
      at_sup_s = points[idx];
    }
    if (r.sup_cs > cert.sup_cs) {
      cert.sup_cs = r.sup_cs;
      at_sup_cs = points[idx];
    }
    if (r.inf_u < cert.inf_u) {
      cert.inf_u = r.inf_u;
      at_inf_u = points[idx];
    }
    if (r.inf_cu < cert.inf_cu) {
      cert.inf_cu = r.inf_cu;
      at_inf_cu = points[idx];
    }
  }
  cert.rate_s = {1.0 - cert.sup_s, at_sup_s};
  cert.rate_u = {cert.inf_u - 1.0, at_inf_u};
  cert.rate_cu = {cert.inf_cu - cert.sup_s, at_inf_cu};
  cert.rate_cs = {cert.inf_u - cert.sup_cs, at_sup_cs};
  cert.pass = cert.min_margin() > 0.0;
  return cert;
}

}  // namespace endolab

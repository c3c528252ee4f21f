#include "endolab/branch.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

#include <Eigen/LU>

namespace endolab {
namespace {

constexpr double kNewtonTolerance = 1e-13;
constexpr int kNewtonIterations = 64;
constexpr double kPreimageCheck = 1e-10;

double sup_norm(const Vec& v) { return v.cwiseAbs().maxCoeff(); }

// Solves phi~(z) = target in lifted coordinates, starting from z = target.
Vec invert_perturbation(const Endomorphism& f, const Vec& target) {
  Vec z = target;
  Vec residual = f.perturb(LiftPoint{z}).coords - target;
  for (int it = 0; it < kNewtonIterations; ++it) {
    if (sup_norm(residual) < kNewtonTolerance) return z;
    const Mat jac = f.perturbation_jacobian(LiftPoint{z});
    const Vec step = jac.partialPivLu().solve(residual);
    // Full steps normally; halve when a step would increase the residual.
    double lambda = 1.0;
    Vec trial = z - step;
    Vec trial_residual = f.perturb(LiftPoint{trial}).coords - target;
    while (sup_norm(trial_residual) > sup_norm(residual) && lambda > 1e-4) {
      lambda *= 0.5;
      trial = z - lambda * step;
      trial_residual = f.perturb(LiftPoint{trial}).coords - target;
    }
    z = trial;
    residual = trial_residual;
  }
  if (sup_norm(residual) < kNewtonTolerance) return z;
  throw ConvergenceError("Newton preimage solve did not converge in 64 iterations (residual " +
                         std::to_string(sup_norm(residual)) + ")");
}

char letter_char(int letter) {
  return static_cast<char>(letter < 10 ? '0' + letter : 'a' + (letter - 10));
}

}  // namespace

std::string BranchCode::to_string() const {
  std::string out;
  out.reserve(word.size());
  for (int l : word) {
    if (l < 0 || l >= 36) throw PreconditionError("branch letter out of printable range");
    out.push_back(letter_char(l));
  }
  return out;
}

BranchCode BranchCode::parse(const std::string& digits) {
  BranchCode code;
  for (char ch : digits) {
    if (ch >= '0' && ch <= '9') {
      code.word.push_back(ch - '0');
    } else if (ch >= 'a' && ch <= 'z') {
      code.word.push_back(ch - 'a' + 10);
    } else {
      throw PreconditionError(std::string("invalid branch code character '") + ch + "'");
    }
  }
  return code;
}

BranchCode BranchCode::prepend(int letter) const {
  BranchCode out;
  out.word.reserve(word.size() + 1);
  out.word.push_back(letter);
  out.word.insert(out.word.end(), word.begin(), word.end());
  return out;
}

BranchCode BranchCode::prefix(int m) const {
  if (m < 0 || m > depth()) throw PreconditionError("prefix longer than the code");
  return BranchCode{std::vector<int>(word.begin(), word.begin() + m)};
}

TorusPoint preimage(const Endomorphism& f, const TorusPoint& y, int index) {
  const auto& offsets = f.linear().preimage_offsets();
  if (index < 0 || index >= static_cast<int>(offsets.size())) {
    throw PreconditionError("preimage index " + std::to_string(index) + " not below degree " +
                            std::to_string(offsets.size()));
  }
  const Vec target = f.linear().inverse() * y.coords() + offsets[static_cast<std::size_t>(index)];
  if (!f.has_perturbation()) return TorusPoint(target);
  const TorusPoint z(invert_perturbation(f, target));
  if (f.is_torus_map()) {
    const double miss = torus_distance(f.evaluate(z), y);
    if (miss > kPreimageCheck) {
      throw ConvergenceError("preimage misses its image by " + std::to_string(miss));
    }
  }
  return z;
}

std::vector<TorusPoint> preimages(const Endomorphism& f, const TorusPoint& y) {
  std::vector<TorusPoint> out;
  out.reserve(static_cast<std::size_t>(f.degree()));
  for (int i = 0; i < f.degree(); ++i) out.push_back(preimage(f, y, i));
  return out;
}

BackwardOrbit backward_orbit(const Endomorphism& f, const TorusPoint& x, const BranchCode& code) {
  BackwardOrbit orbit;
  orbit.code = code;
  orbit.points.reserve(code.word.size() + 1);
  orbit.points.push_back(x);
  for (int letter : code.word) {
    if (letter < 0 || letter >= f.degree()) {
      throw PreconditionError("branch letter " + std::to_string(letter) + " not below degree " +
                              std::to_string(f.degree()));
    }
    orbit.points.push_back(preimage(f, orbit.points.back(), letter));
  }
  return orbit;
}

BackwardOrbit avoiding_backward_orbit(const Endomorphism& f, const TorusPoint& x,
                                      const std::vector<Ball>& forbidden, int depth) {
  if (static_cast<int>(forbidden.size()) >= f.degree()) {
    throw PreconditionError("need more preimages than forbidden balls (degree " +
                            std::to_string(f.degree()) + ", " +
                            std::to_string(forbidden.size()) + " balls)");
  }
  BackwardOrbit orbit;
  orbit.points.push_back(x);
  for (int k = 0; k < depth; ++k) {
    const TorusPoint& y = orbit.points.back();
    int chosen = -1;
    for (int i = 0; i < f.degree() && chosen < 0; ++i) {
      const TorusPoint z = preimage(f, y, i);
      const bool blocked = std::any_of(forbidden.begin(), forbidden.end(),
                                       [&](const Ball& b) { return b.contains(z); });
      if (!blocked) {
        chosen = i;
        orbit.points.push_back(z);
      }
    }
    if (chosen < 0) {
      throw PreconditionError("every preimage at backward depth " + std::to_string(k + 1) +
                              " lies in a forbidden ball");
    }
    orbit.code.word.push_back(chosen);
  }
  return orbit;
}

std::vector<BranchCode> enumerate_codes(int degree, int depth, std::size_t limit,
                                        std::uint64_t seed) {
  if (degree < 1 || depth < 0) throw PreconditionError("enumerate_codes needs degree >= 1");
  std::vector<BranchCode> out;
  if (limit == 0) return out;

  // deg^m, saturating at limit + 1
  std::size_t total = 1;
  for (int i = 0; i < depth && total <= limit; ++i) total *= static_cast<std::size_t>(degree);

  if (total <= limit) {
    out.reserve(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
      BranchCode code;
      code.word.assign(static_cast<std::size_t>(depth), 0);
      std::size_t rest = idx;
      for (int k = depth - 1; k >= 0; --k) {
        code.word[static_cast<std::size_t>(k)] = static_cast<int>(rest % degree);
        rest /= static_cast<std::size_t>(degree);
      }
      out.push_back(std::move(code));
    }
    return out;
  }

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> letter(0, degree - 1);
  std::set<BranchCode> seen;
  while (seen.size() < limit) {
    BranchCode code;
    code.word.resize(static_cast<std::size_t>(depth));
    for (auto& l : code.word) l = letter(rng);
    seen.insert(std::move(code));
  }
  return {seen.begin(), seen.end()};
}

std::vector<TorusPoint> forward_orbit(const Endomorphism& f, const TorusPoint& x, int steps) {
  std::vector<TorusPoint> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back(x);
  for (int k = 0; k < steps; ++k) out.push_back(f.evaluate(out.back()));
  return out;
}

TruncatedBiorbit biorbit(const Endomorphism& f, const TorusPoint& x, const BranchCode& code) {
  const int m = code.depth();
  const BackwardOrbit back = backward_orbit(f, x, code);
  const auto forward = forward_orbit(f, x, m);
  std::vector<TorusPoint> points;
  points.reserve(static_cast<std::size_t>(2 * m + 1));
  for (int k = m; k >= 1; --k) points.push_back(back.back(k));
  points.insert(points.end(), forward.begin(), forward.end());
  return TruncatedBiorbit(m, std::move(points));
}

int preimage_index(const Endomorphism& f, const TorusPoint& x, double tolerance) {
  const TorusPoint y = f.evaluate(x);
  for (int i = 0; i < f.degree(); ++i) {
    if (torus_distance(preimage(f, y, i), x) <= tolerance) return i;
  }
  return -1;
}

}  // namespace endolab

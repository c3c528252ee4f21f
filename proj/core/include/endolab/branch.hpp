#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "endolab/endomorphism.hpp"
#include "endolab/torus.hpp"

namespace endolab {

/// Finite word selecting a preimage at each backward step. Letter k picks
/// preimages(f, x_{-k})[word[k]].
struct BranchCode {
  std::vector<int> word;

  int depth() const { return static_cast<int>(word.size()); }
  /// Digit string such as "0211"; letters >= 10 are written in base 36.
  std::string to_string() const;
  static BranchCode parse(const std::string& digits);
  /// The code of f(x) whose orbit is (x, x_{-1}, ...): `letter` followed by this word.
  BranchCode prepend(int letter) const;
  BranchCode prefix(int m) const;

  friend bool operator==(const BranchCode&, const BranchCode&) = default;
  friend auto operator<=>(const BranchCode&, const BranchCode&) = default;
};

/// x_0, x_{-1}, ..., x_{-m} with f(x_{-k-1}) = x_{-k}.
struct BackwardOrbit {
  std::vector<TorusPoint> points;
  BranchCode code;

  int depth() const { return static_cast<int>(points.size()) - 1; }
  /// x_{-k}.
  const TorusPoint& back(int k) const { return points.at(static_cast<std::size_t>(k)); }
};

/// The deg(f) preimages of y in canonical (offset) order.
std::vector<TorusPoint> preimages(const Endomorphism& f, const TorusPoint& y);

/// Only the preimage with canonical index `index`.
TorusPoint preimage(const Endomorphism& f, const TorusPoint& y, int index);

BackwardOrbit backward_orbit(const Endomorphism& f, const TorusPoint& x, const BranchCode& code);

/// Picks the least-index preimage outside every forbidden ball at each step.
BackwardOrbit avoiding_backward_orbit(const Endomorphism& f, const TorusPoint& x,
                                      const std::vector<Ball>& forbidden, int depth);

/// min(deg^m, limit) distinct codes: all of them in lexicographic order when
/// they fit, otherwise a seeded sample without replacement (sorted).
std::vector<BranchCode> enumerate_codes(int degree, int depth, std::size_t limit,
                                        std::uint64_t seed = 0);

/// x_0, f(x_0), ..., f^k(x_0).
std::vector<TorusPoint> forward_orbit(const Endomorphism& f, const TorusPoint& x, int steps);

/// (x_{-m}, ..., x_m) from a backward code and forward iteration.
TruncatedBiorbit biorbit(const Endomorphism& f, const TorusPoint& x, const BranchCode& code);

/// Index of x among preimages(f, f(x)), or -1 if none is within `tolerance`.
int preimage_index(const Endomorphism& f, const TorusPoint& x, double tolerance = 1e-9);

}  // namespace endolab

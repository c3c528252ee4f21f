#include "endolab/multiplicity.hpp"

#include <algorithm>
#include <numeric>

#include "parallel.hpp"

namespace endolab {

std::string to_string(Sigma sigma) {
  switch (sigma) {
    case Sigma::c:
      return "c";
    case Sigma::u:
      return "u";
    case Sigma::cu:
      return "cu";
  }
  return "?";
}

Sigma parse_sigma(const std::string& name) {
  if (name == "c") return Sigma::c;
  if (name == "u") return Sigma::u;
  if (name == "cu") return Sigma::cu;
  throw PreconditionError("sigma must be one of c, u, cu (got '" + name + "')");
}

SubspaceFrame sigma_frame(const Endomorphism& f, const TorusPoint& x, Sigma sigma,
                          const BranchCode& code, const SplittingOptions& options) {
  const auto unstable = unstable_and_cu_frames(f, backward_orbit(f, x, code), options);
  switch (sigma) {
    case Sigma::u:
      return unstable.u;
    case Sigma::cu:
      return unstable.cu;
    case Sigma::c:
      break;
  }
  const auto stable = stable_and_cs_frames(f, x, options);
  return center_frame(unstable.cu, stable.cs, f.dims().c);
}

MultiplicityReport count_directions(const Endomorphism& f, const TorusPoint& x, Sigma sigma,
                                    const MultiplicityOptions& options) {
  if (sigma == Sigma::c && f.dims().c == 0) {
    throw PreconditionError("center multiplicity needs a nontrivial center bundle");
  }
  std::vector<BranchCode> codes = options.codes;
  if (codes.empty()) {
    codes = enumerate_codes(f.degree(), options.depth, options.code_budget, options.seed);
  }

  // E^cs does not depend on the branch, so compute it once for sigma = c.
  std::optional<StableFrames> stable;
  if (sigma == Sigma::c) stable = stable_and_cs_frames(f, x, options.splitting);

  std::vector<SubspaceFrame> frames(codes.size());
  detail::parallel_for(codes.size(), [&](std::size_t i) {
    const auto unstable =
        unstable_and_cu_frames(f, backward_orbit(f, x, codes[i]), options.splitting);
    if (sigma == Sigma::u) {
      frames[i] = unstable.u;
    } else if (sigma == Sigma::cu) {
      frames[i] = unstable.cu;
    } else {
      frames[i] = center_frame(unstable.cu, stable->cs, f.dims().c);
    }
  });

  // single linkage via union-find; deterministic because indices follow code order
  std::vector<std::size_t> parent(codes.size());
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  std::vector<std::vector<double>> dist(codes.size(), std::vector<double>(codes.size(), 0.0));
  for (std::size_t i = 0; i < codes.size(); ++i) {
    for (std::size_t j = i + 1; j < codes.size(); ++j) {
      dist[i][j] = dist[j][i] = subspace_distance(frames[i], frames[j]);
      if (dist[i][j] < options.cluster_threshold) {
        const auto a = find(i), b = find(j);
        parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }

  MultiplicityReport report;
  report.x = x;
  report.sigma = sigma;
  report.depth = codes.empty() ? options.depth : codes.front().depth();
  report.codes_tried = static_cast<int>(codes.size());
  std::vector<int> cluster_of(codes.size(), -1);
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const auto root = find(i);
    if (cluster_of[root] < 0) {
      cluster_of[root] = static_cast<int>(report.clusters.size());
      report.clusters.push_back({frames[i], {}});
    }
    cluster_of[i] = cluster_of[root];
    report.clusters[static_cast<std::size_t>(cluster_of[i])].witnesses.push_back(codes[i]);
  }
  for (std::size_t i = 0; i < codes.size(); ++i) {
    for (std::size_t j = i + 1; j < codes.size(); ++j) {
      if (cluster_of[i] == cluster_of[j]) continue;
      if (!report.min_inter_cluster_angle || dist[i][j] < *report.min_inter_cluster_angle) {
        report.min_inter_cluster_angle = dist[i][j];
      }
    }
  }
  return report;
}

std::vector<BranchCode> pushed_codes(const Endomorphism& f, const TorusPoint& x,
                                     const std::vector<BranchCode>& codes) {
  const int index = preimage_index(f, x);
  if (index < 0) throw ConvergenceError("x is not found among the preimages of f(x)");
  std::vector<BranchCode> out;
  out.reserve(codes.size());
  for (const auto& c : codes) out.push_back(c.prepend(index));
  return out;
}

}  // namespace endolab

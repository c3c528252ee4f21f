#include <numbers>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace endolab;
using oracle::cols;

TEST(CocycleProduct, Examples) {
  const auto f = oracle::integral({{3, 1}, {1, 1}});
  const auto orbit = forward_orbit(f, TorusPoint{0.1, 0.2}, 4);
  std::vector<TorusPoint> first(orbit.begin(), orbit.begin() + 5);
  Mat a(2, 2);
  a << 3, 1, 1, 1;
  Mat a5 = Mat::Identity(2, 2);
  for (int i = 0; i < 5; ++i) a5 = a5 * a;
  const auto p = cocycle_product(f, first, CocycleDirection::forward);
  EXPECT_LT((p.value() - a5).norm() / a5.norm(), 1e-14);

  const auto one = cocycle_product(f, {TorusPoint{0.1, 0.2}}, CocycleDirection::forward);
  EXPECT_LT((one.value() - a).norm(), 1e-15);

  const auto d = oracle::diagonal({0.5, 2.0});
  const auto dorbit = forward_orbit(d, TorusPoint{0.3, 0.3}, 9);
  const auto dp = cocycle_product(d, dorbit, CocycleDirection::forward);
  EXPECT_NEAR(dp.value()(0, 0), std::ldexp(1.0, -10), 1e-20);
  EXPECT_NEAR(dp.value()(1, 1), std::ldexp(1.0, 10), 1e-9);
  EXPECT_EQ(dp.value()(0, 1), 0.0);
}

TEST(CocycleProduct, RejectsBrokenOrbit) {
  const auto f = oracle::integral({{3, 1}, {1, 1}});
  EXPECT_THROW(cocycle_product(f, {TorusPoint{0.1, 0.2}, TorusPoint{0.4, 0.4}},
                               CocycleDirection::forward),
               Error);
}

TEST(StableFrames, Examples) {
  const auto cat = oracle::integral({{2, 1}, {1, 1}});
  const auto st = stable_and_cs_frames(cat, TorusPoint{0.3, 0.1});
  EXPECT_LT(oracle::gap(st.s.basis(), oracle::cat_stable()), 1e-12);
  // contracting eigenline: v2 / v1 = lambda_s - 2 = -(1 + sqrt 5) / 2
  EXPECT_NEAR(st.s.basis()(1, 0) / st.s.basis()(0, 0), -(1.0 + std::sqrt(5.0)) / 2.0, 1e-12);
  EXPECT_LT(st.residual_s, 1e-10);

  const auto block = build_map(preset_map("t3-block-n2"));
  const auto bs = stable_and_cs_frames(block, TorusPoint{0.3, 0.1, 0.7});
  Mat cs(3, 2);
  cs << oracle::cat_stable()(0), 0, oracle::cat_stable()(1), 0, 0, 1;
  EXPECT_LT(oracle::gap(bs.cs.basis(), cs), 1e-12);

  const auto diag = oracle::diagonal({0.5, 1.0, 2.0});
  const auto ds = stable_and_cs_frames(diag, TorusPoint{0.2, 0.2, 0.2});
  EXPECT_LT(oracle::gap(ds.s.basis(), cols({{1, 0, 0}})), 1e-10);
}

TEST(UnstableFrames, LinearIsCodeIndependent) {
  const auto f = oracle::integral({{3, 1}, {1, 1}});
  Mat a(2, 2);
  a << 3, 1, 1, 1;
  const Vec vu = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvectors().col(1);
  for (const auto& code : enumerate_codes(2, 40, 16, 3)) {
    const auto uf = unstable_and_cu_frames(f, backward_orbit(f, TorusPoint{0.4, 0.9}, code));
    EXPECT_LT(oracle::gap(uf.u.basis(), vu), 1e-8);
  }
}

TEST(UnstableFrames, DiagonalPowerIteration) {
  const auto d = oracle::diagonal({0.5, 2.0});
  const auto orbit = backward_orbit(d, TorusPoint{0.3, 0.6}, BranchCode{std::vector<int>(30, 0)});
  const auto pushed = push_frame(d, orbit, cols({{1, 1}}));
  EXPECT_LT(oracle::gap(pushed.basis(), cols({{0, 1}})), std::ldexp(1.0, -30));
}

TEST(UnstableFrames, DesignedBranchesGiveDistinctPlanes) {
  const auto spec = preset_map("theorem-d-t3");
  const auto f = build_map(spec);
  std::vector<SubspaceFrame> cu;
  for (const auto& code : spec.design->codes) {
    cu.push_back(unstable_and_cu_frames(f, backward_orbit(f, spec.design->x, code)).cu);
  }
  EXPECT_EQ(triple_intersection(cu[0], cu[1], cu[2]).dimension, 0);
}

TEST(ComputeSplitting, LinearBundlesMatchEigenspaces) {
  const auto f = build_map(preset_map("t3-block-n2"));
  const auto est = compute_splitting(f, TorusPoint{0.1, 0.5, 0.9},
                                     BranchCode{std::vector<int>(40, 0)});
  EXPECT_LT(oracle::gap(est.c.basis(), cols({{0, 0, 1}})), 1e-10);
  Mat s(3, 1), u(3, 1);
  s << oracle::cat_stable(), 0;
  u << oracle::cat_unstable(), 0;
  EXPECT_LT(oracle::gap(est.s.basis(), s), 1e-10);
  EXPECT_LT(oracle::gap(est.u.basis(), u), 1e-10);
  EXPECT_LT(est.max_residual(), 1e-10);
  EXPECT_NEAR(est.spanning_volume, 1.0, 1e-10);  // orthogonal eigenvectors of a symmetric block
}

TEST(ComputeSplitting, EcsIsBranchFreeOnTheoremDMap) {
  const auto spec = preset_map("theorem-d-t3");
  const auto f = build_map(spec);
  const auto forward = stable_and_cs_frames(f, spec.design->x);
  for (const auto& code : enumerate_codes(3, 40, 8, 4)) {
    const auto pushed = pushed_cs_frame(f, backward_orbit(f, spec.design->x, code), 8);
    EXPECT_LT(oracle::gap(pushed.basis(), forward.cs.basis()), 1e-6);
  }
}

TEST(AngleDecay, DegenerateWhenEqual) {
  const auto f = oracle::diagonal({0.5, 1.0, 2.0});
  const TorusPoint p{0.1, 0.1, 0.1};
  const SubspaceFrame e(cols({{0, 1, 0}}), p);
  const auto s = angle_decay_series(f, p, e, e);
  EXPECT_TRUE(s.degenerate);
  for (double a : s.angle) EXPECT_EQ(a, 0.0);
}

TEST(AngleDecay, DiagonalClosedForm) {
  // Df^n (e1 + e2) = (2^-n, 1, 0): the angle to e2 is atan(2^-n), slope -log 2.
  const auto f = oracle::diagonal({0.5, 1.0, 2.0});
  const TorusPoint p{0.1, 0.1, 0.1};
  const auto s = angle_decay_series(f, p, SubspaceFrame(cols({{0, 1, 0}}), p),
                                    SubspaceFrame(cols({{1, 1, 0}}), p));
  EXPECT_FALSE(s.degenerate);
  EXPECT_NEAR(s.slope, -std::log(2.0), 1e-6);
  for (std::size_t i = 0; i < 30; ++i) {
    EXPECT_NEAR(s.angle[i], std::atan(std::ldexp(1.0, -s.n[i])), 1e-15);
  }
}

TEST(TransversalityFloor, PositiveAndStableUnderRefinement) {
  const auto f = build_map(preset_map("theorem-d-t3"));
  const auto coarse = transversality_floor(f, 8);
  const auto fine = transversality_floor(f, 16);
  EXPECT_GT(coarse.floor, 0.0);
  EXPECT_GT(fine.floor, 0.0);
  EXPECT_LE(std::abs(fine.floor - coarse.floor), 0.1 * coarse.floor);

  const auto linear = transversality_floor(build_map(preset_map("linear-t2-n2")), 32);
  EXPECT_NEAR(linear.floor, std::numbers::pi / 2, 1e-10);  // symmetric matrix
}

TEST(Splitting, RejectsShallowDepth) {
  const auto f = build_map(preset_map("linear-t2-n2"));
  SplittingOptions o;
  o.forward_depth = 3;
  EXPECT_THROW(stable_and_cs_frames(f, TorusPoint{0.1, 0.1}, o), PreconditionError);
  EXPECT_THROW(unstable_and_cu_frames(f, backward_orbit(f, TorusPoint{0.1, 0.1},
                                                        BranchCode{std::vector<int>(5, 0)})),
               PreconditionError);
}

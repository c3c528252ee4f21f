#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace endolab;

namespace {
ReferenceSplitting diag_ref() {
  ReferenceSplitting r;
  r.basis = Mat::Identity(2, 2);
  r.dims = {1, 0, 1};
  return r;
}
}  // namespace

TEST(InCone, Examples) {
  const auto ref = diag_ref();
  const ConeField u(0.3, ConeFamily::u);
  EXPECT_TRUE(in_cone(u, ref, oracle::cols({{0, 1}})));
  EXPECT_TRUE(in_cone(ConeField(0.01, ConeFamily::u), ref, oracle::cols({{0, -5}})));
  EXPECT_FALSE(in_cone(u, ref, oracle::cols({{1, 0}})));
  EXPECT_TRUE(in_cone(ConeField(1.0, ConeFamily::u), ref, oracle::cols({{1, 1}})));
  EXPECT_THROW(in_cone(u, ref, oracle::cols({{0, 0}})), Error);
}

TEST(ConeBoundarySamples, LieOnTheBoundary) {
  for (const auto& v : cone_boundary_samples(2, 3, 0.4, 64, 9)) {
    EXPECT_NEAR(v.head(2).norm(), 1.0, 1e-14);
    EXPECT_NEAR(v.tail(1).norm(), 0.4, 1e-14);
  }
}

TEST(VerifyCones, DiagonalExactImage) {
  // (y_s, y_u) with |y_s| = beta |y_u| maps to (y_s / 2, 2 y_u): ratio beta / 4
  MapSpec spec;
  spec.matrix = Mat(Vec((Vec(2) << 0.5, 2.0).finished()).asDiagonal());
  spec.cocycle_model = true;
  ConeOptions o;
  o.beta = 0.5;
  o.grid = 8;
  const auto cert = verify_cone_conditions(build_map(spec), o);
  EXPECT_TRUE(cert.pass);
  EXPECT_NEAR(cert.invariance_u.value, 0.5 - 0.125, 1e-12);
  EXPECT_NEAR(cert.invariance_s.value, 0.5 - 0.125, 1e-12);
  EXPECT_NEAR(cert.inf_u, 2.0 / std::sqrt(1 + 0.25) * std::sqrt(1 + 0.25 / 16), 1e-9);
}

TEST(VerifyCones, TheoremDPassesAndGridIsStable) {
  const auto f = build_map(preset_map("theorem-d-t3"));
  ConeOptions o;
  o.grid = 32;
  const auto c32 = verify_cone_conditions(f, o);
  o.grid = 64;
  const auto c64 = verify_cone_conditions(f, o);
  EXPECT_TRUE(c32.pass);
  EXPECT_TRUE(c64.pass);
  EXPECT_LT(std::abs(c64.min_margin() - c32.min_margin()), 0.15 * std::abs(c32.min_margin()));
  EXPECT_LE(c64.min_margin(), c32.min_margin() + 1e-12);  // finer grid can only find worse points
}

TEST(VerifyCones, LargeRotationFails) {
  TheoremDOptions t;
  t.theta = 1.2;
  t.seed = kTheoremDSeed;
  t.certify_cones = false;
  const auto strong = build_theorem_d_map(LinearPart::integral(companion_deg3()), t);
  ConeOptions o;
  o.grid = 16;
  const auto cert = verify_cone_conditions(strong.map, o);
  EXPECT_FALSE(cert.pass);
  EXPECT_LT(std::min({cert.invariance_s.value, cert.invariance_u.value, cert.invariance_cs.value,
                      cert.invariance_cu.value}),
            0.0);
}

TEST(VerifyCones, MonotoneInTheta) {
  double previous = 1e9;
  for (double theta : {0.05, 0.2, 0.6, 1.2}) {
    TheoremDOptions t;
    t.theta = theta;
    t.seed = kTheoremDSeed;
    t.certify_cones = false;
    const auto m = build_theorem_d_map(LinearPart::integral(companion_deg3()), t);
    ConeOptions o;
    o.grid = 16;
    const double margin = verify_cone_conditions(m.map, o).min_margin();
    EXPECT_LT(margin, previous) << theta;
    previous = margin;
  }
}

TEST(VerifyCones, ComputedReferenceOnLinearMap) {
  ConeOptions o;
  o.grid = 8;
  o.source = ReferenceSource::computed;
  const auto linear = verify_cone_conditions(build_map(preset_map("t3-anosov-deg3")), o);
  o.source = ReferenceSource::linear;
  const auto exact = verify_cone_conditions(build_map(preset_map("t3-anosov-deg3")), o);
  EXPECT_TRUE(linear.pass);
  EXPECT_NEAR(linear.min_margin(), exact.min_margin(), 1e-8);
}

TEST(VerifyCones, RejectsBadParameters) {
  const auto f = build_map(preset_map("linear-t2-n2"));
  ConeOptions o;
  o.beta = 1.0;
  EXPECT_THROW(verify_cone_conditions(f, o), PreconditionError);
  o.beta = 0.4;
  o.grid = 4;
  EXPECT_THROW(verify_cone_conditions(f, o), PreconditionError);
}

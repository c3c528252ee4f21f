#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace endolab;

TEST(TheoremD, DegenerateAtZeroAngle) {
  TheoremDOptions o;
  o.theta = 0.0;
  const auto a = LinearPart::integral(companion_deg3());
  const auto m = build_theorem_d_map(a, o);
  EXPECT_TRUE(m.report.degenerate);
  EXPECT_EQ(m.report.flag, "degenerate: special map unchanged");
  EXPECT_TRUE(m.map.bumps().empty());
  for (const auto& p : oracle::points(3, 10, 1)) {
    EXPECT_EQ(m.map.evaluate(p), Endomorphism(a).evaluate(p));
  }
}

TEST(TheoremD, CompanionDesign) {
  TheoremDOptions o;
  o.seed = kTheoremDSeed;
  o.certify_cones = false;
  const auto m = build_theorem_d_map(LinearPart::integral(companion_deg3()), o);
  const auto& r = m.report;
  EXPECT_FALSE(r.degenerate);
  EXPECT_EQ(r.triple.dimension, 0);
  ASSERT_EQ(r.design.preimages.size(), 3u);
  ASSERT_EQ(r.design.balls.size(), 2u);
  ASSERT_EQ(r.design.codes.size(), 3u);
  const double tau = linear_separation(LinearPart::integral(companion_deg3()));
  EXPECT_NEAR(r.tau, tau, 1e-15);
  EXPECT_LT(r.radius, tau / 3);
  // the preimages are pairwise and from x more than tau/2 apart
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_GT(torus_distance(r.design.preimages[i], r.design.x), tau / 2);
    for (std::size_t j = i + 1; j < 3; ++j) {
      EXPECT_GT(torus_distance(r.design.preimages[i], r.design.preimages[j]), tau / 2);
    }
  }
  // the designed branch i starts at preimage i and then avoids both balls
  for (int i = 0; i < 3; ++i) {
    const auto orbit = backward_orbit(m.map, r.design.x, r.design.codes[static_cast<std::size_t>(i)]);
    EXPECT_LT(torus_distance(orbit.back(1), r.design.preimages[static_cast<std::size_t>(i)]), 1e-12);
    for (int k = 2; k <= orbit.depth(); ++k) {
      for (const auto& b : r.design.balls) EXPECT_FALSE(b.contains(orbit.back(k)));
    }
  }
  EXPECT_NEAR(r.c1_distance, bump_c1_constant() * 0.2, 1e-15);
  EXPECT_EQ(m.map.bumps()[0].angle, 0.2);
  EXPECT_EQ(m.map.bumps()[1].angle, -0.2);
}

TEST(TheoremD, PresetIsReproducible) {
  EXPECT_EQ(to_json(preset_map("theorem-d-t3")), to_json(preset_map("theorem-d-t3")));
}

TEST(TheoremD, CertifiesByDefault) {
  TheoremDOptions o;
  o.seed = kTheoremDSeed;
  const auto m = build_theorem_d_map(LinearPart::integral(companion_deg3()), o);
  ASSERT_TRUE(m.report.cone_certificate.has_value());
  EXPECT_TRUE(m.report.cone_certificate->pass);
  o.theta = 1.2;
  EXPECT_THROW(build_theorem_d_map(LinearPart::integral(companion_deg3()), o), VerificationError);
}

TEST(TheoremD, Preconditions) {
  IntMat cat(2, 2);
  cat << 3, 1, 1, 1;
  EXPECT_THROW(build_theorem_d_map(LinearPart::integral(cat)), PreconditionError);
  IntMat block(3, 3);
  block << 2, 1, 0, 1, 1, 0, 0, 0, 1;
  EXPECT_THROW(build_theorem_d_map(LinearPart::integral(block)), PreconditionError);
}

TEST(TripleIntersection, GenericAndDegenerate) {
  const SubspaceFrame a(oracle::cols({{1, 0, 0}, {0, 1, 0}}));
  const SubspaceFrame b(oracle::cols({{0, 1, 0}, {0, 0, 1}}));
  const SubspaceFrame c(oracle::cols({{1, 0, 0}, {0, 0, 1}}));
  const SubspaceFrame d(oracle::cols({{0, 1, 0}, {1, 0, 1}}));
  EXPECT_EQ(triple_intersection(a, b, c).dimension, 0);
  EXPECT_EQ(triple_intersection(a, b, d).dimension, 1);  // all contain e2
}

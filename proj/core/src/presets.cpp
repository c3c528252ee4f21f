#include "endolab/presets.hpp"

namespace endolab {

std::vector<std::string> preset_names() {
  return {"linear-t2-n2", "linear-t2-deg2", "t3-block-n2", "t3-anosov-deg3", "theorem-d-t3",
          "diag-t3-cocycle"};
}

IntMat companion_deg3() {
  IntMat a(3, 3);
  a << 0, 0, -3, 1, 0, -1, 0, 1, 4;
  return a;
}

MapSpec preset_map(const std::string& name) {
  MapSpec spec;
  if (name == "linear-t2-n2") {
    spec.matrix.resize(2, 2);
    spec.matrix << 2, 1, 1, 1;
  } else if (name == "linear-t2-deg2") {
    spec.matrix.resize(2, 2);
    spec.matrix << 3, 1, 1, 1;
  } else if (name == "t3-block-n2") {
    spec.matrix.resize(3, 3);
    spec.matrix << 2, 1, 0, 1, 1, 0, 0, 0, 1;
  } else if (name == "t3-anosov-deg3") {
    spec.matrix = companion_deg3().cast<double>();
  } else if (name == "theorem-d-t3") {
    TheoremDOptions options;
    options.theta = 0.2;
    options.seed = kTheoremDSeed;
    options.certify_cones = false;  // certification is the verify-cones experiment
    const auto built = build_theorem_d_map(LinearPart::integral(companion_deg3()), options);
    return map_spec_of(built.map, built.report.design);
  } else if (name == "diag-t3-cocycle") {
    spec.matrix = Vec((Vec(3) << 0.5, 1.0, 2.0).finished()).asDiagonal();
    spec.cocycle_model = true;
  } else {
    throw PreconditionError("unknown preset '" + name + "'");
  }
  return spec;
}

}  // namespace endolab

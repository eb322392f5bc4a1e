#pragma once

// Deterministic example sets with known geometry, and the verdicts the
// geometry modules are expected to reach on them.

#include "mcfsing/reifenberg.hpp"
#include "mcfsing/spacetime.hpp"

#include <string>
#include <vector>

namespace mcfsing {

struct GeneratorSpec {
  // figure1 | four_points | three_sequences | koch | tilted_line |
  // parabolic_cone_boundary | slice_disk | time_segment | spacetime_box |
  // spatial_segment | slice_curve
  std::string kind = "four_points";
  double eps = 0.1;
  std::size_t count = 8;
  int level = 4;
  double slope = 1.0;
  int dimension = 1;

  /// Throws InvalidArgument for unknown kinds or out-of-range parameters.
  void validate() const;
};

std::vector<std::string> generator_kinds();

PointCloud generate(const GeneratorSpec& spec);

/// Planes the examples come with: the stated planes for four_points, x-axis
/// translates for three_sequences, slice lines for tilted_line and
/// holder_graph, tangent lines for slice_curve, the disk plane for
/// slice_disk. Throws InvalidArgument for kinds without a natural choice.
PlaneAssignment natural_planes(const GeneratorSpec& spec, const PointCloud& cloud);

struct Verdict {
  std::string name;
  std::string statement;
  bool expected = true;
};

/// Verdicts that hold for the example by construction.
std::vector<Verdict> ground_truth(const GeneratorSpec& spec);

struct VerdictCheck {
  Verdict verdict;
  bool observed = false;
  double value = 0.0;
  std::string detail;

  bool pass() const { return observed == verdict.expected; }
};

/// Runs the analyses behind every ground-truth verdict.
std::vector<VerdictCheck> verify(const GeneratorSpec& spec);

}  // namespace mcfsing

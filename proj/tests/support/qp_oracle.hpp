#pragma once

#include <vector>

#include "sentinel/svm.hpp"
#include "sentinel/types.hpp"

namespace sentinel::testing {

// Reference solve of the weighted soft-margin SVM dual
//   max  sum(a) - 1/2 a^T Q a   s.t.  y^T a = 0,  0 <= a_i <= C_i
// by projected gradient ascent; the projection onto box+hyperplane is found
// by bisection on the hyperplane multiplier. Small dense problems only.
struct DualSolution {
    std::vector<double> alpha;
    double objective = 0.0;
};

DualSolution solve_dual_reference(const std::vector<std::vector<double>>& X,
                                  const std::vector<Label>& y, const KernelParams& params,
                                  int iterations = 200000);

// Dual objective recomputed from a trained model's support vectors.
double dual_objective_of_model(const TrainedSvm& m);

}  // namespace sentinel::testing

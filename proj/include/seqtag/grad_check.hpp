#pragma once

#include <functional>
#include <string>

#include "seqtag/numerics.hpp"

namespace seqtag::num {

struct GradCheckReport {
  double max_rel_error = 0.0;
  int worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  int checked = 0;
  bool passed = false;

  std::string to_string() const;
};

// Central finite differences per coordinate against an analytic gradient.
// loss must be a deterministic function of the flat parameter vector.
GradCheckReport grad_check(const std::function<double(const Vector&)>& loss,
                           const Vector& params, const Vector& analytic_grad,
                           double epsilon = 1e-5, double tolerance = 1e-4);

}  // namespace seqtag::num

#include "seqtag/grad_check.hpp"

#include <sstream>

namespace seqtag::num {

std::string GradCheckReport::to_string() const {
  std::ostringstream os;
  os << (passed ? "PASS" : "FAIL") << "  coords=" << checked
     << "  max_rel_error=" << max_rel_error;
  if (worst_index >= 0)
    os << "  worst[" << worst_index << "] analytic=" << worst_analytic
       << " numeric=" << worst_numeric;
  return os.str();
}

GradCheckReport grad_check(const std::function<double(const Vector&)>& loss,
                           const Vector& params, const Vector& analytic_grad,
                           double epsilon, double tolerance) {
  if (params.size() != analytic_grad.size())
    throw Error("grad_check: gradient size does not match parameter size");

  GradCheckReport report;
  report.checked = static_cast<int>(params.size());
  Vector probe = params;
  for (int i = 0; i < params.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + epsilon;
    const double up = loss(probe);
    probe[i] = saved - epsilon;
    const double down = loss(probe);
    probe[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down))
      throw Error("grad_check: non-finite loss");
    const double numeric = (up - down) / (2.0 * epsilon);
    const double analytic = analytic_grad[i];
    const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
    const double rel = std::abs(numeric - analytic) / denom;
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_index = i;
      report.worst_analytic = analytic;
      report.worst_numeric = numeric;
    }
  }
  report.passed = report.max_rel_error <= tolerance;
  return report;
}

}  // namespace seqtag::num

#include "specloc/error.hpp"

#include <sstream>

namespace specloc {

namespace {

std::string factorization_message(double shift) {
  std::ostringstream os;
  os.precision(17);
  os << "factorization of (A - sigma*B) failed at sigma = " << shift
     << "; sigma is probably an eigenvalue, retry with a perturbed shift";
  return os.str();
}

std::string convergence_message(int iterations, const std::vector<double>& res) {
  std::ostringstream os;
  os << "eigensolver did not converge within " << iterations << " restarts; best residuals:";
  for (double r : res) os << ' ' << r;
  return os.str();
}

}  // namespace

FactorizationError::FactorizationError(double shift)
    : SolverError(factorization_message(shift)), shift_(shift) {}

ConvergenceError::ConvergenceError(int iterations, std::vector<double> best_residuals)
    : SolverError(convergence_message(iterations, best_residuals)),
      iterations_(iterations),
      residuals_(std::move(best_residuals)) {}

}  // namespace specloc

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>

namespace slowfast {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Thrown when an algorithm fails numerically (divergence, underflow, ...),
// as opposed to a precondition violation (std::invalid_argument).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace slowfast

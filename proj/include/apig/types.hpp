#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace apig {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using Index = Eigen::Index;

/// Fixed-point iteration failed to reach its tolerance within the cap.
/// For the beamforming dual this signals infeasible SINR targets.
class FpDivergenceError : public std::runtime_error {
 public:
  explicit FpDivergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// A channel vector is zero or a beamformer has no gain toward its user.
class DegenerateChannelError : public std::runtime_error {
 public:
  explicit DegenerateChannelError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline void require_finite(const Vec& v, const std::string& name) {
  if (!v.allFinite()) throw std::invalid_argument(name + " must be finite");
}

}  // namespace apig

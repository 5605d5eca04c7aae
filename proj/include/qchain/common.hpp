#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qchain {

inline constexpr const char* kVersion = "0.1.0";

using Complex = std::complex<double>;
using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;
using MatrixXr = Eigen::MatrixXd;
using VectorXr = Eigen::VectorXd;
using ArrayXXr = Eigen::ArrayXXd;
using ArrayXr = Eigen::ArrayXd;

inline constexpr Complex kImag{0.0, 1.0};

/// Thrown on any violated precondition or invalid input; the message names
/// the offending quantity.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

}  // namespace qchain

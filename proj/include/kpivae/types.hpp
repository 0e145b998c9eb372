#ifndef KPIVAE_TYPES_HPP
#define KPIVAE_TYPES_HPP

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace kpivae {

using Scalar = double;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Malformed or inconsistent input (CSV rows, model files, shape mismatches).
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Numeric breakdown (degenerate statistics, non-finite losses).
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace kpivae

#endif  // KPIVAE_TYPES_HPP

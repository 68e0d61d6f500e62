#pragma once

#include <string>

#include <Eigen/Core>

namespace semrte {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// A named trainable tensor. Gradients live outside (on the tape, then in the
// optimizer's buffers) so a model can be shared read-only between forwards.
template <typename T>
struct Parameter {
  std::string name;
  std::string group;  // reporting bucket for gradient checks
  Matrix<T> value;
  bool decay = true;  // false for biases and normalization parameters
};

}  // namespace semrte

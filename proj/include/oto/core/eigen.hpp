#pragma once

#include <Eigen/Dense>

namespace oto {

// Activations and parameters are row-major: one sample, token or channel per
// row, so a row is contiguous and the raw buffer order matches the logical
// shape used in checkpoints.
template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using RowVec = Eigen::Matrix<S, 1, Eigen::Dynamic>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

using MatF = Mat<float>;
using MatD = Mat<double>;
using RowVecF = RowVec<float>;
using RowVecD = RowVec<double>;

}  // namespace oto

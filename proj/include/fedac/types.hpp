#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace fedac {

using Index = Eigen::Index;

template <typename Scalar> using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar> using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;
template <typename Scalar> using Vector2 = Eigen::Matrix<Scalar, 2, 1>;

using Vector = VectorX<double>;
using VectorRef = Eigen::Ref<Vector>;
using ConstVectorRef = Eigen::Ref<const Vector>;
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

} // namespace fedac

#pragma once

#include <complex>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace gd {

using cdouble = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Vec4 = Eigen::Vector4d;

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace gd

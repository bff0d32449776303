#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nsdf {

using Real = double;
using Index = Eigen::Index;

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec3i = Eigen::Vector3i;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Point / row-per-sample containers.
using MatX2 = Eigen::Matrix<Real, Eigen::Dynamic, 2>;
using MatX3 = Eigen::Matrix<Real, Eigen::Dynamic, 3>;
using MatX3i = Eigen::Matrix<int, Eigen::Dynamic, 3>;

enum class StructureId : uint8_t { MYO = 0, RV = 1 };
inline constexpr int kNumStructures = 2;

inline const char* to_string(StructureId s) {
  return s == StructureId::MYO ? "MYO" : "RV";
}

enum class Label : uint8_t { BACKGROUND = 0, LVBP = 1, MYO = 2, RV = 3 };

// Error taxonomy, mapped to CLI exit codes (config=2, data=3, numerical=4).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace nsdf

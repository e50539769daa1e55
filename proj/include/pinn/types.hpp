#pragma once

#include <Eigen/Dense>

namespace pinn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Arr = Eigen::ArrayXd;

}  // namespace pinn

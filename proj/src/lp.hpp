#pragma once

#include <Eigen/Dense>

namespace kw {

struct LpResult {
    bool feasible = false;
    bool optimal = false;
    double objective = 0.0;
    Eigen::VectorXd x;  // primal solution
    Eigen::VectorXd y;  // row duals (y^T A_B = c_B^T)
    int pivots = 0;
};

// Dense two-phase primal simplex with Bland's rule for
//     min c^T x   s.t.  A x = b,  x >= 0.
// Sized for desk-scale problems (a few hundred rows/columns).
LpResult simplex_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                       const Eigen::VectorXd& c);

} // namespace kw

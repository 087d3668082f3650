#include "lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "errors.hpp"

namespace kw {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-9;

struct Tableau {
    Eigen::MatrixXd T;       // m x (ncols + 1), last column is the rhs
    std::vector<int> basis;  // basic column per row
    int m;
    int ncols;

    double rhs(int i) const { return T(i, ncols); }

    void pivot(int row, int col) {
        T.row(row) /= T(row, col);
        for (int i = 0; i < m; ++i) {
            if (i == row) continue;
            double f = T(i, col);
            if (f != 0.0) T.row(i) -= f * T.row(row);
        }
        basis[row] = col;
    }
};

// Returns true at optimality, false if unbounded.
bool run_simplex(Tableau& tab, const Eigen::VectorXd& cost,
                 const std::vector<bool>& allowed, int* pivots) {
    const int m = tab.m;
    const int n = tab.ncols;
    Eigen::VectorXd cb(m);
    for (;;) {
        for (int i = 0; i < m; ++i) cb(i) = cost(tab.basis[i]);
        // Bland: pick the smallest-index column with negative reduced cost.
        int enter = -1;
        for (int j = 0; j < n; ++j) {
            if (!allowed[j]) continue;
            double d = cost(j) - cb.dot(tab.T.col(j));
            if (d < -kCostTol) { enter = j; break; }
        }
        if (enter < 0) return true;

        int leave = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) {
            double a = tab.T(i, enter);
            if (a > kPivotTol) {
                double r = tab.rhs(i) / a;
                if (r < best_ratio - 1e-12 ||
                    (r < best_ratio + 1e-12 &&
                     (leave < 0 || tab.basis[i] < tab.basis[leave]))) {
                    best_ratio = r;
                    leave = i;
                }
            }
        }
        if (leave < 0) return false;  // unbounded
        tab.pivot(leave, enter);
        ++(*pivots);
        if (*pivots > 200000) {
            fail(errc::solver_failure, "simplex: pivot limit exceeded");
        }
    }
}

} // namespace

LpResult simplex_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                       const Eigen::VectorXd& c) {
    const int m = static_cast<int>(A.rows());
    const int n = static_cast<int>(A.cols());
    LpResult res;

    Tableau tab;
    tab.m = m;
    tab.ncols = n + m;  // artificials appended
    tab.T.resize(m, tab.ncols + 1);
    tab.T.setZero();
    tab.T.block(0, 0, m, n) = A;
    tab.T.col(tab.ncols) = b;
    std::vector<double> row_sign(m, 1.0);
    for (int i = 0; i < m; ++i) {
        if (tab.T(i, tab.ncols) < 0) {
            tab.T.row(i) = -tab.T.row(i);
            row_sign[i] = -1.0;
        }
        tab.T(i, n + i) = 1.0;
    }
    tab.basis.resize(m);
    for (int i = 0; i < m; ++i) tab.basis[i] = n + i;

    // Phase 1: minimize the artificial mass.
    Eigen::VectorXd c1 = Eigen::VectorXd::Zero(tab.ncols);
    c1.tail(m).setOnes();
    std::vector<bool> allowed(tab.ncols, true);
    res.pivots = 0;
    if (!run_simplex(tab, c1, allowed, &res.pivots)) {
        fail(errc::internal, "simplex: phase 1 unbounded");
    }
    double art_mass = 0.0;
    for (int i = 0; i < m; ++i) {
        if (tab.basis[i] >= n) art_mass += tab.rhs(i);
    }
    if (art_mass > 1e-8) {
        res.feasible = false;
        return res;
    }
    res.feasible = true;

    // Drive leftover (degenerate) artificials out of the basis when possible.
    for (int i = 0; i < m; ++i) {
        if (tab.basis[i] < n) continue;
        int col = -1;
        for (int j = 0; j < n; ++j) {
            if (std::abs(tab.T(i, j)) > 1e-9) { col = j; break; }
        }
        if (col >= 0) {
            tab.pivot(i, col);
            ++res.pivots;
        }
        // else: redundant row; the artificial stays basic at value 0.
    }
    for (int j = n; j < tab.ncols; ++j) allowed[j] = false;

    // Phase 2.
    Eigen::VectorXd c2 = Eigen::VectorXd::Zero(tab.ncols);
    c2.head(n) = c;
    if (!run_simplex(tab, c2, allowed, &res.pivots)) {
        fail(errc::solver_failure, "simplex: objective unbounded");
    }

    res.x = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < m; ++i) {
        if (tab.basis[i] < n) res.x(tab.basis[i]) = tab.rhs(i);
    }
    res.objective = c.dot(res.x);

    // Row duals from the original basis columns: A_B^T y = c_B.
    Eigen::MatrixXd AB(m, m);
    Eigen::VectorXd cB(m);
    for (int i = 0; i < m; ++i) {
        int j = tab.basis[i];
        if (j < n) {
            AB.col(i) = A.col(j);
            cB(i) = c(j);
        } else {
            // leftover artificial on a redundant row; its original column is
            // the (possibly sign-flipped) unit vector
            AB.col(i) = row_sign[j - n] * Eigen::VectorXd::Unit(m, j - n);
            cB(i) = 0.0;
        }
    }
    res.y = AB.transpose().colPivHouseholderQr().solve(cB);
    res.optimal = true;
    return res;
}

} // namespace kw

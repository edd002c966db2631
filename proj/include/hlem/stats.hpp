#pragma once

#include <vector>

namespace hlem::stats {

/// Regularized upper incomplete gamma Q(a, x) = Γ(a, x) / Γ(a), using the
/// power series for x < a + 1 and a Lentz continued fraction otherwise.
double gamma_q(double a, double x);

/// P(X >= x) for X ~ χ²(dof).
double chi_square_survival(double x, unsigned dof);

struct ChiSquare {
    double statistic = 0.0;
    unsigned dof = 0;
    double p_value = 1.0;
    double min_expected = 0.0;
};

/// Pearson test of independence on a rows x cols table of counts. Throws when
/// a row or column total is zero or the table is smaller than 2x2.
ChiSquare chi_square_test(const std::vector<std::vector<double>>& table);

}  // namespace hlem::stats

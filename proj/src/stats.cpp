#include "hlem/stats.hpp"

#include <cmath>
#include <limits>

#include "hlem/common.hpp"

namespace hlem::stats {

namespace {

constexpr int kMaxIterations = 10000;
constexpr double kEps = 1e-15;

double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < kMaxIterations; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_fraction(double a, double x) {
    constexpr double tiny = std::numeric_limits<double>::min() / kEps;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIterations; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEps) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
    if (!(a > 0.0)) throw Error("gamma_q: shape must be positive");
    if (x < 0.0) throw Error("gamma_q: x must be non-negative");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_fraction(a, x);
}

double chi_square_survival(double x, unsigned dof) {
    if (dof == 0) throw Error("chi-square needs at least one degree of freedom");
    if (x <= 0.0) return 1.0;
    return gamma_q(0.5 * dof, 0.5 * x);
}

ChiSquare chi_square_test(const std::vector<std::vector<double>>& table) {
    const std::size_t rows = table.size();
    if (rows < 2) throw Error("chi-square test needs at least two rows");
    const std::size_t cols = table.front().size();
    if (cols < 2) throw Error("chi-square test needs at least two columns");
    std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
    double total = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        if (table[r].size() != cols) throw Error("ragged contingency table");
        for (std::size_t c = 0; c < cols; ++c) {
            if (table[r][c] < 0.0) throw Error("negative count in contingency table");
            row_sum[r] += table[r][c];
            col_sum[c] += table[r][c];
            total += table[r][c];
        }
    }
    for (double s : row_sum)
        if (s == 0.0) throw Error("contingency table has an empty row");
    for (double s : col_sum)
        if (s == 0.0) throw Error("contingency table has an empty column");

    ChiSquare out;
    out.min_expected = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double expected = row_sum[r] * col_sum[c] / total;
            const double diff = table[r][c] - expected;
            out.statistic += diff * diff / expected;
            out.min_expected = std::min(out.min_expected, expected);
        }
    }
    out.dof = static_cast<unsigned>((rows - 1) * (cols - 1));
    out.p_value = chi_square_survival(out.statistic, out.dof);
    return out;
}

}  // namespace hlem::stats

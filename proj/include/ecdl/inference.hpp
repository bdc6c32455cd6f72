#pragma once

// Desparsified (debiased) Lasso: per-feature estimates that are approximately
// Gaussian around the truth, with p-values and confidence intervals.

#include "ecdl/lasso.hpp"

namespace ecdl {

// Lasso regression of column j on the remaining columns.
struct NodewiseFit {
    Index target_index = 0;
    Vector gamma;     // length p - 1, other columns in increasing index order
    Vector residual;  // z_j = x_j - X_{-j} gamma
    double tau_sq = 0.0;  // z_j^T x_j / n
    bool converged = false;
};

// lambda comes from config.lambda_rule evaluated at (n, p), shared by all j.
// Throws DegenerateResidual when tau_sq <= 1e-12.
NodewiseFit nodewise_lasso(const StandardizedDesign& design, Index j, const SolverConfig& config);

struct DlConfig {
    // Main regression, fitted on the response rescaled to unit RMS so that
    // estimates are equivariant under scaling of y. A universal rule is read
    // in noise units: lambda and the noise level are solved for jointly.
    // A fixed lambda is in unit-RMS response units.
    SolverConfig solver;
    LambdaRule nodewise_lambda = UniversalLambda{1.0};
    double alpha = 0.05;
    unsigned workers = 1;

    void validate() const;
};

struct DLResult {
    Vector w_hat;       // raw-column scale
    Vector omega_diag;  // Var(w_hat_j) / sigma^2
    double sigma_hat = 0.0;
    Vector p_values;  // two-sided
    Vector ci_lower;
    Vector ci_upper;
    Vector z_scores;  // w_hat / (sigma_hat * sqrt(omega_diag))
    double alpha = 0.05;
    LassoFit lasso;   // main regression on the standardized response
    bool all_converged = true;
};

DLResult desparsified_lasso(const StandardizedDesign& design, const Vector& response, const DlConfig& config);
DLResult desparsified_lasso(const Matrix& design, const Vector& response, const DlConfig& config);

// sqrt(||residual||^2 / (n - df)); DegenerateDf when n <= df.
double estimate_noise_std(const Vector& residual, Index df);

// sign * Phi^{-1}(1 - p / 2), p floored at 1e-300. sign is reduced to -1/0/+1.
double pvalue_to_signed_z(double p_value, double sign);
Vector pvalue_to_signed_z(const Vector& p_values, const Vector& signs);

}  // namespace ecdl

#pragma once

// L1-penalized least squares, (1/2n)||y - Xw||^2 + lambda ||w||_1, solved by
// cyclic coordinate descent with a duality-gap stopping rule.

#include <cstdint>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace ecdl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Centered design whose columns have Euclidean norm sqrt(n), plus the affine
// map back to the raw columns.
struct StandardizedDesign {
    Matrix values;
    Vector column_means;
    Vector column_scales;

    Index n() const { return values.rows(); }
    Index p() const { return values.cols(); }

    // Coefficients on the standardized columns -> coefficients on raw columns.
    Vector to_original_scale(const Vector& standardized) const;
    // Intercept of the raw-scale model given raw-scale coefficients.
    double original_intercept(double response_mean, const Vector& original) const;
};

// Throws ConstantColumn(j) for a zero-variance column, DimensionError if n < 2.
StandardizedDesign standardize(const Matrix& raw);

struct FixedLambda {
    double value = 0.0;
};

// lambda = kappa * sqrt(2 log(p) / n)
struct UniversalLambda {
    double kappa = 1.0;
};

using LambdaRule = std::variant<FixedLambda, UniversalLambda>;

// p is real-valued so the rule can be evaluated at non-integer dimensions.
double universal_lambda(double n, double p, double kappa);
double resolve_lambda(const LambdaRule& rule, Index n, Index p);

struct SolverConfig {
    // Relative duality gap: gap / (||y - mean(y)||^2 / 2n).
    double tolerance = 1e-6;
    int max_iterations = 10000;
    LambdaRule lambda_rule = UniversalLambda{1.0};
    // Kept for config round trips; coordinate order is cyclic and needs no RNG.
    std::uint64_t random_seed = 0;
    // Fill LassoFit::objective_history with the objective after every sweep.
    bool record_objective = false;
    // Callers that see converged == false throw NotConverged instead of
    // accepting the best iterate.
    bool strict = false;

    void validate() const;
};

struct LassoFit {
    Vector coefficients;  // standardized scale
    double intercept = 0.0;  // raw scale
    double lambda = 0.0;
    int n_iterations = 0;
    bool converged = false;
    double dual_gap = 0.0;  // relative, same units as SolverConfig::tolerance
    // lambda == 0: the gap certificate does not exist, so convergence is
    // judged by stationarity max_j |x_j^T r| / (n * rms(y)) instead.
    bool zero_lambda = false;
    std::vector<double> objective_history;

    Index active_count() const;
};

LassoFit fit_lasso(const StandardizedDesign& design, const Vector& response, const SolverConfig& config);

// Objective on a standardized design with a centered response.
double lasso_objective(const Matrix& x, const Vector& centered_response, const Vector& coefficients,
                       double lambda);

namespace detail {

struct DescentResult {
    Vector coefficients;
    double lambda = 0.0;
    int iterations = 0;
    bool converged = false;
    double relative_gap = 0.0;
    std::vector<double> objective_history;
};

// Core solver. Columns of x must have squared norm n and `centered_response`
// mean zero. Column `excluded` (if >= 0) is held at zero and left out of the
// dual-norm computation, which lets nodewise regressions reuse the full design
// without copying it.
DescentResult coordinate_descent(const Matrix& x, const Vector& centered_response, double lambda,
                                 const SolverConfig& config, Index excluded = -1);

}  // namespace detail

}  // namespace ecdl

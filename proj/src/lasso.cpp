#include "ecdl/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ecdl/error.hpp"

namespace ecdl {

Vector StandardizedDesign::to_original_scale(const Vector& standardized) const {
    require(standardized.size() == p(), ErrorCode::DimensionError, "coefficient length != p");
    return standardized.cwiseQuotient(column_scales);
}

double StandardizedDesign::original_intercept(double response_mean, const Vector& original) const {
    return response_mean - column_means.dot(original);
}

StandardizedDesign standardize(const Matrix& raw) {
    const Index n = raw.rows();
    const Index p = raw.cols();
    require(n >= 2, ErrorCode::DimensionError, "standardize needs n >= 2, got " + std::to_string(n));
    require(p >= 1, ErrorCode::DimensionError, "standardize needs p >= 1");

    StandardizedDesign out;
    out.values.resize(n, p);
    out.column_means.resize(p);
    out.column_scales.resize(p);
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    for (Index j = 0; j < p; ++j) {
        const double mean = raw.col(j).mean();
        out.values.col(j) = raw.col(j).array() - mean;
        const double scale = out.values.col(j).norm() / sqrt_n;
        if (!(scale > 1e-12 * (1.0 + std::abs(mean)))) {
            throw Error(ErrorCode::ConstantColumn, "column " + std::to_string(j) + " has zero variance",
                        static_cast<std::size_t>(j));
        }
        out.values.col(j) /= scale;
        out.column_means[j] = mean;
        out.column_scales[j] = scale;
    }
    return out;
}

double universal_lambda(double n, double p, double kappa) {
    require(n >= 1.0 && p >= 2.0, ErrorCode::DimensionError, "universal_lambda needs n >= 1 and p >= 2");
    require(kappa > 0.0, ErrorCode::InvalidArgument, "kappa must be > 0");
    return kappa * std::sqrt(2.0 * std::log(p) / n);
}

double resolve_lambda(const LambdaRule& rule, Index n, Index p) {
    if (const auto* fixed = std::get_if<FixedLambda>(&rule)) {
        require(fixed->value >= 0.0, ErrorCode::InvalidArgument, "lambda must be >= 0");
        return fixed->value;
    }
    return universal_lambda(static_cast<double>(n), static_cast<double>(std::max<Index>(p, 2)),
                           std::get<UniversalLambda>(rule).kappa);
}

void SolverConfig::validate() const {
    require(tolerance > 0.0, ErrorCode::InvalidArgument, "tolerance must be > 0");
    require(max_iterations >= 1, ErrorCode::InvalidArgument, "max_iterations must be >= 1");
}

Index LassoFit::active_count() const { return (coefficients.array() != 0.0).count(); }

double lasso_objective(const Matrix& x, const Vector& centered_response, const Vector& coefficients,
                       double lambda) {
    const double n = static_cast<double>(x.rows());
    return (centered_response - x * coefficients).squaredNorm() / (2.0 * n) + lambda * coefficients.lpNorm<1>();
}

namespace detail {

namespace {

inline double soft_threshold(double value, double threshold) {
    if (value > threshold) return value - threshold;
    if (value < -threshold) return value + threshold;
    return 0.0;
}

struct DescentState {
    const Matrix& x;
    const Vector& y;
    double lambda;
    Index excluded;
    double n;
    Vector w;
    Vector r;
    double l1 = 0.0;

    // One coordinate update; returns |delta w_j|.
    double update(Index j) {
        const double old = w[j];
        const double target = old + x.col(j).dot(r) / n;
        const double fresh = soft_threshold(target, lambda);
        if (fresh == old) return 0.0;
        r.noalias() -= (fresh - old) * x.col(j);
        w[j] = fresh;
        return std::abs(fresh - old);
    }

    double objective() const { return r.squaredNorm() / (2.0 * n) + lambda * w.lpNorm<1>(); }
};

}  // namespace

DescentResult coordinate_descent(const Matrix& x, const Vector& centered_response, double lambda,
                                 const SolverConfig& config, Index excluded) {
    config.validate();
    const Index n = x.rows();
    const Index p = x.cols();
    require(centered_response.size() == n, ErrorCode::DimensionError, "response length != n");
    require(lambda >= 0.0, ErrorCode::InvalidArgument, "lambda must be >= 0");

    DescentState state{x, centered_response, lambda, excluded, static_cast<double>(n),
                       Vector::Zero(p), centered_response};
    DescentResult out;
    out.lambda = lambda;

    const double null_objective = centered_response.squaredNorm() / (2.0 * state.n);
    if (null_objective == 0.0 || p == 0 || (p == 1 && excluded == 0)) {
        out.coefficients = std::move(state.w);
        out.converged = true;
        return out;
    }

    auto relative_gap = [&]() {
        Vector grad = x.transpose() * state.r;
        if (excluded >= 0) grad[excluded] = 0.0;
        const double dual_norm = grad.lpNorm<Eigen::Infinity>();
        if (lambda == 0.0) {
            return dual_norm / state.n / std::sqrt(2.0 * null_objective);
        }
        const double alpha = lambda * state.n;
        const double s = dual_norm > alpha ? alpha / dual_norm : 1.0;
        const double r_sq = state.r.squaredNorm();
        const double gap = 0.5 * r_sq * (1.0 + s * s) + alpha * state.w.lpNorm<1>() - s * state.r.dot(centered_response);
        return std::max(0.0, gap / state.n) / null_objective;
    };

    auto record = [&]() {
        if (config.record_objective) out.objective_history.push_back(state.objective());
    };

    std::vector<Index> active;
    int sweeps = 0;
    while (sweeps < config.max_iterations) {
        // Full pass over every coordinate.
        for (Index j = 0; j < p; ++j) {
            if (j != excluded) state.update(j);
        }
        ++sweeps;
        record();

        out.relative_gap = relative_gap();
        if (out.relative_gap <= config.tolerance) {
            out.converged = true;
            break;
        }

        active.clear();
        for (Index j = 0; j < p; ++j) {
            if (state.w[j] != 0.0) active.push_back(j);
        }
        // Passes restricted to the active set until it stalls.
        double previous = state.objective();
        while (sweeps < config.max_iterations && !active.empty()) {
            for (const Index j : active) state.update(j);
            ++sweeps;
            record();
            const double current = state.objective();
            if (previous - current <= 0.1 * config.tolerance * null_objective) break;
            previous = current;
        }
    }

    out.iterations = sweeps;
    out.coefficients = std::move(state.w);
    return out;
}

}  // namespace detail

LassoFit fit_lasso(const StandardizedDesign& design, const Vector& response, const SolverConfig& config) {
    require(response.size() == design.n(), ErrorCode::DimensionError, "response length != n");
    const double lambda = resolve_lambda(config.lambda_rule, design.n(), design.p());
    const double mean = response.mean();
    const Vector centered = response.array() - mean;

    auto result = detail::coordinate_descent(design.values, centered, lambda, config);

    LassoFit fit;
    fit.lambda = lambda;
    fit.n_iterations = result.iterations;
    fit.converged = result.converged;
    fit.dual_gap = result.relative_gap;
    fit.zero_lambda = lambda == 0.0;
    fit.objective_history = std::move(result.objective_history);
    fit.coefficients = std::move(result.coefficients);
    fit.intercept = design.original_intercept(mean, design.to_original_scale(fit.coefficients));
    return fit;
}

}  // namespace ecdl

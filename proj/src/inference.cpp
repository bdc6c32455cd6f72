#include "ecdl/inference.hpp"

#include <cmath>
#include <string>

#include "ecdl/error.hpp"
#include "ecdl/normal.hpp"
#include "ecdl/parallel.hpp"

namespace ecdl {

namespace {

constexpr int kMaxNoiseRounds = 50;

// Universal levels are in units of the regression's noise, which is unknown:
// alternate the fit with the noise estimate ||r|| / sqrt(n) until they agree,
// starting from the response RMS (scaled lasso).
detail::DescentResult scaled_descent(const Matrix& x, const Vector& response, double base, const SolverConfig& config,
                                     Index excluded = -1) {
    const double nd = static_cast<double>(x.rows());
    double noise = response.norm() / std::sqrt(nd);
    for (int round = 0;; ++round) {
        auto fit = detail::coordinate_descent(x, response, base * noise, config, excluded);
        const double next = (response - x * fit.coefficients).norm() / std::sqrt(nd);
        if (round == kMaxNoiseRounds || next < 1e-8 || std::abs(next - noise) <= 1e-4 * noise) {
            fit.lambda = base * noise;
            return fit;
        }
        noise = next;
    }
}

}  // namespace

NodewiseFit nodewise_lasso(const StandardizedDesign& design, Index j, const SolverConfig& config) {
    const Index n = design.n();
    const Index p = design.p();
    require(p >= 2, ErrorCode::DimensionError, "nodewise regression needs p >= 2");
    require(j >= 0 && j < p, ErrorCode::DimensionError, "feature index out of range");

    const Vector target = design.values.col(j);
    detail::DescentResult fit;
    if (std::holds_alternative<UniversalLambda>(config.lambda_rule)) {
        fit = scaled_descent(design.values, target, resolve_lambda(config.lambda_rule, n, p), config, j);
    } else {
        fit = detail::coordinate_descent(design.values, target, resolve_lambda(config.lambda_rule, n, p), config, j);
    }

    NodewiseFit out;
    out.target_index = j;
    out.converged = fit.converged;
    out.gamma.resize(p - 1);
    out.gamma.head(j) = fit.coefficients.head(j);
    out.gamma.tail(p - 1 - j) = fit.coefficients.tail(p - 1 - j);
    out.residual = target - design.values * fit.coefficients;
    out.tau_sq = out.residual.dot(target) / static_cast<double>(n);
    if (!(out.tau_sq > 1e-12)) {
        throw Error(ErrorCode::DegenerateResidual,
                    "nodewise residual of feature " + std::to_string(j) + " is orthogonal to its column",
                    static_cast<std::size_t>(j));
    }
    if (config.strict && !fit.converged) {
        throw Error(ErrorCode::NotConverged,
                    "nodewise regression " + std::to_string(j) + " stopped at relative gap " +
                        std::to_string(fit.relative_gap),
                    static_cast<std::size_t>(j));
    }
    return out;
}

void DlConfig::validate() const {
    solver.validate();
    require(alpha > 0.0 && alpha < 1.0, ErrorCode::InvalidArgument, "alpha must be in (0, 1)");
}

double estimate_noise_std(const Vector& residual, Index df) {
    const Index n = residual.size();
    if (df < 0 || n - df < 1) {
        throw Error(ErrorCode::DegenerateDf,
                    "n - df must be >= 1 (n=" + std::to_string(n) + ", df=" + std::to_string(df) + ")");
    }
    return std::sqrt(residual.squaredNorm() / static_cast<double>(n - df));
}

double pvalue_to_signed_z(double p_value, double sign) {
    if (sign == 0.0 || std::isnan(sign)) return 0.0;
    const double p = std::min(1.0, std::max(kPValueFloor, p_value));
    if (p >= 1.0) return 0.0;
    const double magnitude = normal_upper_quantile(p / 2.0);
    return sign > 0.0 ? magnitude : -magnitude;
}

Vector pvalue_to_signed_z(const Vector& p_values, const Vector& signs) {
    require(p_values.size() == signs.size(), ErrorCode::DimensionError, "p-values and signs differ in length");
    Vector out(p_values.size());
    for (Index j = 0; j < p_values.size(); ++j) out[j] = pvalue_to_signed_z(p_values[j], signs[j]);
    return out;
}

DLResult desparsified_lasso(const StandardizedDesign& design, const Vector& response, const DlConfig& config) {
    config.validate();
    const Index n = design.n();
    const Index p = design.p();
    require(n >= 4, ErrorCode::DimensionError, "desparsified lasso needs n >= 4");
    require(p >= 1, ErrorCode::DimensionError, "desparsified lasso needs p >= 1");
    require(response.size() == n, ErrorCode::DimensionError, "response length != n");

    const double nd = static_cast<double>(n);
    const double mean = response.mean();
    const Vector centered = response.array() - mean;
    const double response_scale = centered.norm() / std::sqrt(nd);
    require(response_scale > 0.0, ErrorCode::InvalidArgument, "response is constant");


    // Main regression on y / rms(y).
    const Vector unit_response = centered / response_scale;
    // With one feature there are no others to regress on: the nodewise residual
    // is the column itself and the debiased estimate is least squares for any
    // lambda, so the main fit is run unpenalized.
    double lambda = 0.0;
    detail::DescentResult main;
    if (p > 1 && std::holds_alternative<UniversalLambda>(config.solver.lambda_rule)) {
        main = scaled_descent(design.values, unit_response, resolve_lambda(config.solver.lambda_rule, n, p),
                              config.solver);
        lambda = main.lambda;
    } else {
        lambda = p == 1 ? 0.0 : resolve_lambda(config.solver.lambda_rule, n, p);
        main = detail::coordinate_descent(design.values, unit_response, lambda, config.solver);
    }
    if (config.solver.strict && !main.converged) {
        throw Error(ErrorCode::NotConverged,
                    "main lasso stopped at relative gap " + std::to_string(main.relative_gap));
    }
    const Vector residual = unit_response - design.values * main.coefficients;

    SolverConfig nodewise_config = config.solver;
    nodewise_config.lambda_rule = config.nodewise_lambda;
    nodewise_config.record_objective = false;

    Vector debiased(p), omega(p);
    std::vector<char> converged(static_cast<std::size_t>(p), 1);
    parallel_for(static_cast<std::size_t>(p), config.workers, [&](std::size_t k) {
        const auto j = static_cast<Index>(k);
        NodewiseFit node;
        if (p == 1) {
            node.residual = design.values.col(0);
            node.converged = true;
        } else {
            node = nodewise_lasso(design, j, nodewise_config);
        }
        const double projection = node.residual.dot(design.values.col(j));
        debiased[j] = main.coefficients[j] + node.residual.dot(residual) / projection;
        omega[j] = node.residual.squaredNorm() / (projection * projection);
        converged[k] = node.converged ? 1 : 0;
    });

    DLResult out;
    out.alpha = config.alpha;
    out.all_converged = main.converged;
    for (char c : converged) out.all_converged = out.all_converged && c != 0;

    const Index df = (main.coefficients.array() != 0.0).count();
    out.sigma_hat = response_scale * estimate_noise_std(residual, df);

    out.w_hat = (response_scale * debiased).cwiseQuotient(design.column_scales);
    out.omega_diag = omega.cwiseQuotient(design.column_scales.cwiseAbs2());

    const double quantile = normal_upper_quantile(config.alpha / 2.0);
    out.z_scores.resize(p);
    out.p_values.resize(p);
    out.ci_lower.resize(p);
    out.ci_upper.resize(p);
    for (Index j = 0; j < p; ++j) {
        const double se = out.sigma_hat * std::sqrt(out.omega_diag[j]);
        out.z_scores[j] = out.w_hat[j] / se;
        out.p_values[j] = two_sided_pvalue(out.z_scores[j]);
        out.ci_lower[j] = out.w_hat[j] - quantile * se;
        out.ci_upper[j] = out.w_hat[j] + quantile * se;
    }

    out.lasso.lambda = lambda;
    out.lasso.n_iterations = main.iterations;
    out.lasso.converged = main.converged;
    out.lasso.dual_gap = main.relative_gap;
    out.lasso.zero_lambda = lambda == 0.0;
    out.lasso.coefficients = std::move(main.coefficients);
    out.lasso.intercept =
        design.original_intercept(mean, response_scale * design.to_original_scale(out.lasso.coefficients));
    return out;
}

DLResult desparsified_lasso(const Matrix& design, const Vector& response, const DlConfig& config) {
    return desparsified_lasso(standardize(design), response, config);
}

}  // namespace ecdl

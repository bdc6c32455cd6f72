#include "ecdl/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "ecdl/clustering.hpp"
#include "ecdl/error.hpp"

namespace ecdl {

namespace {

void spec_check(bool condition, const std::string& message) { require(condition, ErrorCode::SpecError, message); }

Vector draw_noise(std::mt19937_64& rng, Index n) {
    std::normal_distribution<double> normal;
    Vector eps(n);
    for (Index i = 0; i < n; ++i) eps[i] = normal(rng);
    return eps;
}

// Shared tail of both generators: noise, sigma calibration, response, SNR.
void finish_instance(SimulatedInstance& sim, std::mt19937_64& rng, double sigma_star,
                     const std::optional<double>& target_snr) {
    auto& model = sim.model;
    auto& truth = sim.truth;
    model.noise = draw_noise(rng, model.design.rows());
    if (target_snr) sigma_star = calibrate_sigma(model.design, truth.w_star, *target_snr);
    truth.sigma_star = sigma_star;
    const Vector signal = model.design * truth.w_star;
    model.response = signal + sigma_star * model.noise;
    if (sigma_star == 0.0 || model.noise.squaredNorm() == 0.0) {
        truth.realized_snr = signal.squaredNorm() == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
        truth.realized_snr = compute_snr(model.design, truth.w_star, sigma_star, model.noise);
    }
    for (Index j = 0; j < truth.w_star.size(); ++j) {
        if (truth.w_star[j] != 0.0) truth.support.push_back(j);
    }
}

// Index into [0, len) under half-sample symmetric reflection.
inline Index reflect(Index i, Index len) {
    const Index period = 2 * len;
    i %= period;
    if (i < 0) i += period;
    return i < len ? i : period - 1 - i;
}

}  // namespace

void Sim1DSpec::validate() const {
    spec_check(n >= 1, "n must be >= 1");
    spec_check(p >= 1, "p must be >= 1");
    spec_check(rho >= 0.0 && rho < 1.0, "rho must be in [0, 1)");
    spec_check(support_size >= 0 && support_size <= p, "support_size must be in [0, p]");
    spec_check(sigma_star >= 0.0, "sigma_star must be >= 0");
    spec_check(!target_snr || *target_snr > 0.0, "target_snr must be > 0");
}

void Sim3DSpec::validate() const {
    spec_check(edge_length >= 1, "edge_length must be >= 1");
    spec_check(n >= 1, "n must be >= 1");
    spec_check(roi_width >= 1, "roi_width must be >= 1");
    spec_check(5 * roi_width * roi_width * roi_width <= p(), "five ROIs of width h must fit: 5 h^3 <= H^3");
    spec_check(roi_width <= edge_length, "roi_width must be <= edge_length");
    spec_check(sigma_smooth >= 0.0, "sigma_smooth must be >= 0");
    spec_check(sigma_star >= 0.0, "sigma_star must be >= 0");
    spec_check(neutral_margin >= 0, "neutral_margin must be >= 0");
    spec_check(!target_snr || *target_snr > 0.0, "target_snr must be > 0");
}

SimulatedInstance generate_1d(const Sim1DSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal;

    SimulatedInstance sim;
    sim.truth.shape = {spec.p};
    auto& x = sim.model.design;
    x.resize(spec.n, spec.p);
    const double innovation = std::sqrt(1.0 - spec.rho * spec.rho);
    for (Index i = 0; i < spec.n; ++i) {
        double previous = normal(rng);
        x(i, 0) = previous;
        for (Index j = 1; j < spec.p; ++j) {
            previous = spec.rho * previous + innovation * normal(rng);
            x(i, j) = previous;
        }
    }

    sim.truth.w_star = Vector::Zero(spec.p);
    sim.truth.w_star.head(spec.support_size).setConstant(spec.weight);
    finish_instance(sim, rng, spec.sigma_star, spec.target_snr);
    return sim;
}

std::vector<Index> roi_support(Index edge_length, Index roi_width) {
    const Index h = roi_width;
    const Index far = edge_length - h;
    const Index mid = (edge_length - h) / 2;
    const std::array<std::array<Index, 3>, 5> origins{{{0, 0, 0}, {0, far, far}, {far, 0, far}, {far, far, 0},
                                                        {mid, mid, mid}}};
    const std::array<Index, 3> shape{edge_length, edge_length, edge_length};
    std::vector<Index> support;
    for (const auto& origin : origins) {
        for (Index a = 0; a < h; ++a)
            for (Index b = 0; b < h; ++b)
                for (Index c = 0; c < h; ++c) {
                    const std::array<Index, 3> coords{origin[0] + a, origin[1] + b, origin[2] + c};
                    support.push_back(flatten_index(shape, coords));
                }
    }
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
    return support;
}

std::vector<char> neutral_region(std::span<const Index> shape, std::span<const Index> support, Index margin) {
    Index p = 1;
    for (const Index extent : shape) p *= extent;
    std::vector<char> in_support(static_cast<std::size_t>(p), 0);
    for (const Index j : support) in_support[j] = 1;

    // Separable max filter, one axis at a time.
    std::vector<char> dilated = in_support;
    std::vector<char> scratch(dilated.size());
    Index stride = 1;
    for (std::size_t d = shape.size(); d-- > 0;) {
        const Index extent = shape[d];
        for (Index flat = 0; flat < p; ++flat) {
            const Index coord = (flat / stride) % extent;
            char hit = 0;
            for (Index k = std::max<Index>(0, coord - margin); k <= std::min(extent - 1, coord + margin) && !hit; ++k) {
                hit = dilated[flat + (k - coord) * stride];
            }
            scratch[flat] = hit;
        }
        dilated.swap(scratch);
        stride *= extent;
    }
    for (Index j = 0; j < p; ++j) dilated[j] = dilated[j] && !in_support[j];
    return dilated;
}

void gaussian_filter_3d(std::span<double> volume, Index edge_length, double sigma) {
    const Index len = edge_length;
    require(static_cast<Index>(volume.size()) == len * len * len, ErrorCode::DimensionError, "volume is not H^3");
    if (sigma <= 0.0) return;

    const auto radius = static_cast<Index>(4.0 * sigma + 0.5);
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double total = 0.0;
    for (Index k = -radius; k <= radius; ++k) {
        kernel[k + radius] = std::exp(-0.5 * static_cast<double>(k * k) / (sigma * sigma));
        total += kernel[k + radius];
    }
    for (double& weight : kernel) weight /= total;

    // padded[i + radius] = line[reflect(i)] for i in [-radius, len + radius).
    std::vector<Index> source(static_cast<std::size_t>(len + 2 * radius));
    for (Index i = -radius; i < len + radius; ++i) source[i + radius] = reflect(i, len);
    std::vector<double> padded(source.size());

    const std::array<Index, 3> strides{len * len, len, 1};
    for (const Index stride : strides) {
        // Every line along this axis starts at a site whose axis coordinate is 0.
        for (Index start = 0; start < len * len * len; ++start) {
            if ((start / stride) % len != 0) continue;
            for (std::size_t i = 0; i < source.size(); ++i) padded[i] = volume[start + source[i] * stride];
            for (Index i = 0; i < len; ++i) {
                double acc = 0.0;
                for (Index k = 0; k <= 2 * radius; ++k) acc += kernel[k] * padded[i + k];
                volume[start + i * stride] = acc;
            }
        }
    }
}

SimulatedInstance generate_3d(const Sim3DSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal;
    const Index p = spec.p();

    SimulatedInstance sim;
    sim.truth.shape = {spec.edge_length, spec.edge_length, spec.edge_length};
    auto& x = sim.model.design;
    x.resize(spec.n, p);
    std::vector<double> volume(static_cast<std::size_t>(p));
    for (Index i = 0; i < spec.n; ++i) {
        for (double& v : volume) v = normal(rng);
        gaussian_filter_3d(volume, spec.edge_length, spec.sigma_smooth);
        for (Index j = 0; j < p; ++j) x(i, j) = volume[j];
    }
    if (spec.normalize_columns && spec.n >= 2) {
        for (Index j = 0; j < p; ++j) {
            const double mean = x.col(j).mean();
            const double sd = std::sqrt((x.col(j).array() - mean).square().sum() / static_cast<double>(spec.n));
            if (sd > 0.0) x.col(j) /= sd;
        }
    }

    sim.truth.w_star = Vector::Zero(p);
    for (const Index j : roi_support(spec.edge_length, spec.roi_width)) sim.truth.w_star[j] = spec.weight;
    finish_instance(sim, rng, spec.sigma_star, spec.target_snr);
    sim.truth.neutral_mask = neutral_region(sim.truth.shape, sim.truth.support, spec.neutral_margin);
    return sim;
}

double compute_snr(const Matrix& design, const Vector& w_star, double sigma_star, const Vector& noise) {
    require(design.cols() == w_star.size() && design.rows() == noise.size(), ErrorCode::DimensionError,
            "inconsistent dimensions");
    const double denominator = sigma_star * noise.norm();
    require(denominator != 0.0, ErrorCode::DegenerateNoise, "sigma * ||eps|| is zero");
    return (design * w_star).norm() / denominator;
}

double calibrate_sigma(const Matrix& design, const Vector& w_star, double target_snr) {
    require(design.cols() == w_star.size(), ErrorCode::DimensionError, "inconsistent dimensions");
    require(target_snr > 0.0, ErrorCode::InvalidArgument, "target_snr must be > 0");
    const double signal = (design * w_star).norm();
    require(signal > 0.0, ErrorCode::ZeroSignal, "X w* is zero");
    return signal / (target_snr * std::sqrt(static_cast<double>(design.rows())));
}

}  // namespace ecdl

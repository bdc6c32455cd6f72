#pragma once

// Synthetic linear-model instances y = X w* + sigma * eps with known support:
// a 1-D AR(1) design and a smoothed 3-D Gaussian-field design with cubic ROIs.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ecdl/lasso.hpp"

namespace ecdl {

struct LinearModelInstance {
    Matrix design;    // n x p
    Vector response;  // n
    Vector noise;     // eps ~ N(0, I_n), before scaling by sigma
};

struct GroundTruth {
    Vector w_star;
    std::vector<Index> support;      // sorted
    std::vector<char> neutral_mask;  // 3-D only; empty for 1-D
    double sigma_star = 0.0;
    double realized_snr = 0.0;       // +inf when sigma_star == 0
    std::vector<Index> shape;        // grid extents, row-major flattening
};

struct SimulatedInstance {
    LinearModelInstance model;
    GroundTruth truth;
};

struct Sim1DSpec {
    Index n = 100;
    Index p = 2000;
    double rho = 0.95;
    Index support_size = 50;
    double weight = 1.0;
    double sigma_star = 10.0;
    // When set, sigma_star is replaced by calibrate_sigma(X, w*, target_snr).
    std::optional<double> target_snr;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Sim3DSpec {
    Index edge_length = 50;
    Index n = 400;
    Index roi_width = 6;
    double sigma_smooth = 2.0;
    double sigma_star = 8.0;
    std::optional<double> target_snr;
    Index neutral_margin = 5;
    // Rescale each column to unit empirical variance after smoothing.
    bool normalize_columns = false;
    double weight = 1.0;
    std::uint64_t seed = 0;

    Index p() const { return edge_length * edge_length * edge_length; }
    std::array<Index, 3> shape() const { return {edge_length, edge_length, edge_length}; }
    void validate() const;
};

SimulatedInstance generate_1d(const Sim1DSpec& spec);
SimulatedInstance generate_3d(const Sim3DSpec& spec);

// Flat indices of the five h-cubes: corners (0,0,0), (0,H-h,H-h),
// (H-h,0,H-h), (H-h,H-h,0) and the cube starting at floor((H-h)/2) per axis.
std::vector<Index> roi_support(Index edge_length, Index roi_width);

// L-infinity dilation of the support by `margin` voxels, minus the support.
std::vector<char> neutral_region(std::span<const Index> shape, std::span<const Index> support, Index margin);

// In-place separable Gaussian smoothing of a row-major H^3 volume, kernel
// truncated at radius round(4 sigma), reflect (half-sample symmetric) edges.
void gaussian_filter_3d(std::span<double> volume, Index edge_length, double sigma);

// ||X w*|| / (sigma ||eps||). DegenerateNoise when sigma * ||eps|| == 0.
double compute_snr(const Matrix& design, const Vector& w_star, double sigma_star, const Vector& noise);

// ||X w*|| / (target * sqrt(n)). ZeroSignal when X w* == 0.
double calibrate_sigma(const Matrix& design, const Vector& w_star, double target_snr);

}  // namespace ecdl

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "jm/matrix.hpp"

namespace jm {

struct DirectionalPoint {
    double threshold = 0.0;
    std::size_t mirror_total = 0;
    std::size_t rejection_total = 0;
    double dfdp_hat = 1.0;

    friend bool operator==(const DirectionalPoint&, const DirectionalPoint&) = default;
};

struct DirectionalResult {
    /// +1 for rows in [t, inf)^K, -1 for rows in (-inf, -t]^K, 0 otherwise.
    std::vector<int> signs;
    /// Smallest grid threshold meeting the level; empty when none does.
    std::optional<double> threshold;
    /// Every evaluated threshold in ascending order, up to and including the stopping one.
    std::vector<DirectionalPoint> trajectory;

    friend bool operator==(const DirectionalResult&, const DirectionalResult&) = default;
};

/// Sorted distinct positive values of min_k |z_k| over rows whose entries are all
/// nonzero and share one sign.
std::vector<double> default_threshold_grid(const Matrix& z);

/// Sign assignment for z-value vectors with rejection cubes [t, inf)^K and
/// (-inf, -t]^K. Scans the strictly increasing, positive `grid` from small to large
/// thresholds and stops at the first with estimated directional FDP <= q.
///
/// Throws ConfigError for q outside (0,1) or an empty, non-positive or non-increasing
/// grid, and InputError for non-finite z-values.
DirectionalResult run_directional(const Matrix& z, double q, std::span<const double> grid);

/// As above with default_threshold_grid(z).
DirectionalResult run_directional(const Matrix& z, double q);

}  // namespace jm

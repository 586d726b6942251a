// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

// Location calculation kernel: contour maps from measurement reports, peak
// search, grid maximum-likelihood position estimates, search boundaries and
// work partitioning. Everything here is a pure function of its inputs except
// SequentialEstimator, which owns its report window.

#ifndef HELPS_LCS_HPP
#define HELPS_LCS_HPP

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "helps/sme.hpp"

namespace helps {

class LcsError : public std::runtime_error {
public:
    enum class Kind { no_valid_reports, fully_masked, insufficient_reports, not_positive_definite, no_rescuers };
    LcsError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

inline constexpr double kOutdoorCellM = 5.0;
inline constexpr double kIndoorCellM = 1.0;
inline constexpr int kIdwNeighbors = 8;
inline constexpr double kIdwPower = 2.0;

/// Area covered by a contour map: an outdoor rectangle or one building floor.
struct MapRegion {
    Rect rect;
    std::optional<int> building;
    int floor = 0;

    friend bool operator==(const MapRegion&, const MapRegion&) = default;

    static MapRegion outdoor(const Rect& r) { return {r, std::nullopt, 0}; }
    static MapRegion indoor(const Scenario& scenario, int building, int floor);
    bool indoor() const { return building.has_value(); }
    /// True when the report was measured inside this region.
    bool covers(const MeasurementReport& report) const;
};

struct Peak {
    int row = 0;
    int col = 0;
    double value_dbm = 0.0;
    Vec2 xy;

    friend bool operator==(const Peak&, const Peak&) = default;
};

struct ContourMap {
    MapRegion region;
    double cell_m = kOutdoorCellM;
    int rows = 0;
    int cols = 0;
    std::vector<double> values;        // row-major; meaningless where !filled
    std::vector<std::uint8_t> filled;  // 0 marks a masked cell
    std::optional<Peak> peak;
    std::uint64_t generation = 0;

    friend bool operator==(const ContourMap&, const ContourMap&) = default;

    Vec2 cell_center(int row, int col) const {
        return {region.rect.x0 + (col + 0.5) * cell_m, region.rect.y0 + (row + 0.5) * cell_m};
    }
    std::optional<double> at(int row, int col) const {
        const auto i = static_cast<std::size_t>(row * cols + col);
        if (!filled[i]) return std::nullopt;
        return values[i];
    }
};

/// Inverse-distance-weighted RSSI map over a region from the valid omni
/// reports measured inside it. Throws LcsError(no_valid_reports).
ContourMap interpolate_idw(std::span<const MeasurementReport> reports, const MapRegion& region, double cell_m);

/// Highest unmasked cell, ties to the lowest (row, col). Throws LcsError(fully_masked).
Peak find_peak(const ContourMap& map);

/// Writes "row,col,x,y,rssi_dbm" rows; masked cells have an empty value.
void write_contour_csv(std::ostream& out, const ContourMap& map);

/// Symmetric 2x2 covariance in m^2.
struct Cov2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    friend bool operator==(const Cov2&, const Cov2&) = default;
};

struct Eigen2 {
    double major = 0.0;  // larger eigenvalue
    double minor = 0.0;
    double angle_rad = 0.0;  // direction of the major axis
};
Eigen2 eigen_decompose(const Cov2& cov);
Cov2 compose_cov(double major, double minor, double angle_rad);

struct PositionEstimate {
    Vec2 xy;
    Cov2 cov;
    std::optional<int> floor_index;
    int n_reports_used = 0;
    double timestamp_s = 0.0;
    bool degenerate = false;  // geometry left one axis unobservable

    friend bool operator==(const PositionEstimate&, const PositionEstimate&) = default;
};

struct EstimatorParams {
    double cell_m = kOutdoorCellM;
    double residual_sigma_db = 4.0;
    double min_separation_m = 1.0;
    double collinear_band_m = 1.0;
};

/// Negative log-likelihood of a candidate position with the received-power
/// offset profiled out. Reports are used as given (no validity filtering).
double profiled_nll(std::span<const MeasurementReport> reports, Vec2 candidate, const RfParams& rf,
                    double residual_sigma_db);

/// Grid maximum-likelihood position over `area` with quadratic refinement and a
/// Laplace covariance. Throws LcsError(insufficient_reports).
PositionEstimate estimate_position(std::span<const MeasurementReport> reports, const Rect& area, const RfParams& rf,
                                   const EstimatorParams& params = {});

/// Sliding-window wrapper: keeps the latest valid omni reports and re-solves
/// at most once per interval.
class SequentialEstimator {
public:
    SequentialEstimator(Rect area, RfParams rf, EstimatorParams params = {}, std::size_t window = 200,
                        double interval_s = 1.0);

    void add(const MeasurementReport& report);
    /// Re-solves when the interval elapsed and enough reports exist; returns
    /// true when a new estimate was produced.
    bool update(double now_s);
    const std::optional<PositionEstimate>& estimate() const { return estimate_; }
    std::size_t size() const { return window_.size(); }

private:
    Rect area_;
    RfParams rf_;
    EstimatorParams params_;
    std::size_t capacity_;
    double interval_s_;
    std::deque<MeasurementReport> window_;
    std::optional<double> last_solve_s_;
    std::optional<PositionEstimate> estimate_;
};

struct SearchBoundary {
    Vec2 center;
    double semi_major_m = 0.0;
    double semi_minor_m = 0.0;
    double orientation_rad = 0.0;
    Rect bounding_rect;

    friend bool operator==(const SearchBoundary&, const SearchBoundary&) = default;

    double ellipse_area() const { return kPi * semi_major_m * semi_minor_m; }
};

/// 3-sigma ellipse of the estimate. Throws LcsError(not_positive_definite).
SearchBoundary derive_boundary(const PositionEstimate& estimate);
/// Circular boundary of the given 3-sigma radius.
SearchBoundary circular_boundary(Vec2 center, double radius_m);

/// Search area after shrinking a circular boundary from r_old to r_new.
double area_ratio(double r_new_m, double r_old_m);

enum class PlanPhase { building, floor_room };

struct RescuerAssignment {
    std::string rescuer_id;
    Rect partition;           // building phase strip
    std::vector<int> floors;  // floor phase, in visiting order
    std::vector<Polyline> routes;  // one route per strip or per assigned floor

    friend bool operator==(const RescuerAssignment&, const RescuerAssignment&) = default;
};

struct SearchPlan {
    PlanPhase phase = PlanPhase::building;
    std::vector<RescuerAssignment> assignments;
    std::uint64_t revision = 0;

    friend bool operator==(const SearchPlan&, const SearchPlan&) = default;
};

struct PlanRescuer {
    std::string id;
    Vec2 position;
};

/// Splits the rectangle into equal-width vertical strips (one per rescuer,
/// west to east by rescuer position) and routes a boustrophedon sweep over
/// each strip, snapping lanes and connectors to roads when they are close.
/// Throws LcsError(no_rescuers).
SearchPlan plan_building_search(const Rect& area, std::span<const PlanRescuer> rescuers,
                                std::span<const Polyline> roads, double lane_spacing_m);

/// Deals floors round-robin from floor 0. Each floor route is the corridor;
/// directions alternate so every floor starts where the previous one ended.
/// Throws LcsError(no_rescuers).
SearchPlan plan_floor_search(const Building& building, std::span<const PlanRescuer> rescuers);

}  // namespace helps

#endif  // HELPS_LCS_HPP

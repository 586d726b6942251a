// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "helps/lcs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <tuple>

namespace helps {

// ---------------------------------------------------------------------------
// Contour maps

MapRegion MapRegion::indoor(const Scenario& scenario, int building, int floor) {
    return {scenario.buildings.at(static_cast<std::size_t>(building)).footprint, building, floor};
}

bool MapRegion::covers(const MeasurementReport& report) const {
    if (!building) return !report.pose.indoor() && rect.contains(report.pose.xy());
    return report.pose.building_index == building && report.pose.floor_index.value_or(0) == floor;
}

namespace {

struct Sample {
    double x;
    double y;
    double v;
};

/// Uniform bucket grid for k-nearest-neighbor queries over a fixed point set.
class BucketGrid {
public:
    BucketGrid(const std::vector<Sample>& pts, Rect bounds, double bucket_m) : pts_(pts), bucket_(bucket_m) {
        for (const Sample& p : pts) {
            bounds.x0 = std::min(bounds.x0, p.x);
            bounds.y0 = std::min(bounds.y0, p.y);
            bounds.x1 = std::max(bounds.x1, p.x);
            bounds.y1 = std::max(bounds.y1, p.y);
        }
        origin_ = {bounds.x0, bounds.y0};
        nx_ = static_cast<int>(std::floor(bounds.width() / bucket_)) + 1;
        ny_ = static_cast<int>(std::floor(bounds.height() / bucket_)) + 1;
        start_.assign(static_cast<std::size_t>(nx_ * ny_) + 1, 0);
        std::vector<int> bucket_of(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            bucket_of[i] = index(bx(pts[i].x), by(pts[i].y));
            ++start_[static_cast<std::size_t>(bucket_of[i]) + 1];
        }
        for (std::size_t b = 1; b < start_.size(); ++b) start_[b] += start_[b - 1];
        items_.resize(pts.size());
        std::vector<int> fill(start_.begin(), start_.end() - 1);
        // Points stay in canonical order inside each bucket.
        for (std::size_t i = 0; i < pts.size(); ++i) items_[static_cast<std::size_t>(fill[bucket_of[i]]++)] = static_cast<int>(i);
    }

    /// Fills (squared distance, index) of up to k nearest points, ascending,
    /// ties to the lower index. Stops early when nothing lies within max_range.
    int nearest(Vec2 q, int k, double max_range, std::array<std::pair<double, int>, kIdwNeighbors>& out) const {
        int count = 0;
        const int cx = bx(q.x);
        const int cy = by(q.y);
        const int max_ring = std::max({cx, nx_ - 1 - cx, cy, ny_ - 1 - cy});
        const auto consider = [&](int idx) {
            const double dx = pts_[static_cast<std::size_t>(idx)].x - q.x;
            const double dy = pts_[static_cast<std::size_t>(idx)].y - q.y;
            const std::pair<double, int> cand{dx * dx + dy * dy, idx};
            if (count == k && !(cand < out[static_cast<std::size_t>(k - 1)])) return;
            int pos = count < k ? count++ : k - 1;
            while (pos > 0 && cand < out[static_cast<std::size_t>(pos - 1)]) {
                out[static_cast<std::size_t>(pos)] = out[static_cast<std::size_t>(pos - 1)];
                --pos;
            }
            out[static_cast<std::size_t>(pos)] = cand;
        };
        for (int ring = 0; ring <= max_ring; ++ring) {
            for (int y = cy - ring; y <= cy + ring; ++y) {
                if (y < 0 || y >= ny_) continue;
                const bool edge_row = (y == cy - ring || y == cy + ring);
                for (int x = cx - ring; x <= cx + ring; x += edge_row ? 1 : 2 * ring) {
                    if (x >= 0 && x < nx_) {
                        const int b = index(x, y);
                        for (int j = start_[static_cast<std::size_t>(b)]; j < start_[static_cast<std::size_t>(b) + 1]; ++j) {
                            consider(items_[static_cast<std::size_t>(j)]);
                        }
                    }
                    if (ring == 0) break;
                }
            }
            // Every unvisited point is at least ring * bucket away.
            const double reach = ring * bucket_;
            if (count == k && out[static_cast<std::size_t>(k - 1)].first <= reach * reach) break;
            if (reach > max_range && (count == 0 || out[0].first > max_range * max_range)) break;
        }
        return count;
    }

private:
    int bx(double x) const { return std::clamp(static_cast<int>(std::floor((x - origin_.x) / bucket_)), 0, nx_ - 1); }
    int by(double y) const { return std::clamp(static_cast<int>(std::floor((y - origin_.y) / bucket_)), 0, ny_ - 1); }
    int index(int x, int y) const { return y * nx_ + x; }

    const std::vector<Sample>& pts_;
    double bucket_;
    Vec2 origin_;
    int nx_ = 1;
    int ny_ = 1;
    std::vector<int> start_;
    std::vector<int> items_;
};

}  // namespace

ContourMap interpolate_idw(std::span<const MeasurementReport> reports, const MapRegion& region, double cell_m) {
    std::vector<Sample> pts;
    for (const MeasurementReport& r : reports) {
        if (r.mode == MeasureMode::omni && r.rssi.valid && region.covers(r)) {
            pts.push_back({r.pose.x, r.pose.y, r.rssi.value_dbm});
        }
    }
    if (pts.empty()) throw LcsError(LcsError::Kind::no_valid_reports, "interpolate_idw: no valid reports in region");
    // Canonical order makes the map independent of report arrival order.
    std::sort(pts.begin(), pts.end(),
              [](const Sample& a, const Sample& b) { return std::tie(a.x, a.y, a.v) < std::tie(b.x, b.y, b.v); });

    ContourMap map;
    map.region = region;
    map.cell_m = cell_m;
    map.cols = std::max(1, static_cast<int>(std::ceil(region.rect.width() / cell_m - 1e-9)));
    map.rows = std::max(1, static_cast<int>(std::ceil(region.rect.height() / cell_m - 1e-9)));
    const auto n_cells = static_cast<std::size_t>(map.rows * map.cols);
    map.values.assign(n_cells, 0.0);
    map.filled.assign(n_cells, 0);

    const double mask_range = 3.0 * cell_m * std::sqrt(static_cast<double>(kIdwNeighbors));
    const double exact_range = cell_m / 4.0;
    const BucketGrid grid(pts, region.rect, mask_range);
    std::array<std::pair<double, int>, kIdwNeighbors> nn{};
    for (int row = 0; row < map.rows; ++row) {
        for (int col = 0; col < map.cols; ++col) {
            const Vec2 c = map.cell_center(row, col);
            const int found = grid.nearest(c, kIdwNeighbors, mask_range, nn);
            if (found == 0 || nn[0].first > mask_range * mask_range) continue;
            const auto i = static_cast<std::size_t>(row * map.cols + col);
            map.filled[i] = 1;
            if (nn[0].first <= exact_range * exact_range) {
                map.values[i] = pts[static_cast<std::size_t>(nn[0].second)].v;
                continue;
            }
            double wsum = 0.0;
            double vsum = 0.0;
            for (int j = 0; j < found; ++j) {
                const double w = 1.0 / nn[static_cast<std::size_t>(j)].first;  // power 2 on distance
                wsum += w;
                vsum += w * pts[static_cast<std::size_t>(nn[static_cast<std::size_t>(j)].second)].v;
            }
            map.values[i] = vsum / wsum;
        }
    }
    try {
        map.peak = find_peak(map);
    } catch (const LcsError&) {
        map.peak.reset();
    }
    return map;
}

Peak find_peak(const ContourMap& map) {
    std::optional<Peak> best;
    for (int row = 0; row < map.rows; ++row) {
        for (int col = 0; col < map.cols; ++col) {
            const auto v = map.at(row, col);
            if (v && (!best || *v > best->value_dbm)) best = Peak{row, col, *v, map.cell_center(row, col)};
        }
    }
    if (!best) throw LcsError(LcsError::Kind::fully_masked, "find_peak: every cell is masked");
    return *best;
}

void write_contour_csv(std::ostream& out, const ContourMap& map) {
    out << "row,col,x,y,rssi_dbm\n";
    for (int row = 0; row < map.rows; ++row) {
        for (int col = 0; col < map.cols; ++col) {
            const Vec2 c = map.cell_center(row, col);
            out << row << ',' << col << ',' << c.x << ',' << c.y << ',';
            if (const auto v = map.at(row, col)) out << *v;
            out << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// Position estimation

Eigen2 eigen_decompose(const Cov2& cov) {
    const double mean = 0.5 * (cov.xx + cov.yy);
    const double half_diff = 0.5 * (cov.xx - cov.yy);
    const double r = std::hypot(half_diff, cov.xy);
    return {mean + r, mean - r, 0.5 * std::atan2(2.0 * cov.xy, cov.xx - cov.yy)};
}

Cov2 compose_cov(double major, double minor, double angle_rad) {
    const double c = std::cos(angle_rad);
    const double s = std::sin(angle_rad);
    return {major * c * c + minor * s * s, (major - minor) * c * s, major * s * s + minor * c * c};
}

namespace {

double exponent_for(const MeasurementReport& r, const RfParams& rf) {
    return r.pose.indoor() ? rf.path_loss_exponent_indoor : rf.path_loss_exponent_outdoor;
}

std::vector<MeasurementReport> usable_reports(std::span<const MeasurementReport> reports) {
    std::vector<MeasurementReport> out;
    for (const auto& r : reports) {
        if (r.mode == MeasureMode::omni && r.rssi.valid) out.push_back(r);
    }
    return out;
}

bool has_separated_pair(const std::vector<MeasurementReport>& reports, double min_sep) {
    const Vec2 p0 = reports.front().pose.xy();
    for (const auto& r : reports) {
        if (distance(r.pose.xy(), p0) >= min_sep) return true;
    }
    for (std::size_t i = 0; i < reports.size(); ++i) {
        for (std::size_t j = i + 1; j < reports.size(); ++j) {
            if (distance(reports[i].pose.xy(), reports[j].pose.xy()) >= min_sep) return true;
        }
    }
    return false;
}

/// Unit normal of the best-fit line through the report positions and the
/// largest distance of any report from that line.
std::pair<Vec2, double> line_spread(const std::vector<MeasurementReport>& reports) {
    Vec2 mean;
    for (const auto& r : reports) mean = mean + r.pose.xy();
    mean = mean * (1.0 / static_cast<double>(reports.size()));
    Cov2 scatter;
    for (const auto& r : reports) {
        const Vec2 d = r.pose.xy() - mean;
        scatter.xx += d.x * d.x;
        scatter.xy += d.x * d.y;
        scatter.yy += d.y * d.y;
    }
    const Eigen2 e = eigen_decompose(scatter);
    const Vec2 normal{-std::sin(e.angle_rad), std::cos(e.angle_rad)};
    double spread = 0.0;
    for (const auto& r : reports) spread = std::max(spread, std::abs((r.pose.xy() - mean).dot(normal)));
    return {normal, spread};
}

/// Least-squares quadratic a + g.x + x'Hx/2 over a 3x3 stencil, in step units.
struct QuadFit {
    double gx = 0.0;
    double gy = 0.0;
    double hxx = 0.0;
    double hxy = 0.0;
    double hyy = 0.0;

    double det() const { return hxx * hyy - hxy * hxy; }
    bool positive_definite() const { return hxx > 0.0 && det() > 0.0; }
    std::pair<double, double> newton_step() const {
        return {-(hyy * gx - hxy * gy) / det(), -(hxx * gy - hxy * gx) / det()};
    }
};

template <class F>
QuadFit quad_fit(const F& f, Vec2 c, double step) {
    double col_sum[3] = {0, 0, 0};
    double row_sum[3] = {0, 0, 0};
    double cross = 0.0;
    for (int j = -1; j <= 1; ++j) {
        for (int i = -1; i <= 1; ++i) {
            const double v = f(c + Vec2{i * step, j * step});
            col_sum[i + 1] += v;
            row_sum[j + 1] += v;
            cross += i * j * v;
        }
    }
    QuadFit q;
    q.gx = (col_sum[2] - col_sum[0]) / 6.0;
    q.gy = (row_sum[2] - row_sum[0]) / 6.0;
    q.hxx = (col_sum[2] + col_sum[0] - 2.0 * col_sum[1]) / 3.0;
    q.hyy = (row_sum[2] + row_sum[0] - 2.0 * row_sum[1]) / 3.0;
    q.hxy = cross / 4.0;
    return q;
}

}  // namespace

double profiled_nll(std::span<const MeasurementReport> reports, Vec2 candidate, const RfParams& rf,
                    double residual_sigma_db) {
    // Model: v_i = b - 10 n_i log10(d_i / d_ref). With y_i = v_i + 10 n_i log10(d_i / d_ref)
    // the least-squares offset is mean(y) and the residual sum is the spread of y.
    const double d_ref = rf.reference_distance_m;
    double sum = 0.0;
    double sum2 = 0.0;
    for (const auto& r : reports) {
        const double d = std::max(distance(r.pose.xy(), candidate), d_ref);
        const double y = r.rssi.value_dbm + 10.0 * exponent_for(r, rf) * std::log10(d / d_ref);
        sum += y;
        sum2 += y * y;
    }
    const double n = static_cast<double>(reports.size());
    const double ssr = std::max(0.0, sum2 - sum * sum / n);
    return ssr / (2.0 * residual_sigma_db * residual_sigma_db);
}

PositionEstimate estimate_position(std::span<const MeasurementReport> all_reports, const Rect& area,
                                   const RfParams& rf, const EstimatorParams& params) {
    const std::vector<MeasurementReport> reports = usable_reports(all_reports);
    if (reports.size() < 4) {
        throw LcsError(LcsError::Kind::insufficient_reports, "estimate_position: need at least 4 valid reports");
    }
    if (!has_separated_pair(reports, params.min_separation_m)) {
        throw LcsError(LcsError::Kind::insufficient_reports,
                       "estimate_position: need reports from 2 positions at least 1 m apart");
    }
    const double cell = params.cell_m;
    const int cols = std::max(1, static_cast<int>(std::ceil(area.width() / cell - 1e-9)));
    const int rows = std::max(1, static_cast<int>(std::ceil(area.height() / cell - 1e-9)));
    const auto center = [&](int row, int col) { return Vec2{area.x0 + (col + 0.5) * cell, area.y0 + (row + 0.5) * cell}; };
    const auto nll = [&](Vec2 p) { return profiled_nll(reports, p, rf, params.residual_sigma_db); };

    int best_row = 0;
    int best_col = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int row = 0; row < rows; ++row) {
        for (int col = 0; col < cols; ++col) {
            const double v = nll(center(row, col));
            if (v < best) {
                best = v;
                best_row = row;
                best_col = col;
            }
        }
    }
    const Vec2 c0 = center(best_row, best_col);

    // A narrow or curved likelihood valley can put the coarse minimum a cell
    // or two off the true one, so polish on a finer local grid first.
    const double fine = cell / 5.0;
    Vec2 c1 = c0;
    double best_fine = best;
    for (int j = -10; j <= 10; ++j) {
        for (int i = -10; i <= 10; ++i) {
            const Vec2 p = c0 + Vec2{i * fine, j * fine};
            const double v = nll(p);
            if (v < best_fine) {
                best_fine = v;
                c1 = p;
            }
        }
    }

    PositionEstimate est;
    est.n_reports_used = static_cast<int>(reports.size());
    for (const auto& r : reports) est.timestamp_s = std::max(est.timestamp_s, r.timestamp_s);
    const QuadFit local = quad_fit(nll, c1, fine);
    est.xy = c1;
    if (local.positive_definite()) {
        const auto [ox, oy] = local.newton_step();
        est.xy = c1 + Vec2{std::clamp(ox, -1.0, 1.0) * fine, std::clamp(oy, -1.0, 1.0) * fine};
    }

    // Laplace covariance from the curvature at cell scale.
    const double floor_var = 0.25 * cell * cell;
    const double wide_sigma = std::max(area.width(), area.height()) / 6.0;
    const double wide_var = wide_sigma * wide_sigma;
    const QuadFit h = quad_fit(nll, est.xy, cell);
    Cov2 cov;
    if (h.positive_definite()) {
        // cell units -> meters: H_m = H / cell^2, cov = H_m^-1
        const double s = cell * cell / h.det();
        cov = {h.hyy * s, -h.hxy * s, h.hxx * s};
    } else {
        est.degenerate = true;
        const Eigen2 e = eigen_decompose({h.hxx, h.hxy, h.hyy});
        const auto var_of = [&](double curvature) { return curvature > 1e-12 ? cell * cell / curvature : wide_var; };
        cov = compose_cov(var_of(e.major), var_of(e.minor), e.angle_rad);
    }

    const auto [normal, spread] = line_spread(reports);
    if (spread <= 0.5 * params.collinear_band_m) {
        // A line of receivers cannot tell its two sides apart.
        est.degenerate = true;
        const Vec2 along{normal.y, -normal.x};
        const double var_along = along.x * along.x * cov.xx + 2 * along.x * along.y * cov.xy + along.y * along.y * cov.yy;
        cov = compose_cov(wide_var, std::min(std::max(var_along, floor_var), wide_var), std::atan2(normal.y, normal.x));
    }

    Eigen2 e = eigen_decompose(cov);
    e.major = std::max(e.major, floor_var);
    e.minor = std::max(e.minor, floor_var);
    est.cov = compose_cov(e.major, e.minor, e.angle_rad);

    std::optional<double> strongest;
    for (const auto& r : reports) {
        if (r.pose.indoor() && (!strongest || r.rssi.value_dbm > *strongest)) {
            strongest = r.rssi.value_dbm;
            est.floor_index = r.pose.floor_index;
        }
    }
    return est;
}

SequentialEstimator::SequentialEstimator(Rect area, RfParams rf, EstimatorParams params, std::size_t window,
                                         double interval_s)
    : area_(area), rf_(rf), params_(params), capacity_(window), interval_s_(interval_s) {}

void SequentialEstimator::add(const MeasurementReport& report) {
    if (report.mode != MeasureMode::omni || !report.rssi.valid) return;
    window_.push_back(report);
    while (window_.size() > capacity_) window_.pop_front();
}

bool SequentialEstimator::update(double now_s) {
    if (last_solve_s_ && now_s - *last_solve_s_ < interval_s_ - 1e-9) return false;
    const std::vector<MeasurementReport> reports(window_.begin(), window_.end());
    try {
        PositionEstimate est = estimate_position(reports, area_, rf_, params_);
        est.timestamp_s = now_s;
        estimate_ = est;
        last_solve_s_ = now_s;
        return true;
    } catch (const LcsError&) {
        return false;
    }
}

// ---------------------------------------------------------------------------
// Boundaries and plans

SearchBoundary derive_boundary(const PositionEstimate& estimate) {
    const Cov2& c = estimate.cov;
    const Eigen2 e = eigen_decompose(c);
    if (!std::isfinite(e.major) || !std::isfinite(e.minor) || e.minor <= 0.0) {
        throw LcsError(LcsError::Kind::not_positive_definite, "derive_boundary: covariance is not positive definite");
    }
    SearchBoundary b;
    b.center = estimate.xy;
    b.semi_major_m = 3.0 * std::sqrt(e.major);
    b.semi_minor_m = 3.0 * std::sqrt(e.minor);
    b.orientation_rad = e.angle_rad;
    // Half extents of a rotated ellipse: 3 * sqrt of the marginal variances.
    const double hx = 3.0 * std::sqrt(c.xx);
    const double hy = 3.0 * std::sqrt(c.yy);
    b.bounding_rect = {b.center.x - hx, b.center.y - hy, b.center.x + hx, b.center.y + hy};
    return b;
}

SearchBoundary circular_boundary(Vec2 center, double radius_m) {
    const double sigma = radius_m / 3.0;
    PositionEstimate est;
    est.xy = center;
    est.cov = {sigma * sigma, 0.0, sigma * sigma};
    return derive_boundary(est);
}

double area_ratio(double r_new_m, double r_old_m) {
    // One rounding instead of two: (50/125)^2 lands one ulp above 0.16.
    return (r_new_m * r_new_m) / (r_old_m * r_old_m);
}

namespace {

struct AxisRoad {
    double at;  // x of a vertical road, y of a horizontal one
    double lo;
    double hi;
};

void collect_roads(std::span<const Polyline> roads, std::vector<AxisRoad>& vertical, std::vector<AxisRoad>& horizontal) {
    for (const Polyline& road : roads) {
        for (std::size_t i = 1; i < road.size(); ++i) {
            const Vec2 a = road[i - 1];
            const Vec2 b = road[i];
            if (std::abs(a.x - b.x) < 1e-6) vertical.push_back({a.x, std::min(a.y, b.y), std::max(a.y, b.y)});
            if (std::abs(a.y - b.y) < 1e-6) horizontal.push_back({a.y, std::min(a.x, b.x), std::max(a.x, b.x)});
        }
    }
}

std::optional<double> nearest_road(const std::vector<AxisRoad>& candidates, double target, double lo, double hi,
                                   double span_lo, double span_hi, double max_offset, const std::vector<double>& used) {
    std::optional<double> best;
    for (const AxisRoad& r : candidates) {
        if (r.at < lo - 1e-9 || r.at > hi + 1e-9) continue;
        if (r.lo > span_lo + 1e-6 || r.hi < span_hi - 1e-6) continue;
        if (std::abs(r.at - target) > max_offset) continue;
        if (std::find(used.begin(), used.end(), r.at) != used.end()) continue;
        if (!best || std::abs(r.at - target) < std::abs(*best - target) ||
            (std::abs(r.at - target) == std::abs(*best - target) && r.at < *best)) {
            best = r.at;
        }
    }
    return best;
}

Polyline strip_route(const Rect& strip, Vec2 start_hint, const std::vector<AxisRoad>& vertical,
                     const std::vector<AxisRoad>& horizontal, double lane_spacing) {
    const int n_lanes = std::max(1, static_cast<int>(std::ceil(strip.width() / lane_spacing - 1e-9)));
    const double lane_w = strip.width() / n_lanes;

    // Connectors run along the horizontal roads nearest to the strip's ends.
    const auto connector = [&](double edge) {
        const auto y = nearest_road(horizontal, edge, strip.y0 - lane_spacing, strip.y1 + lane_spacing, strip.x0,
                                    strip.x1, lane_spacing, {});
        return y.value_or(edge);
    };
    const double y_lo = connector(strip.y0);
    const double y_hi = std::max(connector(strip.y1), y_lo);

    std::vector<double> lanes;
    for (int j = 0; j < n_lanes; ++j) {
        const double target = strip.x0 + (j + 0.5) * lane_w;
        const auto x = nearest_road(vertical, target, strip.x0, strip.x1, y_lo, y_hi, lane_spacing / 2.0, lanes);
        lanes.push_back(x.value_or(target));
    }
    std::sort(lanes.begin(), lanes.end());
    if (std::abs(start_hint.x - lanes.back()) < std::abs(start_hint.x - lanes.front())) {
        std::reverse(lanes.begin(), lanes.end());
    }
    const bool start_low = std::abs(start_hint.y - y_lo) <= std::abs(start_hint.y - y_hi);

    Polyline route;
    for (std::size_t j = 0; j < lanes.size(); ++j) {
        const bool up = (j % 2 == 0) == start_low;
        route.push_back({lanes[j], up ? y_lo : y_hi});
        route.push_back({lanes[j], up ? y_hi : y_lo});
    }
    return route;
}

}  // namespace

SearchPlan plan_building_search(const Rect& area, std::span<const PlanRescuer> rescuers,
                                std::span<const Polyline> roads, double lane_spacing_m) {
    if (rescuers.empty()) throw LcsError(LcsError::Kind::no_rescuers, "plan_building_search: no rescuers");
    std::vector<PlanRescuer> order(rescuers.begin(), rescuers.end());
    std::stable_sort(order.begin(), order.end(), [](const PlanRescuer& a, const PlanRescuer& b) {
        return std::tie(a.position.x, a.id) < std::tie(b.position.x, b.id);
    });
    std::vector<AxisRoad> vertical;
    std::vector<AxisRoad> horizontal;
    collect_roads(roads, vertical, horizontal);

    SearchPlan plan;
    plan.phase = PlanPhase::building;
    const auto n = static_cast<int>(order.size());
    const double w = area.width() / n;
    for (int i = 0; i < n; ++i) {
        RescuerAssignment a;
        a.rescuer_id = order[static_cast<std::size_t>(i)].id;
        a.partition = {area.x0 + i * w, area.y0, i + 1 == n ? area.x1 : area.x0 + (i + 1) * w, area.y1};
        a.routes.push_back(strip_route(a.partition, order[static_cast<std::size_t>(i)].position, vertical, horizontal,
                                       lane_spacing_m));
        plan.assignments.push_back(std::move(a));
    }
    return plan;
}

SearchPlan plan_floor_search(const Building& building, std::span<const PlanRescuer> rescuers) {
    if (rescuers.empty()) throw LcsError(LcsError::Kind::no_rescuers, "plan_floor_search: no rescuers");
    SearchPlan plan;
    plan.phase = PlanPhase::floor_room;
    for (const PlanRescuer& r : rescuers) plan.assignments.push_back({r.id, building.footprint, {}, {}});
    for (int f = 0; f < building.floor_count; ++f) {
        RescuerAssignment& a = plan.assignments[static_cast<std::size_t>(f) % rescuers.size()];
        Polyline corridor = building.floors[static_cast<std::size_t>(f)].corridor;
        if (a.floors.size() % 2 == 1) std::reverse(corridor.begin(), corridor.end());
        a.floors.push_back(f);
        a.routes.push_back(std::move(corridor));
    }
    return plan;
}

}  // namespace helps

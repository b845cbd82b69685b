#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "airsense/errors.hpp"
#include "airsense/geo.hpp"
#include "json.hpp"

namespace airsense::field {

struct AqiSample {
    double latitude = 0.0;
    double longitude = 0.0;
    double aqi = 0.0;
    std::optional<std::string> sensor_id;

    bool operator==(const AqiSample&) const = default;
};

enum class Kernel { Gaussian };

// Gaussian RBF interpolant of AQI deviations from the sample mean. Immutable
// once fitted; evaluate with eval_field.
struct AqiField {
    std::vector<AqiSample> samples;
    Kernel kernel = Kernel::Gaussian;
    double length_scale = 1000.0;  // meters
    std::vector<double> weights;
    double mean_offset = 0.0;
    double regularization = 0.0;

    bool operator==(const AqiField&) const = default;
};

struct GridSpec {
    double min_lat = 0.0;
    double min_lon = 0.0;
    double max_lat = 0.0;
    double max_lon = 0.0;
    int rows = 1;
    int cols = 1;

    bool operator==(const GridSpec&) const = default;
};

inline constexpr double kDefaultRegularization = 1e-8;
inline constexpr std::int64_t kDefaultGridCellCap = 250000;

inline double gaussian_kernel(double distance_m, double length_scale) {
    const double r = distance_m / length_scale;
    return std::exp(-r * r);
}

inline double median_pairwise_distance(const std::vector<AqiSample>& samples) {
    std::vector<double> d;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = i + 1; j < samples.size(); ++j) {
            d.push_back(haversine_m({samples[i].latitude, samples[i].longitude},
                                    {samples[j].latitude, samples[j].longitude}));
        }
    }
    if (d.empty()) return 1000.0;
    std::sort(d.begin(), d.end());
    const auto n = d.size();
    return n % 2 ? d[n / 2] : 0.5 * (d[n / 2 - 1] + d[n / 2]);
}

// Averages samples that share exact coordinates; fit_field refuses duplicates.
inline std::vector<AqiSample> merge_duplicates(const std::vector<AqiSample>& samples) {
    std::vector<AqiSample> out;
    std::vector<int> counts;
    for (const auto& s : samples) {
        auto it = std::find_if(out.begin(), out.end(), [&](const AqiSample& o) {
            return o.latitude == s.latitude && o.longitude == s.longitude;
        });
        if (it == out.end()) {
            out.push_back(s);
            counts.push_back(1);
        } else {
            const auto k = static_cast<std::size_t>(it - out.begin());
            it->aqi = (it->aqi * counts[k] + s.aqi) / (counts[k] + 1);
            ++counts[k];
        }
    }
    return out;
}

inline Eigen::MatrixXd kernel_matrix(const std::vector<AqiSample>& samples, double length_scale) {
    const auto n = static_cast<Eigen::Index>(samples.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const auto& a = samples[static_cast<std::size_t>(i)];
            const auto& b = samples[static_cast<std::size_t>(j)];
            const double v = gaussian_kernel(
                haversine_m({a.latitude, a.longitude}, {b.latitude, b.longitude}), length_scale);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

inline AqiField fit_field(std::vector<AqiSample> samples,
                          std::optional<double> length_scale = std::nullopt,
                          double regularization = kDefaultRegularization) {
    if (samples.empty()) throw ArgumentError("fit_field: need at least one sample");
    if (!(regularization >= 0.0)) throw ArgumentError("fit_field: regularization must be >= 0");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (!valid_coordinates(s.latitude, s.longitude)) {
            throw ArgumentError("fit_field: invalid coordinates for sample " + std::to_string(i));
        }
        if (!(s.aqi >= 0.0 && s.aqi <= 500.0)) {
            throw ArgumentError("fit_field: aqi outside [0, 500] for sample " + std::to_string(i));
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (samples[j].latitude == s.latitude && samples[j].longitude == s.longitude) {
                throw ArgumentError("fit_field: samples " + std::to_string(j) + " and " +
                                    std::to_string(i) +
                                    " share coordinates; merge duplicates first");
            }
        }
    }

    AqiField f;
    f.regularization = regularization;
    f.length_scale = length_scale.value_or(median_pairwise_distance(samples));
    if (!(f.length_scale > 0.0) || !std::isfinite(f.length_scale)) {
        throw ArgumentError("fit_field: length scale must be positive");
    }
    const auto n = static_cast<Eigen::Index>(samples.size());
    Eigen::VectorXd rhs(n);
    double mean = 0.0;
    for (const auto& s : samples) mean += s.aqi;
    mean /= static_cast<double>(samples.size());
    for (Eigen::Index i = 0; i < n; ++i) rhs(i) = samples[static_cast<std::size_t>(i)].aqi - mean;

    Eigen::MatrixXd k = kernel_matrix(samples, f.length_scale);
    k.diagonal().array() += regularization;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(k);
    if (!lu.isInvertible()) {
        throw NumericError("fit_field: kernel matrix is singular (rank " +
                           std::to_string(lu.rank()) + " of " + std::to_string(n) +
                           "); stations too close for the length scale, increase regularization");
    }
    const Eigen::VectorXd w = lu.solve(rhs);
    if (!w.allFinite()) throw NumericError("fit_field: ill-conditioned kernel matrix");

    f.samples = std::move(samples);
    f.mean_offset = mean;
    f.weights.assign(w.data(), w.data() + w.size());
    return f;
}

// Value before clamping; exposed for shift-equivariance checks.
inline double eval_field_unclamped(const AqiField& f, double latitude, double longitude) {
    double v = f.mean_offset;
    for (std::size_t i = 0; i < f.samples.size(); ++i) {
        const auto& s = f.samples[i];
        v += f.weights[i] *
             gaussian_kernel(haversine_m({s.latitude, s.longitude}, {latitude, longitude}),
                             f.length_scale);
    }
    return v;
}

inline double eval_field(const AqiField& f, double latitude, double longitude) {
    return std::clamp(eval_field_unclamped(f, latitude, longitude), 0.0, 500.0);
}

inline void validate_grid(const GridSpec& g, std::int64_t cap = kDefaultGridCellCap) {
    if (g.rows <= 0 || g.cols <= 0) throw ArgumentError("grid: rows and cols must be positive");
    if (!(g.min_lat < g.max_lat) || !(g.min_lon < g.max_lon)) {
        throw ArgumentError("grid: min must be below max on both axes");
    }
    if (!valid_coordinates(g.min_lat, g.min_lon) || !valid_coordinates(g.max_lat, g.max_lon)) {
        throw ArgumentError("grid: invalid coordinates");
    }
    if (static_cast<std::int64_t>(g.rows) * g.cols > cap) {
        throw ArgumentError("grid: " + std::to_string(static_cast<std::int64_t>(g.rows) * g.cols) +
                            " cells exceed cap " + std::to_string(cap));
    }
}

// Cell (r, c) center. Row 0 is the southern edge.
inline LatLon cell_center(const GridSpec& g, int r, int c) {
    const double dlat = (g.max_lat - g.min_lat) / g.rows;
    const double dlon = (g.max_lon - g.min_lon) / g.cols;
    return {g.min_lat + (r + 0.5) * dlat, g.min_lon + (c + 0.5) * dlon};
}

inline std::vector<double> rasterize(const AqiField& f, const GridSpec& g,
                                     std::int64_t cap = kDefaultGridCellCap) {
    validate_grid(g, cap);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(g.rows) * static_cast<std::size_t>(g.cols));
    for (int r = 0; r < g.rows; ++r) {
        for (int c = 0; c < g.cols; ++c) {
            const auto p = cell_center(g, r, c);
            out.push_back(eval_field(f, p.lat, p.lon));
        }
    }
    return out;
}

// `count` virtual sensors on a jittered regular layout inside an
// extent x extent box around `center`, with i.i.d. uniform AQI. When the
// layout is an odd square with one spare cell, the center cell is left
// empty so the sensors surround the query point.
inline std::vector<AqiSample> simulate_sensor_grid(LatLon center, int count = 8,
                                                   double extent_m = 1000.0, double aqi_lo = 20.0,
                                                   double aqi_hi = 70.0, std::uint64_t seed = 0) {
    if (count < 1) throw ArgumentError("simulate_sensor_grid: count must be >= 1");
    if (!(aqi_lo < aqi_hi)) throw ArgumentError("simulate_sensor_grid: need aqi_lo < aqi_hi");
    if (!(extent_m > 0.0)) throw ArgumentError("simulate_sensor_grid: extent must be positive");
    const int n = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
    const double cell = extent_m / n;
    const bool skip_center = (n % 2 == 1) && (n * n - count == 1) && n > 1;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.2 * cell, 0.2 * cell);
    std::uniform_real_distribution<double> aqi(aqi_lo, aqi_hi);

    std::vector<AqiSample> out;
    for (int r = 0; r < n && static_cast<int>(out.size()) < count; ++r) {
        for (int c = 0; c < n && static_cast<int>(out.size()) < count; ++c) {
            if (skip_center && r == n / 2 && c == n / 2) continue;
            const double east = -extent_m / 2 + (c + 0.5) * cell + jitter(rng);
            const double north = -extent_m / 2 + (r + 0.5) * cell + jitter(rng);
            const auto p = offset_m(center, east, north);
            AqiSample s;
            s.latitude = p.lat;
            s.longitude = p.lon;
            s.aqi = aqi(rng);
            s.sensor_id = "V" + std::to_string(out.size() + 1);
            out.push_back(std::move(s));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const AqiField& f) {
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& s : f.samples) {
        nlohmann::json js{{"latitude", s.latitude}, {"longitude", s.longitude}, {"aqi", s.aqi}};
        js["sensor_id"] = s.sensor_id ? nlohmann::json(*s.sensor_id) : nlohmann::json(nullptr);
        samples.push_back(std::move(js));
    }
    return {{"type", "aqi_field"},
            {"version", 1},
            {"kernel", "gaussian"},
            {"length_scale_m", f.length_scale},
            {"mean_offset", f.mean_offset},
            {"regularization", f.regularization},
            {"weights", f.weights},
            {"samples", std::move(samples)}};
}

inline AqiField field_from_json(const nlohmann::json& j) {
    if (j.value("type", "") != "aqi_field") throw FormatError("not an aqi_field document");
    if (j.value("kernel", "") != "gaussian") throw FormatError("unsupported kernel");
    AqiField f;
    f.length_scale = j.at("length_scale_m").get<double>();
    f.mean_offset = j.at("mean_offset").get<double>();
    f.regularization = j.at("regularization").get<double>();
    f.weights = j.at("weights").get<std::vector<double>>();
    for (const auto& js : j.at("samples")) {
        AqiSample s;
        s.latitude = js.at("latitude").get<double>();
        s.longitude = js.at("longitude").get<double>();
        s.aqi = js.at("aqi").get<double>();
        if (js.contains("sensor_id") && !js["sensor_id"].is_null()) {
            s.sensor_id = js["sensor_id"].get<std::string>();
        }
        f.samples.push_back(std::move(s));
    }
    if (f.weights.size() != f.samples.size()) throw FormatError("aqi_field: weights/samples size");
    return f;
}

inline nlohmann::json to_json(const GridSpec& g) {
    return {{"min_lat", g.min_lat}, {"min_lon", g.min_lon}, {"max_lat", g.max_lat},
            {"max_lon", g.max_lon}, {"rows", g.rows},       {"cols", g.cols}};
}

}  // namespace airsense::field

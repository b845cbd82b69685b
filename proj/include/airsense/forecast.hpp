#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "airsense/errors.hpp"
#include "airsense/sensor.hpp"
#include "json.hpp"

// Additive forecasting model: piecewise-linear trend plus daily and weekly
// Fourier seasonality, fitted by ordinary least squares. Residuals of the
// fit drive anomaly detection; predicting at gap timestamps fills holes.
namespace airsense::forecast {

inline constexpr std::int64_t kDaySeconds = 86400;
inline constexpr std::int64_t kWeekSeconds = 604800;

// z-score reported when the residual scale is exactly zero.
inline constexpr double kInfiniteZ = 1e9;

struct TimeSeries {
    std::string sensor_id;
    sensor::Pollutant pollutant = sensor::Pollutant::NO2;
    std::vector<std::int64_t> timestamps;  // strictly increasing UTC seconds
    std::vector<double> values;
};

struct ForecastConfig {
    int k_daily = 3;
    int k_weekly = 3;
    int n_changepoints = 0;

    bool operator==(const ForecastConfig&) const = default;
};

struct ForecastModel {
    ForecastConfig config;
    std::vector<std::int64_t> trend_knots;  // UTC seconds, interior to the fit window
    std::vector<double> trend_coeffs;       // intercept, slope, one hinge per knot
    std::vector<double> fourier_daily;      // sin_1, cos_1, sin_2, cos_2, ...
    std::vector<double> fourier_weekly;
    double residual_sigma = 0.0;
    std::int64_t fit_start = 0;
    std::int64_t fit_end = 0;

    bool operator==(const ForecastModel&) const = default;
};

struct Anomaly {
    std::int64_t timestamp = 0;
    double observed = 0.0;
    double expected = 0.0;
    double z_score = 0.0;
};

struct Decomposition {
    std::vector<double> trend;
    std::vector<double> daily;
    std::vector<double> weekly;
    std::vector<double> residual;
};

inline void validate_series(const TimeSeries& s) {
    if (s.timestamps.size() != s.values.size()) {
        throw ArgumentError("time series: " + std::to_string(s.timestamps.size()) +
                            " timestamps but " + std::to_string(s.values.size()) + " values");
    }
    for (std::size_t i = 1; i < s.timestamps.size(); ++i) {
        if (s.timestamps[i] <= s.timestamps[i - 1]) {
            throw ArgumentError("time series: timestamps must be strictly increasing");
        }
    }
    for (double v : s.values) {
        if (!std::isfinite(v)) throw ArgumentError("time series: non-finite value");
    }
}

// Minimum series length for a configuration.
inline std::size_t min_points(const ForecastConfig& c) {
    return 2 * static_cast<std::size_t>(1 + c.n_changepoints + 2 * c.k_daily + 2 * c.k_weekly);
}

namespace detail {

// Position within the period in [0, 1), exact for integer timestamps.
inline double phase(std::int64_t t, std::int64_t period) {
    const std::int64_t m = ((t % period) + period) % period;
    return static_cast<double>(m) / static_cast<double>(period);
}

inline double fourier_sum(const std::vector<double>& coeffs, std::int64_t t, std::int64_t period) {
    const double ph = 2.0 * std::numbers::pi * phase(t, period);
    double v = 0.0;
    for (std::size_t n = 0; n < coeffs.size() / 2; ++n) {
        const double a = static_cast<double>(n + 1) * ph;
        v += coeffs[2 * n] * std::sin(a) + coeffs[2 * n + 1] * std::cos(a);
    }
    return v;
}

inline double scaled_time(const ForecastModel& m, std::int64_t t) {
    const double span = static_cast<double>(std::max<std::int64_t>(1, m.fit_end - m.fit_start));
    return static_cast<double>(t - m.fit_start) / span;
}

inline double trend_at(const ForecastModel& m, std::int64_t t) {
    const double u = scaled_time(m, t);
    double v = m.trend_coeffs[0] + m.trend_coeffs[1] * u;
    for (std::size_t j = 0; j < m.trend_knots.size(); ++j) {
        const double kappa = scaled_time(m, m.trend_knots[j]);
        v += m.trend_coeffs[2 + j] * std::max(0.0, u - kappa);
    }
    return v;
}

inline int column_count(const ForecastConfig& c) {
    return 2 + c.n_changepoints + 2 * c.k_daily + 2 * c.k_weekly;
}

// Design row: [1, u, hinges..., daily sin/cos..., weekly sin/cos...].
inline void fill_row(const ForecastModel& m, std::int64_t t,
                     Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) {
    const double u = scaled_time(m, t);
    Eigen::Index col = 0;
    row(col++) = 1.0;
    row(col++) = u;
    for (auto knot : m.trend_knots) row(col++) = std::max(0.0, u - scaled_time(m, knot));
    const double pd = 2.0 * std::numbers::pi * phase(t, kDaySeconds);
    for (int n = 1; n <= m.config.k_daily; ++n) {
        row(col++) = std::sin(n * pd);
        row(col++) = std::cos(n * pd);
    }
    const double pw = 2.0 * std::numbers::pi * phase(t, kWeekSeconds);
    for (int n = 1; n <= m.config.k_weekly; ++n) {
        row(col++) = std::sin(n * pw);
        row(col++) = std::cos(n * pw);
    }
}

inline double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace detail

inline double predict_one(const ForecastModel& m, std::int64_t t) {
    return detail::trend_at(m, t) + detail::fourier_sum(m.fourier_daily, t, kDaySeconds) +
           detail::fourier_sum(m.fourier_weekly, t, kWeekSeconds);
}

inline std::vector<double> predict(const ForecastModel& m, const std::vector<std::int64_t>& ts) {
    std::vector<double> out;
    out.reserve(ts.size());
    for (auto t : ts) out.push_back(predict_one(m, t));
    return out;
}

inline ForecastModel fit(const TimeSeries& series, const ForecastConfig& config = {}) {
    if (config.k_daily < 0 || config.k_weekly < 0 || config.n_changepoints < 0) {
        throw ArgumentError("forecast fit: orders must be non-negative");
    }
    validate_series(series);
    const auto need = min_points(config);
    if (series.values.size() < need) {
        throw ArgumentError("forecast fit: " + std::to_string(series.values.size()) +
                            " points, need at least " + std::to_string(need) +
                            " for this configuration");
    }

    ForecastModel m;
    m.config = config;
    m.fit_start = series.timestamps.front();
    m.fit_end = series.timestamps.back();
    const std::int64_t span = m.fit_end - m.fit_start;
    for (int j = 1; j <= config.n_changepoints; ++j) {
        m.trend_knots.push_back(m.fit_start + span * j / (config.n_changepoints + 1));
    }

    const auto n = static_cast<Eigen::Index>(series.values.size());
    const int p = detail::column_count(config);
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        detail::fill_row(m, series.timestamps[static_cast<std::size_t>(i)], x.row(i));
        y(i) = series.values[static_cast<std::size_t>(i)];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-9);
    if (qr.rank() < p) {
        throw NumericError("forecast fit: design matrix is rank deficient (rank " +
                           std::to_string(qr.rank()) + " of " + std::to_string(p) +
                           "); the series does not span enough of a day/week for the requested "
                           "orders, use lower k_daily/k_weekly or fewer changepoints");
    }
    const Eigen::VectorXd beta = qr.solve(y);
    if (!beta.allFinite()) throw NumericError("forecast fit: non-finite coefficients");

    int col = 0;
    m.trend_coeffs.assign(beta.data(), beta.data() + 2 + config.n_changepoints);
    col = 2 + config.n_changepoints;
    m.fourier_daily.assign(beta.data() + col, beta.data() + col + 2 * config.k_daily);
    col += 2 * config.k_daily;
    m.fourier_weekly.assign(beta.data() + col, beta.data() + col + 2 * config.k_weekly);

    std::vector<double> resid(series.values.size());
    double scale = 1.0;
    for (std::size_t i = 0; i < resid.size(); ++i) {
        resid[i] = series.values[i] - predict_one(m, series.timestamps[i]);
        scale = std::max(scale, std::fabs(series.values[i]));
    }
    m.residual_sigma = detail::sample_sd(resid);
    // Round-off residuals of an exact fit are not noise.
    if (m.residual_sigma < 1e-10 * scale) m.residual_sigma = 0.0;
    return m;
}

inline Decomposition decompose(const ForecastModel& m, const TimeSeries& series) {
    validate_series(series);
    Decomposition d;
    const auto n = series.values.size();
    d.trend.resize(n);
    d.daily.resize(n);
    d.weekly.resize(n);
    d.residual.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto t = series.timestamps[i];
        d.trend[i] = detail::trend_at(m, t);
        d.daily[i] = detail::fourier_sum(m.fourier_daily, t, kDaySeconds);
        d.weekly[i] = detail::fourier_sum(m.fourier_weekly, t, kWeekSeconds);
        d.residual[i] = series.values[i] - (d.trend[i] + d.daily[i] + d.weekly[i]);
    }
    return d;
}

// Points whose residual exceeds k_sigma * residual_sigma of the fit window.
// With a zero residual scale any residual above 1e-9 is flagged with the
// kInfiniteZ sentinel.
inline std::vector<Anomaly> detect_anomalies(const ForecastModel& m, const TimeSeries& series,
                                             double k_sigma = 3.0) {
    validate_series(series);
    if (!(k_sigma >= 0.0)) throw ArgumentError("detect_anomalies: k_sigma must be >= 0");
    std::vector<Anomaly> out;
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        const auto t = series.timestamps[i];
        const double expected = predict_one(m, t);
        const double r = series.values[i] - expected;
        if (m.residual_sigma > 0.0) {
            if (std::fabs(r) > k_sigma * m.residual_sigma) {
                out.push_back({t, series.values[i], expected, r / m.residual_sigma});
            }
        } else if (std::fabs(r) > 1e-9) {
            out.push_back({t, series.values[i], expected, r > 0 ? kInfiniteZ : -kInfiniteZ});
        }
    }
    return out;
}

// Amplitude of the n-th daily harmonic (1-based).
inline double daily_amplitude(const ForecastModel& m, int harmonic = 1) {
    const auto k = static_cast<std::size_t>(harmonic - 1);
    if (2 * k + 1 >= m.fourier_daily.size()) return 0.0;
    return std::hypot(m.fourier_daily[2 * k], m.fourier_daily[2 * k + 1]);
}

// One pollutant of one sensor, in timestamp order. Duplicate timestamps
// keep the first occurrence.
inline TimeSeries series_from_readings(const std::vector<sensor::SensorReading>& readings,
                                       const std::string& sensor_id, sensor::Pollutant pollutant) {
    std::vector<std::pair<std::int64_t, double>> pts;
    for (const auto& r : readings) {
        if (r.sensor_id == sensor_id) pts.emplace_back(r.timestamp, r[pollutant]);
    }
    std::stable_sort(pts.begin(), pts.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    TimeSeries s;
    s.sensor_id = sensor_id;
    s.pollutant = pollutant;
    for (const auto& [t, v] : pts) {
        if (!s.timestamps.empty() && s.timestamps.back() == t) continue;
        s.timestamps.push_back(t);
        s.values.push_back(v);
    }
    return s;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const ForecastModel& m) {
    return {{"type", "forecast_model"},
            {"version", 1},
            {"k_daily", m.config.k_daily},
            {"k_weekly", m.config.k_weekly},
            {"n_changepoints", m.config.n_changepoints},
            {"trend_knots", m.trend_knots},
            {"trend_coeffs", m.trend_coeffs},
            {"fourier_daily", m.fourier_daily},
            {"fourier_weekly", m.fourier_weekly},
            {"residual_sigma", m.residual_sigma},
            {"fit_window", {m.fit_start, m.fit_end}}};
}

inline ForecastModel forecast_model_from_json(const nlohmann::json& j) {
    if (j.value("type", "") != "forecast_model") throw FormatError("not a forecast_model document");
    ForecastModel m;
    m.config.k_daily = j.at("k_daily").get<int>();
    m.config.k_weekly = j.at("k_weekly").get<int>();
    m.config.n_changepoints = j.at("n_changepoints").get<int>();
    m.trend_knots = j.at("trend_knots").get<std::vector<std::int64_t>>();
    m.trend_coeffs = j.at("trend_coeffs").get<std::vector<double>>();
    m.fourier_daily = j.at("fourier_daily").get<std::vector<double>>();
    m.fourier_weekly = j.at("fourier_weekly").get<std::vector<double>>();
    m.residual_sigma = j.at("residual_sigma").get<double>();
    m.fit_start = j.at("fit_window").at(0).get<std::int64_t>();
    m.fit_end = j.at("fit_window").at(1).get<std::int64_t>();
    if (m.fourier_daily.size() != static_cast<std::size_t>(2 * m.config.k_daily) ||
        m.fourier_weekly.size() != static_cast<std::size_t>(2 * m.config.k_weekly) ||
        m.trend_coeffs.size() != 2 + m.trend_knots.size() ||
        m.trend_knots.size() != static_cast<std::size_t>(m.config.n_changepoints)) {
        throw FormatError("forecast_model: coefficient counts do not match orders");
    }
    return m;
}

}  // namespace airsense::forecast

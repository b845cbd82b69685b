#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "airsense/csv.hpp"
#include "airsense/errors.hpp"
#include "airsense/geo.hpp"

namespace airsense::sensor {

enum class Pollutant : std::uint8_t { CO, NO, NO2, O3, SO2, PM1, PM2_5, PM10 };

inline constexpr std::size_t kPollutantCount = 8;

inline constexpr std::array<Pollutant, kPollutantCount> kAllPollutants{
    Pollutant::CO,  Pollutant::NO,  Pollutant::NO2,   Pollutant::O3,
    Pollutant::SO2, Pollutant::PM1, Pollutant::PM2_5, Pollutant::PM10};

// Pollutants that carry an AQI sub-index. NO and PM1 are measured and stored
// but are not part of the index.
inline constexpr std::array<Pollutant, 6> kAqiPollutants{
    Pollutant::PM2_5, Pollutant::PM10, Pollutant::NO2,
    Pollutant::O3,    Pollutant::SO2,  Pollutant::CO};

inline constexpr std::string_view to_string(Pollutant p) {
    switch (p) {
        case Pollutant::CO: return "co";
        case Pollutant::NO: return "no";
        case Pollutant::NO2: return "no2";
        case Pollutant::O3: return "o3";
        case Pollutant::SO2: return "so2";
        case Pollutant::PM1: return "pm1";
        case Pollutant::PM2_5: return "pm2_5";
        case Pollutant::PM10: return "pm10";
    }
    return "?";
}

inline std::optional<Pollutant> parse_pollutant(std::string_view s) {
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "pm2.5" || lower == "pm25") lower = "pm2_5";
    for (auto p : kAllPollutants) {
        if (to_string(p) == lower) return p;
    }
    return std::nullopt;
}

inline constexpr bool has_aqi(Pollutant p) { return p != Pollutant::NO && p != Pollutant::PM1; }

struct SensorStation {
    std::string id;
    double latitude = 0.0;
    double longitude = 0.0;
    std::string label;
    std::string city;

    bool operator==(const SensorStation&) const = default;
};

// One timestamped measurement. Gases in ppb, particulates in ug/m3.
struct SensorReading {
    std::string sensor_id;
    std::int64_t timestamp = 0;  // UTC seconds
    std::array<double, kPollutantCount> concentrations{};
    double temperature = 0.0;  // degC
    double humidity = 0.0;     // percent
    double pressure = 0.0;     // hPa

    double& operator[](Pollutant p) { return concentrations[static_cast<std::size_t>(p)]; }
    double operator[](Pollutant p) const { return concentrations[static_cast<std::size_t>(p)]; }

    bool operator==(const SensorReading&) const = default;
};

struct AqiValue {
    double overall = 0.0;
    Pollutant dominant = Pollutant::PM2_5;
    std::map<Pollutant, double> sub_indices;  // only the six indexed pollutants
    bool saturated = false;                   // some concentration exceeded the table
};

// ---------------------------------------------------------------------------
// Breakpoint table

struct Breakpoint {
    double c_lo = 0.0;
    double c_hi = 0.0;
    double i_lo = 0.0;
    double i_hi = 0.0;
};

struct BreakpointTable {
    std::map<Pollutant, std::vector<Breakpoint>> bands;  // ingestion units, sorted by c_lo
};

// Multiplier from the table's native unit to the ingestion unit.
// CO and O3 bands are published in ppm; readings are in ppb.
inline constexpr double table_unit_scale(Pollutant p) {
    return (p == Pollutant::CO || p == Pollutant::O3) ? 1000.0 : 1.0;
}

inline constexpr std::string_view kBreakpointHeader = "pollutant,c_lo,c_hi,i_lo,i_hi";

inline BreakpointTable parse_breakpoint_table(std::istream& in) {
    csv::LineReader reader(in);
    csv::expect_header(reader, kBreakpointHeader, "breakpoint table");
    BreakpointTable table;
    std::string line;
    while (reader.next(line)) {
        const auto cells = csv::split(line);
        if (cells.size() != 5) {
            throw ValidationError(reader.line_no(), "row", "expected 5 columns");
        }
        const auto p = parse_pollutant(csv::trim(cells[0]));
        if (!p || !has_aqi(*p)) {
            throw ValidationError(reader.line_no(), "pollutant",
                                  "unknown pollutant '" + std::string(cells[0]) + "'");
        }
        Breakpoint bp;
        const char* names[] = {"c_lo", "c_hi", "i_lo", "i_hi"};
        double* slots[] = {&bp.c_lo, &bp.c_hi, &bp.i_lo, &bp.i_hi};
        for (int k = 0; k < 4; ++k) {
            const auto v = csv::to_double(cells[k + 1]);
            if (!v) throw ValidationError(reader.line_no(), names[k], "not a number");
            *slots[k] = *v;
        }
        if (bp.c_lo < 0 || bp.c_hi <= bp.c_lo || bp.i_hi <= bp.i_lo || bp.i_lo < 0 ||
            bp.i_hi > 500) {
            throw ValidationError(reader.line_no(), "row", "band is not increasing or out of [0,500]");
        }
        const double scale = table_unit_scale(*p);
        bp.c_lo *= scale;
        bp.c_hi *= scale;
        table.bands[*p].push_back(bp);
    }
    for (auto& [p, bands] : table.bands) {
        std::sort(bands.begin(), bands.end(),
                  [](const Breakpoint& a, const Breakpoint& b) { return a.c_lo < b.c_lo; });
        for (std::size_t k = 1; k < bands.size(); ++k) {
            if (bands[k].c_lo < bands[k - 1].c_hi || bands[k].i_lo < bands[k - 1].i_hi) {
                throw FormatError("breakpoint table: overlapping bands for " +
                                  std::string(to_string(p)));
            }
        }
    }
    for (auto p : kAqiPollutants) {
        if (!table.bands.contains(p)) {
            throw FormatError("breakpoint table: no bands for " + std::string(to_string(p)));
        }
    }
    return table;
}

// Same content as data/aqi_breakpoints_v1.csv.
inline constexpr std::string_view kDefaultBreakpointCsv = R"(pollutant,c_lo,c_hi,i_lo,i_hi
pm2_5,0.0,9.0,0,50
pm2_5,9.1,35.4,51,100
pm2_5,35.5,55.4,101,150
pm2_5,55.5,125.4,151,200
pm2_5,125.5,225.4,201,300
pm2_5,225.5,325.4,301,500
pm10,0,54,0,50
pm10,55,154,51,100
pm10,155,254,101,150
pm10,255,354,151,200
pm10,355,424,201,300
pm10,425,504,301,400
pm10,505,604,401,500
no2,0,53,0,50
no2,54,100,51,100
no2,101,360,101,150
no2,361,649,151,200
no2,650,1249,201,300
no2,1250,1649,301,400
no2,1650,2049,401,500
o3,0.000,0.054,0,50
o3,0.055,0.070,51,100
o3,0.071,0.085,101,150
o3,0.086,0.105,151,200
o3,0.106,0.200,201,300
o3,0.405,0.504,301,400
o3,0.505,0.604,401,500
so2,0,35,0,50
so2,36,75,51,100
so2,76,185,101,150
so2,186,304,151,200
so2,305,604,201,300
so2,605,804,301,400
so2,805,1004,401,500
co,0.0,4.4,0,50
co,4.5,9.4,51,100
co,9.5,12.4,101,150
co,12.5,15.4,151,200
co,15.5,30.4,201,300
co,30.5,40.4,301,400
co,40.5,50.4,401,500
)";

inline const BreakpointTable& default_breakpoint_table() {
    static const BreakpointTable table = [] {
        std::istringstream in{std::string(kDefaultBreakpointCsv)};
        return parse_breakpoint_table(in);
    }();
    return table;
}

struct SubIndex {
    double value = 0.0;
    bool saturated = false;
};

// Piecewise-linear interpolation inside the first band whose upper edge is
// not below `c`. Concentrations falling in the gap between two published
// bands take the lower edge of the next band.
inline SubIndex sub_index(const std::vector<Breakpoint>& bands, double c) {
    for (const auto& bp : bands) {
        if (c <= bp.c_hi) {
            const double cc = std::max(c, bp.c_lo);
            return {(bp.i_hi - bp.i_lo) / (bp.c_hi - bp.c_lo) * (cc - bp.c_lo) + bp.i_lo, false};
        }
    }
    return {500.0, true};
}

inline AqiValue compute_aqi(const SensorReading& reading,
                            const BreakpointTable& table = default_breakpoint_table()) {
    AqiValue out;
    out.overall = -1.0;
    for (auto p : kAqiPollutants) {
        const auto it = table.bands.find(p);
        if (it == table.bands.end()) continue;
        const auto si = sub_index(it->second, std::max(0.0, reading[p]));
        out.sub_indices[p] = si.value;
        out.saturated = out.saturated || si.saturated;
        if (si.value > out.overall) {
            out.overall = si.value;
            out.dominant = p;
        }
    }
    out.overall = std::clamp(out.overall, 0.0, 500.0);
    return out;
}

// Inverse of the PM2.5 sub-index: a concentration whose sub-index equals
// `aqi`. Used to materialize readings for virtual sensors with a chosen AQI.
inline double pm25_for_aqi(double aqi, const BreakpointTable& table = default_breakpoint_table()) {
    const auto& bands = table.bands.at(Pollutant::PM2_5);
    for (const auto& bp : bands) {
        if (aqi <= bp.i_hi) {
            const double ii = std::max(aqi, bp.i_lo);
            return (bp.c_hi - bp.c_lo) / (bp.i_hi - bp.i_lo) * (ii - bp.i_lo) + bp.c_lo;
        }
    }
    return bands.back().c_hi;
}

// ---------------------------------------------------------------------------
// Readings / stations CSV

inline constexpr std::string_view kReadingsHeader =
    "sensor_id,timestamp,co,no,no2,o3,so2,pm1,pm2_5,pm10,temperature,humidity,pressure";
inline constexpr std::string_view kStationsHeader = "id,latitude,longitude,label,city";

inline void validate_reading(const SensorReading& r, std::size_t line = 0) {
    if (r.sensor_id.empty()) throw ValidationError(line, "sensor_id", "empty");
    if (r.timestamp <= 0) throw ValidationError(line, "timestamp", "must be positive");
    for (auto p : kAllPollutants) {
        if (!std::isfinite(r[p]) || r[p] < 0.0) {
            throw ValidationError(line, std::string(to_string(p)), "negative concentration");
        }
    }
    if (!std::isfinite(r.temperature)) throw ValidationError(line, "temperature", "not finite");
    if (!(r.humidity >= 0.0 && r.humidity <= 100.0)) {
        throw ValidationError(line, "humidity", "outside [0, 100]");
    }
    if (!std::isfinite(r.pressure)) throw ValidationError(line, "pressure", "not finite");
}

inline SensorReading parse_reading_line(std::string_view line, std::size_t line_no) {
    static constexpr std::array<std::string_view, 13> kFields{
        "sensor_id", "timestamp", "co",    "no",          "no2",      "o3",      "so2",
        "pm1",       "pm2_5",     "pm10", "temperature", "humidity", "pressure"};
    const auto cells = csv::split(line);
    if (cells.size() != kFields.size()) {
        throw ValidationError(line_no, "row",
                              "expected 13 columns, got " + std::to_string(cells.size()));
    }
    SensorReading r;
    r.sensor_id = std::string(csv::trim(cells[0]));
    const auto ts = csv::to_int64(cells[1]);
    if (!ts) throw ValidationError(line_no, "timestamp", "not an integer");
    r.timestamp = *ts;
    for (std::size_t k = 0; k < kPollutantCount; ++k) {
        const auto v = csv::to_double(cells[2 + k]);
        if (!v) throw ValidationError(line_no, std::string(kFields[2 + k]), "not a number");
        r.concentrations[k] = *v;
    }
    double* tail[] = {&r.temperature, &r.humidity, &r.pressure};
    for (std::size_t k = 0; k < 3; ++k) {
        const auto v = csv::to_double(cells[10 + k]);
        if (!v) throw ValidationError(line_no, std::string(kFields[10 + k]), "not a number");
        *tail[k] = *v;
    }
    validate_reading(r, line_no);
    return r;
}

// Parses a readings CSV. Bad data lines are collected in `errors`; a bad
// header throws FormatError.
inline csv::ParseResult<SensorReading> parse_readings(std::istream& in) {
    csv::LineReader reader(in);
    csv::expect_header(reader, kReadingsHeader, "readings");
    csv::ParseResult<SensorReading> result;
    std::string line;
    while (reader.next(line)) {
        try {
            result.records.push_back(parse_reading_line(line, reader.line_no()));
        } catch (const ValidationError& e) {
            result.errors.push_back(e);
        }
    }
    return result;
}

inline void write_readings(std::ostream& out, const std::vector<SensorReading>& readings) {
    out << kReadingsHeader << '\n';
    for (const auto& r : readings) {
        csv::check_cell(r.sensor_id, "sensor_id");
        out << r.sensor_id << ',' << r.timestamp;
        for (double c : r.concentrations) out << ',' << csv::format_double(c);
        out << ',' << csv::format_double(r.temperature) << ',' << csv::format_double(r.humidity)
            << ',' << csv::format_double(r.pressure) << '\n';
    }
}

inline csv::ParseResult<SensorStation> parse_stations(std::istream& in) {
    csv::LineReader reader(in);
    csv::expect_header(reader, kStationsHeader, "stations");
    csv::ParseResult<SensorStation> result;
    std::string line;
    while (reader.next(line)) {
        const auto n = reader.line_no();
        try {
            const auto cells = csv::split(line);
            if (cells.size() != 5) throw ValidationError(n, "row", "expected 5 columns");
            SensorStation s;
            s.id = std::string(csv::trim(cells[0]));
            if (s.id.empty()) throw ValidationError(n, "id", "empty");
            const auto lat = csv::to_double(cells[1]);
            const auto lon = csv::to_double(cells[2]);
            if (!lat || *lat < -90 || *lat > 90) throw ValidationError(n, "latitude", "invalid");
            if (!lon || *lon < -180 || *lon > 180) throw ValidationError(n, "longitude", "invalid");
            s.latitude = *lat;
            s.longitude = *lon;
            s.label = std::string(csv::trim(cells[3]));
            s.city = std::string(csv::trim(cells[4]));
            result.records.push_back(std::move(s));
        } catch (const ValidationError& e) {
            result.errors.push_back(e);
        }
    }
    return result;
}

inline void write_stations(std::ostream& out, const std::vector<SensorStation>& stations) {
    out << kStationsHeader << '\n';
    for (const auto& s : stations) {
        csv::check_cell(s.id, "id");
        csv::check_cell(s.label, "label");
        csv::check_cell(s.city, "city");
        out << s.id << ',' << csv::format_double(s.latitude) << ','
            << csv::format_double(s.longitude) << ',' << s.label << ',' << s.city << '\n';
    }
}

// ---------------------------------------------------------------------------
// Minute averaging

inline std::int64_t floor_to_minute(std::int64_t t) {
    const std::int64_t m = t % 60;
    return t - (m < 0 ? m + 60 : m);
}

// One output per populated UTC minute; every numeric field is the bucket mean.
inline std::vector<SensorReading> minute_average(const std::vector<SensorReading>& readings) {
    std::vector<SensorReading> out;
    if (readings.empty()) return out;
    const auto& id = readings.front().sensor_id;
    for (std::size_t k = 0; k < readings.size(); ++k) {
        if (readings[k].sensor_id != id) {
            throw ArgumentError("minute_average: mixed sensor ids '" + id + "' and '" +
                                readings[k].sensor_id + "'");
        }
        if (k > 0 && readings[k].timestamp < readings[k - 1].timestamp) {
            throw ArgumentError("minute_average: timestamps must be non-decreasing");
        }
    }
    std::size_t begin = 0;
    while (begin < readings.size()) {
        const auto bucket = floor_to_minute(readings[begin].timestamp);
        std::size_t end = begin;
        while (end < readings.size() && floor_to_minute(readings[end].timestamp) == bucket) ++end;
        const double n = static_cast<double>(end - begin);
        SensorReading avg;
        avg.sensor_id = id;
        avg.timestamp = bucket;
        for (std::size_t k = begin; k < end; ++k) {
            for (std::size_t p = 0; p < kPollutantCount; ++p) {
                avg.concentrations[p] += readings[k].concentrations[p];
            }
            avg.temperature += readings[k].temperature;
            avg.humidity += readings[k].humidity;
            avg.pressure += readings[k].pressure;
        }
        if (end - begin > 1) {
            for (auto& c : avg.concentrations) c /= n;
            avg.temperature /= n;
            avg.humidity /= n;
            avg.pressure /= n;
        }
        out.push_back(std::move(avg));
        begin = end;
    }
    return out;
}

// Groups by sensor (stable within sensor, ordered by timestamp) and averages each.
inline std::vector<SensorReading> minute_average_all(std::vector<SensorReading> readings) {
    std::stable_sort(readings.begin(), readings.end(), [](const auto& a, const auto& b) {
        if (a.sensor_id != b.sensor_id) return a.sensor_id < b.sensor_id;
        return a.timestamp < b.timestamp;
    });
    std::vector<SensorReading> out;
    std::size_t begin = 0;
    while (begin < readings.size()) {
        std::size_t end = begin;
        while (end < readings.size() && readings[end].sensor_id == readings[begin].sensor_id) ++end;
        std::vector<SensorReading> group(readings.begin() + static_cast<std::ptrdiff_t>(begin),
                                         readings.begin() + static_cast<std::ptrdiff_t>(end));
        auto avg = minute_average(group);
        out.insert(out.end(), std::make_move_iterator(avg.begin()),
                   std::make_move_iterator(avg.end()));
        begin = end;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic city day

// A localized event added on top of the diurnal profile.
struct SpikeSpec {
    std::string station_id;
    Pollutant pollutant = Pollutant::NO;
    std::int64_t start = 0;  // UTC seconds
    std::int64_t duration_s = 600;
    double magnitude_sigma = 10.0;  // in units of that pollutant's noise sigma
};

struct CitySimOptions {
    std::int64_t interval_s = 60;
    std::optional<SpikeSpec> spike;
    double morning_peak_hour = 6.0;
    double evening_peak_hour = 18.5;
    double peak_width_hours = 1.2;
};

// Noise standard deviation per pollutant in the synthetic generator.
// Noise is uniform, so it never exceeds sqrt(3) sigma.
inline constexpr double sim_noise_sigma(Pollutant p) {
    switch (p) {
        case Pollutant::CO: return 8.0;
        case Pollutant::NO: return 1.0;
        case Pollutant::NO2: return 1.5;
        case Pollutant::O3: return 1.5;
        case Pollutant::SO2: return 0.2;
        case Pollutant::PM1: return 0.3;
        case Pollutant::PM2_5: return 0.5;
        case Pollutant::PM10: return 0.8;
    }
    return 1.0;
}

namespace detail {
inline double bump(double hour, double center, double width) {
    // Circular distance so a peak near midnight wraps.
    double d = std::fabs(hour - center);
    d = std::min(d, 24.0 - d);
    return std::exp(-0.5 * (d / width) * (d / width));
}
}  // namespace detail

// Per-minute readings for one UTC day at every station: NO/NO2/CO follow
// morning and evening traffic peaks, O3 peaks in the afternoon, each station
// gets its own baseline and peak amplitude. Deterministic for a seed.
inline std::vector<SensorReading> simulate_city_day(const std::vector<SensorStation>& stations,
                                                    std::int64_t day_start_utc,
                                                    std::uint64_t seed,
                                                    const CitySimOptions& opts = {}) {
    if (stations.empty()) throw ArgumentError("simulate_city_day: need at least one station");
    if (opts.interval_s <= 0) throw ArgumentError("simulate_city_day: interval must be positive");
    const std::int64_t day0 = day_start_utc - (((day_start_utc % 86400) + 86400) % 86400);
    const std::int64_t steps = 86400 / opts.interval_s;
    std::vector<SensorReading> out;
    out.reserve(static_cast<std::size_t>(steps) * stations.size());

    for (std::size_t s = 0; s < stations.size(); ++s) {
        // Station traits depend only on (seed, station index) so every day of a
        // multi-day simulation sees the same station character.
        std::mt19937_64 station_rng(seed * 0x9E3779B97F4A7C15ULL + s * 7919ULL + 1);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        const double base_no2 = 8.0 + 8.0 * u01(station_rng);
        const double amp_m = 20.0 + 15.0 * u01(station_rng);
        const double amp_e = 18.0 + 15.0 * u01(station_rng);
        const double base_pm = 5.0 + 4.0 * u01(station_rng);
        const double base_o3 = 22.0 + 8.0 * u01(station_rng);
        const double base_so2 = 1.0 + 2.0 * u01(station_rng);

        std::mt19937_64 rng(seed ^ (static_cast<std::uint64_t>(day0) * 31ULL + s * 104729ULL));
        std::uniform_real_distribution<double> noise(-std::sqrt(3.0), std::sqrt(3.0));
        const auto& st = stations[s];

        for (std::int64_t k = 0; k < steps; ++k) {
            const std::int64_t t = day0 + k * opts.interval_s;
            const double hour = static_cast<double>(t - day0) / 3600.0;
            const double traffic =
                amp_m * detail::bump(hour, opts.morning_peak_hour, opts.peak_width_hours) +
                amp_e * detail::bump(hour, opts.evening_peak_hour, opts.peak_width_hours);
            const double sun = detail::bump(hour, 14.0, 3.0);

            SensorReading r;
            r.sensor_id = st.id;
            r.timestamp = t;
            r[Pollutant::NO2] = base_no2 + traffic;
            r[Pollutant::NO] = 0.4 * base_no2 + 0.8 * traffic;
            r[Pollutant::CO] = 220.0 + 6.0 * (base_no2 + traffic);
            r[Pollutant::O3] = base_o3 + 18.0 * sun - 0.15 * traffic;
            r[Pollutant::SO2] = base_so2;
            r[Pollutant::PM2_5] = base_pm + 0.12 * traffic;
            r[Pollutant::PM10] = 1.6 * (base_pm + 0.12 * traffic);
            r[Pollutant::PM1] = 0.7 * (base_pm + 0.12 * traffic);
            for (auto p : kAllPollutants) r[p] += sim_noise_sigma(p) * noise(rng);
            if (opts.spike && opts.spike->station_id == st.id && t >= opts.spike->start &&
                t < opts.spike->start + opts.spike->duration_s) {
                r[opts.spike->pollutant] +=
                    opts.spike->magnitude_sigma * sim_noise_sigma(opts.spike->pollutant);
            }
            for (auto p : kAllPollutants) r[p] = std::max(0.0, r[p]);
            r.temperature = 14.0 + 6.0 * std::sin(2.0 * std::numbers::pi * (hour - 9.0) / 24.0) +
                            0.2 * noise(rng);
            r.humidity = std::clamp(
                65.0 - 15.0 * std::sin(2.0 * std::numbers::pi * (hour - 9.0) / 24.0) + noise(rng),
                0.0, 100.0);
            r.pressure = 1013.0 + 0.3 * noise(rng);
            out.push_back(std::move(r));
        }
    }
    return out;
}

// A clean reading whose AQI is `aqi`, dominated by PM2.5.
inline SensorReading reading_for_aqi(const std::string& sensor_id, std::int64_t timestamp,
                                     double aqi,
                                     const BreakpointTable& table = default_breakpoint_table()) {
    SensorReading r;
    r.sensor_id = sensor_id;
    r.timestamp = timestamp;
    r[Pollutant::PM2_5] = pm25_for_aqi(aqi, table);
    r[Pollutant::PM10] = r[Pollutant::PM2_5];
    r[Pollutant::PM1] = 0.7 * r[Pollutant::PM2_5];
    r[Pollutant::NO2] = 5.0;
    r[Pollutant::NO] = 2.0;
    r[Pollutant::O3] = 10.0;
    r[Pollutant::SO2] = 1.0;
    r[Pollutant::CO] = 200.0;
    r.temperature = 18.0;
    r.humidity = 60.0;
    r.pressure = 1013.0;
    return r;
}

// The ten-station Bari layout used by the demo data generator.
inline std::vector<SensorStation> bari_stations() {
    struct Row { const char* id; double lat, lon; const char* label; };
    static constexpr Row rows[] = {
        {"BA-151", 41.1258, 16.8674, "city-centre"},
        {"BA-152", 41.1307, 16.8621, "old-town"},
        {"BA-153", 41.1171, 16.8719, "school"},
        {"BA-154", 41.1205, 16.8810, "residential"},
        {"BA-155", 41.1369, 16.8545, "ferry-dock"},
        {"BA-156", 41.1102, 16.8580, "daycare"},
        {"BA-157", 41.1150, 16.8890, "industrial-parking"},
        {"BA-158", 41.1060, 16.8760, "residential-cul-de-sac"},
        {"BA-159", 41.1280, 16.8450, "port-road"},
        {"BA-160", 41.1010, 16.8950, "suburb"},
    };
    std::vector<SensorStation> out;
    for (const auto& r : rows) out.push_back({r.id, r.lat, r.lon, r.label, "Bari"});
    return out;
}

}  // namespace airsense::sensor

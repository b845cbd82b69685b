#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "airsense/aqi_field.hpp"
#include "airsense/errors.hpp"
#include "airsense/federated.hpp"
#include "airsense/recsys.hpp"
#include "airsense/sensor.hpp"
#include "airsense/store.hpp"
#include "json.hpp"

// Glue shared by the CLI and the HTTP service: station status, the AQI
// field of the latest readings, and model snapshots in a data root.
namespace airsense::engine {

struct StationStatus {
    sensor::SensorStation station;
    std::optional<sensor::SensorReading> latest;  // minute-averaged
    std::optional<sensor::AqiValue> aqi;
};

inline std::vector<StationStatus> station_status(const std::vector<sensor::SensorStation>& stations,
                                                 const std::vector<sensor::SensorReading>& readings) {
    std::map<std::string, sensor::SensorReading> last;
    for (const auto& r : sensor::minute_average_all(readings)) {
        auto it = last.find(r.sensor_id);
        if (it == last.end() || it->second.timestamp <= r.timestamp) last[r.sensor_id] = r;
    }
    std::vector<StationStatus> out;
    for (const auto& s : stations) {
        StationStatus st{s, std::nullopt, std::nullopt};
        if (auto it = last.find(s.id); it != last.end()) {
            st.latest = it->second;
            st.aqi = sensor::compute_aqi(it->second);
        }
        out.push_back(std::move(st));
    }
    return out;
}

inline std::vector<field::AqiSample> field_samples(const std::vector<StationStatus>& status) {
    std::vector<field::AqiSample> samples;
    for (const auto& s : status) {
        if (!s.aqi) continue;
        samples.push_back({s.station.latitude, s.station.longitude, s.aqi->overall, s.station.id});
    }
    return field::merge_duplicates(samples);
}

// Median distance from each station to its nearest neighbour.
inline std::optional<double> serving_length_scale(const std::vector<field::AqiSample>& samples) {
    if (samples.size() < 2) return std::nullopt;
    std::vector<double> nearest;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < samples.size(); ++j) {
            if (i == j) continue;
            best = std::min(best, haversine_m({samples[i].latitude, samples[i].longitude},
                                              {samples[j].latitude, samples[j].longitude}));
        }
        nearest.push_back(best);
    }
    std::sort(nearest.begin(), nearest.end());
    const auto n = nearest.size();
    return n % 2 ? nearest[n / 2] : 0.5 * (nearest[n / 2 - 1] + nearest[n / 2]);
}

// AQI field over the latest station readings, or nothing if no station has one.
inline std::optional<field::AqiField> field_from_status(
    const std::vector<StationStatus>& status, std::optional<double> length_scale = std::nullopt,
    double regularization = field::kDefaultRegularization) {
    const auto samples = field_samples(status);
    if (samples.empty()) return std::nullopt;
    if (!length_scale) length_scale = serving_length_scale(samples);
    return field::fit_field(samples, length_scale, regularization);
}

inline nlohmann::json to_json(const StationStatus& s) {
    nlohmann::json j{{"id", s.station.id},
                     {"latitude", s.station.latitude},
                     {"longitude", s.station.longitude},
                     {"label", s.station.label},
                     {"city", s.station.city},
                     {"aqi", nullptr},
                     {"dominant", nullptr},
                     {"saturated", false},
                     {"timestamp", nullptr}};
    if (s.latest) {
        j["timestamp"] = s.latest->timestamp;
        nlohmann::json c;
        for (auto p : sensor::kAllPollutants) c[std::string(sensor::to_string(p))] = (*s.latest)[p];
        j["concentrations"] = std::move(c);
    }
    if (s.aqi) {
        j["aqi"] = s.aqi->overall;
        j["dominant"] = std::string(sensor::to_string(s.aqi->dominant));
        j["saturated"] = s.aqi->saturated;
    }
    return j;
}

inline std::vector<std::string> poi_ids(const std::vector<recsys::Poi>& pois) {
    std::vector<std::string> ids;
    ids.reserve(pois.size());
    for (const auto& p : pois) ids.push_back(p.id);
    return ids;
}

// "top3" or a comma-separated user list.
inline std::vector<std::string> resolve_clients(const std::string& spec,
                                                const std::vector<recsys::Rating>& ratings) {
    if (spec.empty()) return {};
    if (spec.rfind("top", 0) == 0) {
        const auto k = csv::to_int64(std::string_view(spec).substr(3));
        if (!k || *k < 1) throw ArgumentError("clients: expected topN or a comma list, got '" + spec + "'");
        return fl::top_users_by_count(ratings, static_cast<std::size_t>(*k));
    }
    std::vector<std::string> out;
    for (auto cell : csv::split(spec)) {
        const std::string id(csv::trim(cell));
        if (id.empty()) throw ArgumentError("clients: empty user id in '" + spec + "'");
        out.push_back(id);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Model snapshots ("mf-vN")

inline constexpr const char* kModelPrefix = "mf";

struct LoadedModel {
    recsys::MfModel model;
    std::string name;
};

inline std::optional<LoadedModel> latest_model(const store::DataRoot& root) {
    const int v = store::latest_version(root, kModelPrefix);
    if (v == 0) return std::nullopt;
    const auto name = store::versioned_name(kModelPrefix, v);
    return LoadedModel{recsys::mf_model_from_json(store::load_snapshot(root, name)), name};
}

inline std::string save_model(const store::DataRoot& root, const recsys::MfModel& m) {
    const auto name = store::versioned_name(kModelPrefix, store::latest_version(root, kModelPrefix) + 1);
    store::save_snapshot(root, name, recsys::to_json(m));
    return name;
}

// Served model after a federated round: the item side comes from the
// server, user rows stay as they were.
inline recsys::MfModel with_global_items(recsys::MfModel m, const fl::ServerState& server) {
    for (const auto& [id, e] : server.global_items) {
        m.item_vecs[id] = e.vec;
        m.item_bias[id] = e.bias;
    }
    return m;
}

}  // namespace airsense::engine

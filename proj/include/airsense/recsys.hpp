#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "airsense/aqi_field.hpp"
#include "airsense/csv.hpp"
#include "airsense/errors.hpp"
#include "airsense/geo.hpp"
#include "json.hpp"

namespace airsense::recsys {

struct Poi {
    std::string id;
    std::string name;
    std::string category;
    double latitude = 0.0;
    double longitude = 0.0;

    bool operator==(const Poi&) const = default;
};

struct Rating {
    std::string user_id;
    std::string poi_id;
    double value = 0.0;  // [1, 5]

    bool operator==(const Rating&) const = default;
};

using Vec = std::vector<double>;

// Biased MF: r = global_mean + user_bias + item_bias + <user_vec, item_vec>.
struct MfModel {
    int dimension = 16;
    double global_mean = 3.0;
    std::map<std::string, double> user_bias;
    std::map<std::string, double> item_bias;
    std::map<std::string, Vec> user_vecs;
    std::map<std::string, Vec> item_vecs;

    bool operator==(const MfModel&) const = default;
};

struct MfHyperParams {
    int dimension = 16;
    double lr = 0.01;
    double reg = 0.02;
    int epochs = 30;
    std::uint64_t seed = 0;
    double init_std = 0.1;
};

inline constexpr double kMinRating = 1.0;
inline constexpr double kMaxRating = 5.0;

// ---------------------------------------------------------------------------
// SGD kernel shared by centralized training and federated clients.

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

// One stochastic step on (r - r_hat)^2 + reg (|p|^2 + |q|^2 + bu^2 + bi^2).
// Returns the pre-update error.
inline double sgd_step(double global_mean, double rating, std::span<double> p, double& bu,
                       std::span<double> q, double& bi, double lr, double reg) {
    const double e = rating - (global_mean + bu + bi + dot(p, q));
    bu += lr * (e - reg * bu);
    bi += lr * (e - reg * bi);
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double pk = p[k];
        p[k] += lr * (e * q[k] - reg * pk);
        q[k] += lr * (e * pk - reg * q[k]);
    }
    return e;
}

// Seed for the shuffle of a given epoch; lets resumed training line up.
inline std::uint64_t epoch_seed(std::uint64_t seed, int epoch) {
    return seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(epoch) * 0xBF58476D1CE4E5B9ULL +
           0x94D049BB133111EBULL;
}

inline std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(epoch_seed(seed, epoch));
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

inline Vec random_vec(int dimension, double stddev, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, stddev);
    Vec v(static_cast<std::size_t>(dimension));
    for (auto& x : v) x = normal(rng);
    return v;
}

inline void validate_rating(const Rating& r) {
    if (r.user_id.empty() || r.poi_id.empty()) throw ArgumentError("rating: empty id");
    if (!(r.value >= kMinRating && r.value <= kMaxRating)) {
        throw ArgumentError("rating: value " + std::to_string(r.value) + " outside [1, 5]");
    }
}

// Continues SGD from `model` over `ratings`. Users and items not yet in the
// model get fresh N(0, init_std) embeddings (drawn in sorted id order) and
// zero bias. global_mean is left as is.
inline MfModel continue_training(MfModel model, const std::vector<Rating>& ratings,
                                 const MfHyperParams& hp) {
    if (hp.dimension != model.dimension) {
        throw ArgumentError("continue_training: dimension mismatch");
    }
    if (hp.epochs < 0 || !(hp.lr > 0.0) || !(hp.reg >= 0.0)) {
        throw ArgumentError("mf: epochs >= 0, lr > 0 and reg >= 0 required");
    }
    for (const auto& r : ratings) validate_rating(r);

    std::map<std::string, bool> new_users, new_items;
    for (const auto& r : ratings) {
        if (!model.user_vecs.contains(r.user_id)) new_users[r.user_id] = true;
        if (!model.item_vecs.contains(r.poi_id)) new_items[r.poi_id] = true;
    }
    std::mt19937_64 init_rng(hp.seed ^ 0xA5A5A5A5DEADBEEFULL);
    for (const auto& [u, _] : new_users) {
        model.user_vecs[u] = random_vec(model.dimension, hp.init_std, init_rng);
        model.user_bias[u] = 0.0;
    }
    for (const auto& [i, _] : new_items) {
        model.item_vecs[i] = random_vec(model.dimension, hp.init_std, init_rng);
        model.item_bias[i] = 0.0;
    }

    // Resolve map entries once so the inner loop does no lookups.
    struct Slot {
        Vec* p;
        double* bu;
        Vec* q;
        double* bi;
        double value;
    };
    std::vector<Slot> slots;
    slots.reserve(ratings.size());
    for (const auto& r : ratings) {
        slots.push_back({&model.user_vecs[r.user_id], &model.user_bias[r.user_id],
                         &model.item_vecs[r.poi_id], &model.item_bias[r.poi_id], r.value});
    }
    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
        double sq = 0.0;
        for (auto idx : epoch_order(slots.size(), hp.seed, epoch)) {
            auto& s = slots[idx];
            const double e =
                sgd_step(model.global_mean, s.value, *s.p, *s.bu, *s.q, *s.bi, hp.lr, hp.reg);
            sq += e * e;
        }
        if (!std::isfinite(sq)) {
            throw NumericError("mf training diverged at epoch " + std::to_string(epoch) +
                               " (non-finite loss); lower the learning rate");
        }
    }
    return model;
}

inline MfModel train_mf(const std::vector<Rating>& ratings, const MfHyperParams& hp = {}) {
    if (ratings.empty()) throw ArgumentError("train_mf: no ratings");
    if (hp.dimension <= 0) throw ArgumentError("train_mf: dimension must be positive");
    MfModel model;
    model.dimension = hp.dimension;
    double sum = 0.0;
    for (const auto& r : ratings) sum += r.value;
    model.global_mean = sum / static_cast<double>(ratings.size());
    return continue_training(std::move(model), ratings, hp);
}

// Raw (unclamped) score with cold-start fallbacks.
inline double raw_score(const MfModel& m, const std::string& user_id, const std::string& poi_id) {
    const auto ub = m.user_bias.find(user_id);
    const auto ib = m.item_bias.find(poi_id);
    double r = m.global_mean;
    if (ub != m.user_bias.end()) r += ub->second;
    if (ib != m.item_bias.end()) r += ib->second;
    if (ub != m.user_bias.end() && ib != m.item_bias.end()) {
        const auto pu = m.user_vecs.find(user_id);
        const auto qi = m.item_vecs.find(poi_id);
        if (pu != m.user_vecs.end() && qi != m.item_vecs.end()) r += dot(pu->second, qi->second);
    }
    return r;
}

inline double predict_rating(const MfModel& m, const std::string& user_id,
                             const std::string& poi_id) {
    const double r = raw_score(m, user_id, poi_id);
    if (!std::isfinite(r)) return m.global_mean;
    return std::clamp(r, kMinRating, kMaxRating);
}

// ---------------------------------------------------------------------------
// Pollution-aware re-ranking

struct RecQuery {
    std::string user_id;
    double latitude = 0.0;
    double longitude = 0.0;
    double radius_m = 1000.0;
    double alpha = 0.5;
    int limit = 10;
};

struct ScoredPoi {
    Poi poi;
    double s_mf = 0.0;
    double s_aqi = 0.0;
    double s = 0.0;
    double predicted_rating = 0.0;
    double aqi_at_poi = 0.0;
    double distance_m = 0.0;
};

struct RecommendOptions {
    double a_ref = 300.0;  // AQI at or above which the air-quality score is 0
};

inline double s_mf_from_rating(double predicted_rating) { return (predicted_rating - 1.0) / 4.0; }

inline double s_aqi_from_aqi(double aqi, double a_ref) {
    return (a_ref - std::min(std::max(aqi, 0.0), a_ref)) / a_ref;
}

inline double blend(double alpha, double s_mf, double s_aqi) {
    return alpha * s_mf + (1.0 - alpha) * s_aqi;
}

inline void validate_query(const RecQuery& q) {
    if (!(q.alpha >= 0.0 && q.alpha <= 1.0)) {
        throw ArgumentError("alpha must be in [0, 1], got " + csv::format_double(q.alpha));
    }
    if (!(q.radius_m > 0.0) || !std::isfinite(q.radius_m)) {
        throw ArgumentError("radius_m must be positive");
    }
    if (q.limit <= 0) throw ArgumentError("limit must be positive");
    if (!valid_coordinates(q.latitude, q.longitude)) throw ArgumentError("invalid coordinates");
}

inline std::vector<Poi> within_radius(const std::vector<Poi>& pois, LatLon center,
                                      double radius_m) {
    std::vector<Poi> out;
    for (const auto& p : pois) {
        if (haversine_m(center, {p.latitude, p.longitude}) <= radius_m) out.push_back(p);
    }
    return out;
}

// Radius filter, MF preference, interpolated AQI, then S = a*S_MF + (1-a)*S_AQI.
// Sorted by S descending, then by the raw AQI / rating behind it, then POI
// id ascending; truncated to the limit.
inline std::vector<ScoredPoi> recommend(const MfModel& model, const field::AqiField& field,
                                        const std::vector<Poi>& pois, const RecQuery& query,
                                        const RecommendOptions& opts = {}) {
    validate_query(query);
    if (!(opts.a_ref > 0.0)) throw ArgumentError("a_ref must be positive");
    const LatLon here{query.latitude, query.longitude};
    std::vector<ScoredPoi> out;
    for (const auto& p : pois) {
        const double d = haversine_m(here, {p.latitude, p.longitude});
        if (d > query.radius_m) continue;
        ScoredPoi sp;
        sp.poi = p;
        sp.distance_m = d;
        sp.predicted_rating = predict_rating(model, query.user_id, p.id);
        sp.s_mf = s_mf_from_rating(sp.predicted_rating);
        sp.aqi_at_poi = field::eval_field(field, p.latitude, p.longitude);
        sp.s_aqi = s_aqi_from_aqi(sp.aqi_at_poi, opts.a_ref);
        sp.s = blend(query.alpha, sp.s_mf, sp.s_aqi);
        out.push_back(std::move(sp));
    }
    // Equal S can hide AQI or rating differences lost to rounding.
    const bool aqi_weighted = query.alpha < 1.0, mf_weighted = query.alpha > 0.0;
    std::sort(out.begin(), out.end(), [&](const ScoredPoi& a, const ScoredPoi& b) {
        if (a.s != b.s) return a.s > b.s;
        if (aqi_weighted && a.aqi_at_poi != b.aqi_at_poi) return a.aqi_at_poi < b.aqi_at_poi;
        if (mf_weighted && a.predicted_rating != b.predicted_rating) {
            return a.predicted_rating > b.predicted_rating;
        }
        return a.poi.id < b.poi.id;
    });
    if (out.size() > static_cast<std::size_t>(query.limit)) {
        out.resize(static_cast<std::size_t>(query.limit));
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr std::string_view kPoisHeader = "id,name,category,latitude,longitude";
inline constexpr std::string_view kRatingsHeader = "user_id,poi_id,value";

inline csv::ParseResult<Poi> parse_pois(std::istream& in) {
    csv::LineReader reader(in);
    csv::expect_header(reader, kPoisHeader, "pois");
    csv::ParseResult<Poi> result;
    std::string line;
    while (reader.next(line)) {
        const auto n = reader.line_no();
        try {
            const auto cells = csv::split(line);
            if (cells.size() != 5) throw ValidationError(n, "row", "expected 5 columns");
            Poi p;
            p.id = std::string(csv::trim(cells[0]));
            if (p.id.empty()) throw ValidationError(n, "id", "empty");
            p.name = std::string(csv::trim(cells[1]));
            p.category = std::string(csv::trim(cells[2]));
            const auto lat = csv::to_double(cells[3]);
            const auto lon = csv::to_double(cells[4]);
            if (!lat || *lat < -90 || *lat > 90) throw ValidationError(n, "latitude", "invalid");
            if (!lon || *lon < -180 || *lon > 180) throw ValidationError(n, "longitude", "invalid");
            p.latitude = *lat;
            p.longitude = *lon;
            result.records.push_back(std::move(p));
        } catch (const ValidationError& e) {
            result.errors.push_back(e);
        }
    }
    return result;
}

inline void write_pois(std::ostream& out, const std::vector<Poi>& pois) {
    out << kPoisHeader << '\n';
    for (const auto& p : pois) {
        csv::check_cell(p.id, "id");
        csv::check_cell(p.name, "name");
        csv::check_cell(p.category, "category");
        out << p.id << ',' << p.name << ',' << p.category << ',' << csv::format_double(p.latitude)
            << ',' << csv::format_double(p.longitude) << '\n';
    }
}

inline csv::ParseResult<Rating> parse_ratings(std::istream& in) {
    csv::LineReader reader(in);
    csv::expect_header(reader, kRatingsHeader, "ratings");
    csv::ParseResult<Rating> result;
    std::string line;
    while (reader.next(line)) {
        const auto n = reader.line_no();
        try {
            const auto cells = csv::split(line);
            if (cells.size() != 3) throw ValidationError(n, "row", "expected 3 columns");
            Rating r;
            r.user_id = std::string(csv::trim(cells[0]));
            r.poi_id = std::string(csv::trim(cells[1]));
            if (r.user_id.empty()) throw ValidationError(n, "user_id", "empty");
            if (r.poi_id.empty()) throw ValidationError(n, "poi_id", "empty");
            const auto v = csv::to_double(cells[2]);
            if (!v) throw ValidationError(n, "value", "not a number");
            if (*v < kMinRating || *v > kMaxRating) {
                throw ValidationError(n, "value", "outside [1, 5]");
            }
            r.value = *v;
            result.records.push_back(std::move(r));
        } catch (const ValidationError& e) {
            result.errors.push_back(e);
        }
    }
    return result;
}

inline void write_ratings(std::ostream& out, const std::vector<Rating>& ratings) {
    out << kRatingsHeader << '\n';
    for (const auto& r : ratings) {
        csv::check_cell(r.user_id, "user_id");
        csv::check_cell(r.poi_id, "poi_id");
        out << r.user_id << ',' << r.poi_id << ',' << csv::format_double(r.value) << '\n';
    }
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const MfModel& m) {
    return {{"type", "mf_model"},          {"version", 1},
            {"dimension", m.dimension},    {"global_mean", m.global_mean},
            {"user_bias", m.user_bias},    {"item_bias", m.item_bias},
            {"user_vecs", m.user_vecs},    {"item_vecs", m.item_vecs}};
}

inline MfModel mf_model_from_json(const nlohmann::json& j) {
    if (j.value("type", "") != "mf_model") throw FormatError("not an mf_model document");
    MfModel m;
    m.dimension = j.at("dimension").get<int>();
    m.global_mean = j.at("global_mean").get<double>();
    m.user_bias = j.at("user_bias").get<std::map<std::string, double>>();
    m.item_bias = j.at("item_bias").get<std::map<std::string, double>>();
    m.user_vecs = j.at("user_vecs").get<std::map<std::string, Vec>>();
    m.item_vecs = j.at("item_vecs").get<std::map<std::string, Vec>>();
    for (const auto* table : {&m.user_vecs, &m.item_vecs}) {
        for (const auto& [id, v] : *table) {
            if (v.size() != static_cast<std::size_t>(m.dimension)) {
                throw FormatError("mf_model: vector for '" + id + "' has wrong dimension");
            }
        }
    }
    return m;
}

inline nlohmann::json to_json(const ScoredPoi& sp) {
    return {{"poi_id", sp.poi.id},
            {"name", sp.poi.name},
            {"category", sp.poi.category},
            {"latitude", sp.poi.latitude},
            {"longitude", sp.poi.longitude},
            {"s", sp.s},
            {"s_mf", sp.s_mf},
            {"s_aqi", sp.s_aqi},
            {"predicted_rating", sp.predicted_rating},
            {"aqi", sp.aqi_at_poi},
            {"distance_m", sp.distance_m}};
}

// Mean absolute error of the clamped prediction.
inline double mae(const MfModel& m, const std::vector<Rating>& ratings) {
    if (ratings.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : ratings) s += std::fabs(predict_rating(m, r.user_id, r.poi_id) - r.value);
    return s / static_cast<double>(ratings.size());
}

}  // namespace airsense::recsys

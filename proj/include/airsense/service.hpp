#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "airsense/aqi_field.hpp"
#include "airsense/engine.hpp"
#include "airsense/errors.hpp"
#include "airsense/federated.hpp"
#include "airsense/forecast.hpp"
#include "airsense/recsys.hpp"
#include "airsense/sensor.hpp"
#include "airsense/store.hpp"
#include "httplib.h"
#include "json.hpp"

namespace airsense::service {

using nlohmann::json;

inline constexpr const char* kBenchDir = "bench";
inline constexpr const char* kBenchErrorsFile = "errors.csv";
inline constexpr const char* kBenchSummaryFile = "summary.csv";

// ---------------------------------------------------------------------------
// Configuration

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string data_root = "airsense-data";
    std::string cors_origin = "*";
    double default_alpha = 0.5;
    double default_radius_m = 1000.0;
    int default_limit = 10;
    double a_ref = 300.0;
    std::int64_t grid_cell_cap = field::kDefaultGridCellCap;
    std::optional<double> length_scale_m;  // median station spacing when unset
    recsys::MfHyperParams mf{};
    fl::FlHyperParams fl{};
    std::string fl_clients = "top3";
    forecast::ForecastConfig forecast{.k_daily = 3, .k_weekly = 0, .n_changepoints = 0};
    int max_horizon_hours = 336;
};

inline void validate(const ServiceConfig& c) {
    if (c.port < 0 || c.port > 65535) throw ArgumentError("config: port out of range");
    if (c.data_root.empty()) throw ArgumentError("config: data_root is empty");
    if (!(c.default_alpha >= 0.0 && c.default_alpha <= 1.0)) {
        throw ArgumentError("config: default_alpha must be in [0, 1]");
    }
    if (!(c.default_radius_m > 0.0)) throw ArgumentError("config: default_radius_m must be positive");
    if (c.default_limit < 1) throw ArgumentError("config: default_limit must be positive");
    if (!(c.a_ref > 0.0)) throw ArgumentError("config: a_ref must be positive");
    if (c.grid_cell_cap < 1) throw ArgumentError("config: grid_cell_cap must be positive");
    if (c.length_scale_m && !(*c.length_scale_m > 0.0)) {
        throw ArgumentError("config: length_scale_m must be positive");
    }
    if (c.mf.dimension < 1 || c.mf.epochs < 0 || !(c.mf.lr > 0.0) || !(c.mf.reg >= 0.0)) {
        throw ArgumentError("config: invalid mf hyperparameters");
    }
    if (c.fl.dimension != c.mf.dimension) throw ArgumentError("config: fl.dimension must equal mf.dimension");
    if (c.fl.local_epochs < 0 || !(c.fl.lr > 0.0) || !(c.fl.reg >= 0.0)) {
        throw ArgumentError("config: invalid fl hyperparameters");
    }
    if (c.forecast.k_daily < 0 || c.forecast.k_weekly < 0 || c.forecast.n_changepoints < 0) {
        throw ArgumentError("config: forecast orders must be >= 0");
    }
    if (c.max_horizon_hours < 1) throw ArgumentError("config: max_horizon_hours must be positive");
}

namespace detail {

template <typename T>
void take(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
    for (const auto& [k, _] : j.items()) {
        if (std::find_if(keys.begin(), keys.end(), [&](const char* x) { return k == x; }) == keys.end()) {
            throw ArgumentError(where + ": unknown key '" + k + "'");
        }
    }
}

}  // namespace detail

inline ServiceConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ArgumentError("config: expected a JSON object");
    detail::reject_unknown(j,
                           {"host", "port", "data_root", "cors_origin", "default_alpha", "default_radius_m",
                            "default_limit", "a_ref", "grid_cell_cap", "length_scale_m", "mf", "fl",
                            "forecast", "max_horizon_hours"},
                           "config");
    ServiceConfig c;
    try {
        detail::take(j, "host", c.host);
        detail::take(j, "port", c.port);
        detail::take(j, "data_root", c.data_root);
        detail::take(j, "cors_origin", c.cors_origin);
        detail::take(j, "default_alpha", c.default_alpha);
        detail::take(j, "default_radius_m", c.default_radius_m);
        detail::take(j, "default_limit", c.default_limit);
        detail::take(j, "a_ref", c.a_ref);
        detail::take(j, "grid_cell_cap", c.grid_cell_cap);
        detail::take(j, "max_horizon_hours", c.max_horizon_hours);
        if (j.contains("length_scale_m") && !j["length_scale_m"].is_null()) {
            c.length_scale_m = j["length_scale_m"].get<double>();
        }
        if (j.contains("mf")) {
            const auto& m = j["mf"];
            detail::reject_unknown(m, {"dimension", "lr", "reg", "epochs", "seed", "init_std"}, "config.mf");
            detail::take(m, "dimension", c.mf.dimension);
            detail::take(m, "lr", c.mf.lr);
            detail::take(m, "reg", c.mf.reg);
            detail::take(m, "epochs", c.mf.epochs);
            detail::take(m, "seed", c.mf.seed);
            detail::take(m, "init_std", c.mf.init_std);
        }
        c.fl.dimension = c.mf.dimension;
        if (j.contains("fl")) {
            const auto& f = j["fl"];
            detail::reject_unknown(f, {"clients", "local_epochs", "lr", "reg", "seed", "holdout_fraction"},
                                   "config.fl");
            detail::take(f, "clients", c.fl_clients);
            detail::take(f, "local_epochs", c.fl.local_epochs);
            detail::take(f, "lr", c.fl.lr);
            detail::take(f, "reg", c.fl.reg);
            detail::take(f, "seed", c.fl.seed);
            detail::take(f, "holdout_fraction", c.fl.holdout_fraction);
        }
        if (j.contains("forecast")) {
            const auto& f = j["forecast"];
            detail::reject_unknown(f, {"k_daily", "k_weekly", "n_changepoints"}, "config.forecast");
            detail::take(f, "k_daily", c.forecast.k_daily);
            detail::take(f, "k_weekly", c.forecast.k_weekly);
            detail::take(f, "n_changepoints", c.forecast.n_changepoints);
        }
    } catch (const json::exception& e) {
        throw ArgumentError(std::string("config: ") + e.what());
    }
    validate(c);
    return c;
}

// AIRSENSE_BIND=host:port and AIRSENSE_DATA_ROOT win over the file.
inline void apply_env(ServiceConfig& c,
                      const std::function<const char*(const char*)>& getenv_fn = std::getenv) {
    if (const char* bind = getenv_fn("AIRSENSE_BIND"); bind && *bind) {
        const std::string b(bind);
        const auto colon = b.rfind(':');
        if (colon == std::string::npos) {
            c.host = b;
        } else {
            const auto port = csv::to_int64(std::string_view(b).substr(colon + 1));
            if (!port) throw ArgumentError("AIRSENSE_BIND: bad port in '" + b + "'");
            if (colon > 0) c.host = b.substr(0, colon);
            c.port = static_cast<int>(*port);
        }
    }
    if (const char* root = getenv_fn("AIRSENSE_DATA_ROOT"); root && *root) c.data_root = root;
    validate(c);
}

inline ServiceConfig load_config(const std::optional<std::filesystem::path>& file,
                                 const std::function<const char*(const char*)>& getenv_fn = std::getenv) {
    ServiceConfig c;
    if (file) {
        std::ifstream in(*file);
        if (!in) throw NotFoundError("config file not found: " + file->string());
        try {
            c = config_from_json(json::parse(in));
        } catch (const json::parse_error& e) {
            throw ArgumentError("config: " + std::string(e.what()));
        }
    }
    apply_env(c, getenv_fn);
    return c;
}

// ---------------------------------------------------------------------------
// POI provider

// Source of candidate places. The engine only sees this interface, so a
// remote places API can replace the file without touching ranking code.
class PoiProvider {
public:
    virtual ~PoiProvider() = default;
    virtual std::vector<recsys::Poi> all() const = 0;

    virtual std::optional<recsys::Poi> find(const std::string& id) const {
        for (auto& p : all()) {
            if (p.id == id) return p;
        }
        return std::nullopt;
    }
};

// pois.csv of a data root, verified against the manifest.
class FilePoiProvider final : public PoiProvider {
public:
    explicit FilePoiProvider(const store::DataRoot& root) {
        std::istringstream in(root.read_verified(store::kPoisFile, root.manifest()));
        pois_ = store::strict(recsys::parse_pois(in), store::kPoisFile);
        for (std::size_t i = 0; i < pois_.size(); ++i) index_[pois_[i].id] = i;
    }

    std::vector<recsys::Poi> all() const override { return pois_; }

    std::optional<recsys::Poi> find(const std::string& id) const override {
        const auto it = index_.find(id);
        if (it == index_.end()) return std::nullopt;
        return pois_[it->second];
    }

private:
    std::vector<recsys::Poi> pois_;
    std::map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// Snapshots

struct SensorView {
    std::vector<engine::StationStatus> stations;
    std::vector<sensor::SensorReading> readings;
    std::optional<field::AqiField> field;
};

// Everything a read request may look at. Immutable once published.
struct Snapshot {
    std::uint64_t version = 0;
    std::string model_name;
    std::shared_ptr<const recsys::MfModel> model;
    std::shared_ptr<const SensorView> sensors;
    std::shared_ptr<const std::vector<recsys::Poi>> pois;
};

class SnapshotCell {
public:
    std::shared_ptr<const Snapshot> load() const {
        std::shared_lock lock(mu_);
        return current_;
    }

    void store(std::shared_ptr<const Snapshot> s) {
        std::unique_lock lock(mu_);
        current_ = std::move(s);
    }

private:
    mutable std::shared_mutex mu_;
    std::shared_ptr<const Snapshot> current_;
};

// ---------------------------------------------------------------------------
// Requests

struct ApiRequest {
    std::string method = "GET";
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
};

struct ApiResponse {
    int status = 200;
    json body;
};

inline int status_for(const std::exception& e) {
    if (dynamic_cast<const ArgumentError*>(&e) || dynamic_cast<const ValidationError*>(&e) ||
        dynamic_cast<const FormatError*>(&e)) {
        return 400;
    }
    if (dynamic_cast<const NotFoundError*>(&e) || dynamic_cast<const IntegrityError*>(&e)) return 404;
    if (dynamic_cast<const PreconditionError*>(&e) || dynamic_cast<const VersioningError*>(&e) ||
        dynamic_cast<const NumericError*>(&e)) {
        return 409;
    }
    return 500;
}

inline const char* error_kind(int status, const std::exception& e) {
    if (dynamic_cast<const IntegrityError*>(&e)) return "integrity";
    switch (status) {
        case 400: return "validation";
        case 404: return "not_found";
        case 409: return "conflict";
        default: return "internal";
    }
}

inline ApiResponse error_response(const std::exception& e) {
    const int status = status_for(e);
    json body{{"error", error_kind(status, e)}, {"message", e.what()}};
    if (const auto* ie = dynamic_cast<const IntegrityError*>(&e); ie && !ie->offending_ids().empty()) {
        body["offending_ids"] = ie->offending_ids();
    }
    return {status, std::move(body)};
}

namespace detail {

inline const std::string* param(const ApiRequest& r, const std::string& key) {
    const auto it = r.query.find(key);
    return it == r.query.end() ? nullptr : &it->second;
}

inline double query_double(const ApiRequest& r, const std::string& key, std::optional<double> fallback = {}) {
    const auto* v = param(r, key);
    if (!v) {
        if (fallback) return *fallback;
        throw ArgumentError("missing query parameter '" + key + "'");
    }
    const auto d = csv::to_double(*v);
    if (!d) throw ArgumentError("query parameter '" + key + "' is not a number");
    return *d;
}

inline int query_int(const ApiRequest& r, const std::string& key, std::optional<int> fallback = {}) {
    const auto* v = param(r, key);
    if (!v) {
        if (fallback) return *fallback;
        throw ArgumentError("missing query parameter '" + key + "'");
    }
    const auto d = csv::to_int64(*v);
    if (!d || *d < INT32_MIN || *d > INT32_MAX) {
        throw ArgumentError("query parameter '" + key + "' is not an integer");
    }
    return static_cast<int>(*d);
}

inline json parse_body(const ApiRequest& r) {
    try {
        auto j = json::parse(r.body);
        if (!j.is_object()) throw ArgumentError("request body must be a JSON object");
        return j;
    } catch (const json::parse_error&) {
        throw ArgumentError("request body is not valid JSON");
    }
}

inline double body_number(const json& j, const char* key, std::optional<double> fallback = {}) {
    if (!j.contains(key) || j[key].is_null()) {
        if (fallback) return *fallback;
        throw ArgumentError(std::string("missing field '") + key + "'");
    }
    if (!j[key].is_number()) throw ArgumentError(std::string("field '") + key + "' must be a number");
    return j[key].get<double>();
}

inline std::string body_string(const json& j, const char* key) {
    if (!j.contains(key)) throw ArgumentError(std::string("missing field '") + key + "'");
    if (!j[key].is_string()) throw ArgumentError(std::string("field '") + key + "' must be a string");
    return j[key].get<std::string>();
}

inline json series_json(const std::vector<std::int64_t>& ts, const std::vector<double>& vs) {
    return {{"timestamps", ts}, {"values", vs}};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Service

class Service {
public:
    explicit Service(ServiceConfig config, std::shared_ptr<const PoiProvider> provider = nullptr)
        : config_(std::move(config)), root_(config_.data_root) {
        validate(config_);
        provider_ = provider ? std::move(provider) : std::make_shared<FilePoiProvider>(root_);
        const auto data = store::load_all(root_);
        auto snap = std::make_shared<Snapshot>();
        snap->version = 1;
        snap->sensors = build_sensor_view(data);
        snap->pois = std::make_shared<const std::vector<recsys::Poi>>(provider_->all());
        if (auto stored = engine::latest_model(root_)) {
            snap->model = std::make_shared<const recsys::MfModel>(std::move(stored->model));
            snap->model_name = stored->name;
        } else {
            const auto m = recsys::train_mf(data.ratings, config_.mf);
            snap->model_name = engine::save_model(root_, m);
            snap->model = std::make_shared<const recsys::MfModel>(m);
        }
        cell_.store(std::move(snap));
    }

    const ServiceConfig& config() const { return config_; }
    std::shared_ptr<const Snapshot> snapshot() const { return cell_.load(); }

    ApiResponse handle(const ApiRequest& req) {
        try {
            const auto& p = req.path;
            if (req.method == "GET") {
                if (p == "/api/health") return health();
                if (p == "/api/sensors") return sensors();
                if (p == "/api/aqi/grid") return grid(req);
                if (p == "/api/forecast") return forecast_series(req);
                if (p == "/api/anomalies") return anomalies(req);
                if (p == "/api/benchmark") return benchmark();
            } else if (req.method == "POST") {
                if (p == "/api/recommend") return recommend(req);
                if (p == "/api/ratings") return post_rating(req);
                if (p == "/api/fl/round") return fl_round();
                if (p == "/api/train") return train();
            }
            throw NotFoundError("no route for " + req.method + " " + p);
        } catch (const std::exception& e) {
            return error_response(e);
        }
    }

    // Registers every route plus CORS on an httplib server.
    void mount(httplib::Server& server) {
        auto adapt = [this](const httplib::Request& hr, httplib::Response& res) {
            ApiRequest req{hr.method, hr.path, {}, hr.body};
            for (const auto& [k, v] : hr.params) req.query.emplace(k, v);
            const auto out = handle(req);
            res.status = out.status;
            res.set_content(out.body.dump(), "application/json");
        };
        for (const char* path : {"/api/health", "/api/sensors", "/api/aqi/grid", "/api/forecast",
                                 "/api/anomalies", "/api/benchmark"}) {
            server.Get(path, adapt);
        }
        for (const char* path : {"/api/recommend", "/api/ratings", "/api/fl/round", "/api/train"}) {
            server.Post(path, adapt);
        }
        server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
        server.set_post_routing_handler([origin = config_.cors_origin](const httplib::Request&,
                                                                        httplib::Response& res) {
            res.set_header("Access-Control-Allow-Origin", origin);
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
        });
        server.set_error_handler([](const httplib::Request& hr, httplib::Response& res) {
            if (!res.body.empty()) return;
            res.set_content(json{{"error", "not_found"}, {"message", "no route for " + hr.path}}.dump(),
                            "application/json");
        });
    }

    // Blocks until the server stops.
    void serve(httplib::Server& server) {
        mount(server);
        if (!server.listen(config_.host, config_.port)) {
            throw Error("cannot bind " + config_.host + ":" + std::to_string(config_.port));
        }
    }

    // Mutations. Serialized; each ends with one atomic snapshot swap.
    fl::RoundReport run_fl_round() {
        std::lock_guard lock(mutate_);
        const auto snap = cell_.load();
        if (!session_) {
            const auto data = store::load_all(root_);
            const auto clients = engine::resolve_clients(config_.fl_clients, data.ratings);
            if (clients.empty()) {
                throw PreconditionError("no federated clients registered (config fl.clients is empty)");
            }
            auto hp = config_.fl;
            hp.dimension = snap->model->dimension;
            const auto setup = fl::prepare(data.ratings, engine::poi_ids(*snap->pois), clients, hp);
            session_.emplace(fl::server_from_model(*snap->model), setup.clients, hp);
        }
        auto report = session_->run_round();
        auto next = std::make_shared<Snapshot>(*snap);
        next->version = snap->version + 1;
        next->model = std::make_shared<const recsys::MfModel>(
            engine::with_global_items(*snap->model, session_->server()));
        next->model_name = snap->model_name + "+fl" + std::to_string(report.round);
        cell_.store(std::move(next));
        return report;
    }

    std::string retrain() {
        std::lock_guard lock(mutate_);
        const auto data = store::load_all(root_);
        const auto m = recsys::train_mf(data.ratings, config_.mf);
        const auto name = engine::save_model(root_, m);
        const auto snap = cell_.load();
        auto next = std::make_shared<Snapshot>(*snap);
        next->version = snap->version + 1;
        next->model = std::make_shared<const recsys::MfModel>(m);
        next->model_name = name;
        next->sensors = build_sensor_view(data);
        cell_.store(std::move(next));
        session_.reset();
        return name;
    }

private:
    std::shared_ptr<const SensorView> build_sensor_view(const store::Dataset& data) const {
        auto v = std::make_shared<SensorView>();
        v->stations = engine::station_status(data.stations, data.readings);
        v->readings = data.readings;
        v->field = engine::field_from_status(v->stations, config_.length_scale_m);
        return v;
    }

    ApiResponse health() const {
        const auto s = cell_.load();
        return {200, {{"status", "ok"}, {"snapshot_version", s->version}, {"model", s->model_name}}};
    }

    ApiResponse sensors() const {
        const auto s = cell_.load();
        json out = json::array();
        for (const auto& st : s->sensors->stations) out.push_back(engine::to_json(st));
        return {200, out};
    }

    ApiResponse grid(const ApiRequest& req) const {
        const auto s = cell_.load();
        field::GridSpec g;
        g.min_lat = detail::query_double(req, "min_lat");
        g.min_lon = detail::query_double(req, "min_lon");
        g.max_lat = detail::query_double(req, "max_lat");
        g.max_lon = detail::query_double(req, "max_lon");
        g.rows = detail::query_int(req, "rows");
        g.cols = detail::query_int(req, "cols");
        field::validate_grid(g, config_.grid_cell_cap);
        if (!s->sensors->field) throw PreconditionError("no station has readings; AQI field unavailable");
        return {200, {{"grid", field::to_json(g)},
                      {"values", field::rasterize(*s->sensors->field, g, config_.grid_cell_cap)}}};
    }

    ApiResponse recommend(const ApiRequest& req) const {
        const auto body = detail::parse_body(req);
        recsys::RecQuery q;
        q.user_id = detail::body_string(body, "user_id");
        q.latitude = detail::body_number(body, "lat");
        q.longitude = detail::body_number(body, "lon");
        q.radius_m = detail::body_number(body, "radius_m", config_.default_radius_m);
        q.alpha = detail::body_number(body, "alpha", config_.default_alpha);
        const double limit = detail::body_number(body, "limit", config_.default_limit);
        if (limit != std::floor(limit) || limit < 1 || limit > 1e6) {
            throw ArgumentError("limit must be a positive integer");
        }
        q.limit = static_cast<int>(limit);
        recsys::validate_query(q);
        const auto s = cell_.load();
        if (!s->sensors->field) throw PreconditionError("no station has readings; AQI field unavailable");
        const auto ranked =
            recsys::recommend(*s->model, *s->sensors->field, *s->pois, q, {.a_ref = config_.a_ref});
        json items = json::array();
        for (const auto& r : ranked) items.push_back(recsys::to_json(r));
        return {200,
                {{"snapshot_version", s->version},
                 {"model", s->model_name},
                 {"user_id", q.user_id},
                 {"cold_start", !s->model->user_bias.contains(q.user_id)},
                 {"alpha", q.alpha},
                 {"radius_m", q.radius_m},
                 {"recommendations", std::move(items)}}};
    }

    ApiResponse post_rating(const ApiRequest& req) {
        const auto body = detail::parse_body(req);
        recsys::Rating r{detail::body_string(body, "user_id"), detail::body_string(body, "poi_id"),
                         detail::body_number(body, "value")};
        recsys::validate_rating(r);
        if (r.value != std::round(r.value)) throw ArgumentError("value must be a whole number of stars");
        const auto poi = provider_->find(r.poi_id);
        if (!poi) throw IntegrityError("unknown poi id " + r.poi_id, {r.poi_id});
        std::lock_guard lock(mutate_);
        store::append_rating(root_, r, {*poi});
        return {201,
                {{"accepted", true},
                 {"user_id", r.user_id},
                 {"poi_id", r.poi_id},
                 {"value", r.value},
                 {"visible_after", "next training run"}}};
    }

    ApiResponse fl_round() {
        const auto report = run_fl_round();
        auto j = fl::to_json(report);
        j["snapshot_version"] = cell_.load()->version;
        return {200, j};
    }

    ApiResponse train() {
        const auto name = retrain();
        return {200, {{"model", name}, {"snapshot_version", cell_.load()->version}}};
    }

    forecast::TimeSeries series_for(const ApiRequest& req, const Snapshot& s) const {
        const auto* id = detail::param(req, "sensor_id");
        if (!id) throw ArgumentError("missing query parameter 'sensor_id'");
        const auto* pname = detail::param(req, "pollutant");
        if (!pname) throw ArgumentError("missing query parameter 'pollutant'");
        const auto pollutant = sensor::parse_pollutant(*pname);
        if (!pollutant) throw ArgumentError("unknown pollutant '" + *pname + "'");
        const auto& stations = s.sensors->stations;
        if (std::none_of(stations.begin(), stations.end(), [&](const auto& st) { return st.station.id == *id; })) {
            throw NotFoundError("unknown sensor '" + *id + "'");
        }
        auto series = forecast::series_from_readings(s.sensors->readings, *id, *pollutant);
        if (series.values.size() < forecast::min_points(config_.forecast)) {
            throw PreconditionError("sensor '" + *id + "' has " + std::to_string(series.values.size()) +
                                    " readings; the forecast model needs " +
                                    std::to_string(forecast::min_points(config_.forecast)));
        }
        return series;
    }

    ApiResponse forecast_series(const ApiRequest& req) const {
        const auto s = cell_.load();
        const int horizon = detail::query_int(req, "horizon_hours", 24);
        if (horizon < 1 || horizon > config_.max_horizon_hours) {
            throw ArgumentError("horizon_hours must be in [1, " + std::to_string(config_.max_horizon_hours) + "]");
        }
        const auto series = series_for(req, *s);
        const auto m = forecast::fit(series, config_.forecast);
        const std::int64_t last = series.timestamps.back();
        const std::int64_t first = (last / 3600 + 1) * 3600;
        std::vector<std::int64_t> ahead;
        for (int h = 0; h < horizon; ++h) ahead.push_back(first + 3600LL * h);
        return {200,
                {{"sensor_id", series.sensor_id},
                 {"pollutant", std::string(sensor::to_string(series.pollutant))},
                 {"horizon_hours", horizon},
                 {"residual_sigma", m.residual_sigma},
                 {"observed", detail::series_json(series.timestamps, series.values)},
                 {"fitted", forecast::predict(m, series.timestamps)},
                 {"forecast", detail::series_json(ahead, forecast::predict(m, ahead))}}};
    }

    ApiResponse anomalies(const ApiRequest& req) const {
        const auto s = cell_.load();
        const double k = detail::query_double(req, "k_sigma", 3.0);
        if (!(k > 0.0) || !std::isfinite(k)) throw ArgumentError("k_sigma must be positive");
        const auto series = series_for(req, *s);
        const auto m = forecast::fit(series, config_.forecast);
        json list = json::array();
        for (const auto& a : forecast::detect_anomalies(m, series, k)) {
            list.push_back({{"timestamp", a.timestamp},
                            {"observed", a.observed},
                            {"expected", a.expected},
                            {"z_score", a.z_score}});
        }
        return {200,
                {{"sensor_id", series.sensor_id},
                 {"pollutant", std::string(sensor::to_string(series.pollutant))},
                 {"k_sigma", k},
                 {"residual_sigma", m.residual_sigma},
                 {"anomalies", std::move(list)}}};
    }

    ApiResponse benchmark() const {
        const auto dir = root_.dir() / kBenchDir;
        std::ifstream sin(dir / kBenchSummaryFile), ein(dir / kBenchErrorsFile);
        if (!sin || !ein) throw NotFoundError("no benchmark results in " + dir.string() + "; run fl-bench");
        json rows = json::array();
        for (const auto& r : fl::read_summary_csv(sin)) {
            rows.push_back({{"scenario", r.scenario},
                            {"user_id", r.user_id},
                            {"median_ae", r.median_ae},
                            {"mean_ae", r.mean_ae},
                            {"n", r.n}});
        }
        const auto errors = fl::read_errors_csv(ein);
        json boxes = json::object();
        for (const auto& [scenario, users] : errors.errors) {
            for (const auto& [user, e] : users) {
                const auto f = fl::five_number(e);
                boxes[scenario][user] = {{"min", f.min}, {"q1", f.q1}, {"median", f.median},
                                         {"q3", f.q3},   {"max", f.max}};
            }
        }
        return {200, {{"summary", std::move(rows)}, {"five_number", std::move(boxes)}}};
    }

    ServiceConfig config_;
    store::DataRoot root_;
    std::shared_ptr<const PoiProvider> provider_;
    SnapshotCell cell_;
    std::mutex mutate_;
    std::optional<fl::FederatedSession> session_;
};

}  // namespace airsense::service

#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "airsense/engine.hpp"
#include "airsense/federated.hpp"
#include "airsense/forecast.hpp"
#include "airsense/recsys.hpp"
#include "airsense/sensor.hpp"
#include "airsense/service.hpp"
#include "airsense/store.hpp"

namespace airsense::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Bad flag combinations found after CLI11 parsing.
class UsageError : public Error {
public:
    using Error::Error;
};

inline std::string fixed(double v, int digits = 4) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

// Median-AE table (user x scenario) followed by five-number summaries.
inline void print_bench_report(std::ostream& out, const std::vector<fl::SummaryRow>& rows,
                               const fl::BenchmarkResult& errors) {
    std::vector<std::string> users;
    std::map<std::string, std::map<std::string, double>> med;
    std::map<std::string, std::vector<double>> means;
    for (const auto& r : rows) {
        if (std::find(users.begin(), users.end(), r.user_id) == users.end()) users.push_back(r.user_id);
        med[r.user_id][r.scenario] = r.median_ae;
        means[r.scenario].push_back(r.mean_ae);
    }
    out << "median absolute error per client\n";
    out << std::left << std::setw(14) << "user";
    for (auto sc : fl::kScenarios) out << std::setw(14) << sc;
    out << '\n';
    for (const auto& u : users) {
        out << std::setw(14) << u;
        for (auto sc : fl::kScenarios) {
            const auto it = med[u].find(std::string(sc));
            out << std::setw(14) << (it == med[u].end() ? std::string("-") : fixed(it->second));
        }
        out << '\n';
    }
    out << std::setw(14) << "mean MAE";
    for (auto sc : fl::kScenarios) {
        const auto it = means.find(std::string(sc));
        out << std::setw(14) << (it == means.end() ? std::string("-") : fixed(fl::mean_of(it->second)));
    }
    out << "\n\nfive-number summary of absolute errors\n";
    out << std::setw(13) << "scenario" << std::setw(12) << "user" << std::right << std::setw(4) << "n"
        << std::setw(9) << "min" << std::setw(9) << "q1" << std::setw(9) << "median" << std::setw(9)
        << "q3" << std::setw(9) << "max" << '\n';
    for (auto sc : fl::kScenarios) {
        const auto it = errors.errors.find(std::string(sc));
        if (it == errors.errors.end()) continue;
        for (const auto& u : errors.clients) {
            const auto e = it->second.find(u);
            if (e == it->second.end()) continue;
            const auto f = fl::five_number(e->second);
            out << std::left << std::setw(13) << sc << std::setw(12) << u << std::right << std::setw(4)
                << e->second.size() << std::setw(9) << fixed(f.min, 3) << std::setw(9) << fixed(f.q1, 3)
                << std::setw(9) << fixed(f.median, 3) << std::setw(9) << fixed(f.q3, 3) << std::setw(9)
                << fixed(f.max, 3) << '\n';
        }
    }
    out << std::left;
}

namespace detail {

struct Options {
    std::string data_root;
    std::uint64_t seed = 0;
    int history_days = 2;

    std::string file;
    std::string on_error = "skip";

    int dimension = 16;
    int epochs = 30;
    double lr = 0.01;
    double reg = 0.02;
    std::string out;

    int rounds = 10;
    int local_epochs = 5;
    double fl_lr = 0.02;
    std::string clients = "top3";
    std::string source = "data-root";

    std::string user;
    double lat = kBariAldoMoro.lat;
    double lon = kBariAldoMoro.lon;
    double alpha = 0.5;
    double radius_m = 1000.0;
    int limit = 10;
    double a_ref = 300.0;

    std::string sensor_id;
    std::string pollutant = "NO2";
    int horizon_hours = 24;
    int k_daily = 3;
    int k_weekly = 0;
    int changepoints = 0;
    double k_sigma = 3.0;

    std::string config;
};

inline store::DataRoot require_root(const Options& o) {
    if (o.data_root.empty()) {
        throw UsageError("missing data root: pass --data-root or set AIRSENSE_DATA_ROOT");
    }
    return store::DataRoot(o.data_root);
}

inline forecast::TimeSeries load_series(const Options& o) {
    const auto root = require_root(o);
    const auto pollutant = sensor::parse_pollutant(o.pollutant);
    if (!pollutant) throw UsageError("unknown pollutant '" + o.pollutant + "'");
    const auto d = store::load_all(root);
    if (std::none_of(d.stations.begin(), d.stations.end(), [&](const auto& s) { return s.id == o.sensor_id; })) {
        throw NotFoundError("unknown sensor '" + o.sensor_id + "'");
    }
    return forecast::series_from_readings(d.readings, o.sensor_id, *pollutant);
}

inline forecast::ForecastConfig forecast_config(const Options& o) {
    return {.k_daily = o.k_daily, .k_weekly = o.k_weekly, .n_changepoints = o.changepoints};
}

inline int gen_data(const Options& o, std::ostream& out) {
    const auto root = require_root(o);
    store::DemoSpec spec;
    spec.seed = o.seed;
    spec.history_days = o.history_days;
    std::filesystem::create_directories(root.dir());
    const auto d = store::generate_demo_dataset(spec);
    store::save_all(root, d);
    out << "wrote " << root.dir().string() << ": " << d.stations.size() << " stations, "
        << d.readings.size() << " readings, " << d.pois.size() << " pois, " << d.ratings.size()
        << " ratings\n";
    return kExitOk;
}

inline int ingest(const Options& o, std::ostream& out, std::ostream& err) {
    const auto root = require_root(o);
    std::ifstream in(o.file);
    if (!in) throw NotFoundError("cannot open " + o.file);
    const auto parsed = sensor::parse_readings(in);
    const auto d = store::load_all(root);
    std::set<std::string> known;
    for (const auto& s : d.stations) known.insert(s.id);
    std::vector<sensor::SensorReading> accepted;
    std::size_t unknown = 0;
    for (const auto& r : parsed.records) {
        if (known.contains(r.sensor_id)) {
            accepted.push_back(r);
        } else {
            ++unknown;
            err << "rejected reading for unknown sensor '" << r.sensor_id << "' at " << r.timestamp << '\n';
        }
    }
    for (const auto& e : parsed.errors) err << "rejected " << e.what() << '\n';
    const auto rejected = parsed.errors.size() + unknown;
    if (rejected > 0 && o.on_error == "abort") {
        err << "aborted: " << rejected << " invalid line(s), nothing ingested\n";
        return kExitFailure;
    }
    if (!accepted.empty()) store::append_readings(root, accepted);
    out << "ingested " << accepted.size() << " readings, rejected " << rejected << '\n';
    return kExitOk;
}

inline recsys::MfHyperParams mf_params(const Options& o) {
    return {.dimension = o.dimension, .lr = o.lr, .reg = o.reg, .epochs = o.epochs, .seed = o.seed};
}

inline int train(const Options& o, std::ostream& out) {
    const auto root = require_root(o);
    const auto d = store::load_all(root);
    const auto m = recsys::train_mf(d.ratings, mf_params(o));
    const auto name = engine::save_model(root, m);
    if (!o.out.empty()) store::write_file_atomic(o.out, store::serialize_snapshot(recsys::to_json(m)));
    out << "saved " << name << ": " << d.ratings.size() << " ratings, " << m.user_bias.size()
        << " users, " << m.item_bias.size() << " pois, train MAE " << fixed(recsys::mae(m, d.ratings))
        << '\n';
    return kExitOk;
}

inline int fl_bench(const Options& o, std::ostream& out) {
    std::vector<recsys::Rating> ratings;
    std::vector<std::string> pois;
    std::filesystem::path dir = o.out;
    if (o.source == "planted") {
        ratings = store::generate_planted_ratings({.seed = o.seed});
        for (const auto& r : ratings) pois.push_back(r.poi_id);
        if (dir.empty()) throw UsageError("--source planted needs --out");
    } else {
        const auto root = require_root(o);
        const auto d = store::load_all(root);
        ratings = d.ratings;
        pois = engine::poi_ids(d.pois);
        if (dir.empty()) dir = root.dir() / service::kBenchDir;
    }
    std::vector<std::string> clients;
    try {
        clients = engine::resolve_clients(o.clients, ratings);
    } catch (const ArgumentError& e) {
        throw UsageError(e.what());
    }
    fl::FlHyperParams hp;
    hp.rounds = o.rounds;
    hp.local_epochs = o.local_epochs;
    hp.lr = o.fl_lr;
    hp.dimension = o.dimension;
    hp.seed = o.seed;
    const auto result = fl::run_baselines(ratings, pois, clients, hp);
    const auto rows = fl::summarize(result);
    std::filesystem::create_directories(dir);
    std::ostringstream errors_csv, summary_csv;
    fl::write_errors_csv(errors_csv, result);
    fl::write_summary_csv(summary_csv, rows);
    store::write_file_atomic(dir / service::kBenchErrorsFile, errors_csv.str());
    store::write_file_atomic(dir / service::kBenchSummaryFile, summary_csv.str());
    print_bench_report(out, rows, result);
    out << "\nwrote " << (dir / service::kBenchErrorsFile).string() << " and "
        << (dir / service::kBenchSummaryFile).string() << '\n';
    return kExitOk;
}

inline int report(const Options& o, std::ostream& out) {
    std::filesystem::path dir = o.out;
    if (dir.empty()) dir = require_root(o).dir() / service::kBenchDir;
    std::ifstream sin(dir / service::kBenchSummaryFile), ein(dir / service::kBenchErrorsFile);
    if (!sin || !ein) throw NotFoundError("no benchmark CSVs in " + dir.string() + "; run fl-bench first");
    const auto rows = fl::read_summary_csv(sin);
    const auto errors = fl::read_errors_csv(ein);
    print_bench_report(out, rows, errors);
    return kExitOk;
}

inline int recommend(const Options& o, std::ostream& out) {
    const auto root = require_root(o);
    const auto d = store::load_all(root);
    auto stored = engine::latest_model(root);
    const auto model = stored ? stored->model : recsys::train_mf(d.ratings, mf_params(o));
    const auto field = engine::field_from_status(engine::station_status(d.stations, d.readings));
    if (!field) throw PreconditionError("no station has readings; cannot build the AQI field");
    const recsys::RecQuery q{o.user, o.lat, o.lon, o.radius_m, o.alpha, o.limit};
    const auto ranked = recsys::recommend(model, *field, d.pois, q, {.a_ref = o.a_ref});
    out << "model " << (stored ? stored->name : std::string("in-memory")) << ", user " << o.user
        << (model.user_bias.contains(o.user) ? "" : " (cold start)") << ", alpha " << o.alpha << '\n';
    out << std::left << std::setw(5) << "rank" << std::setw(10) << "poi_id" << std::right << std::setw(8)
        << "s" << std::setw(8) << "s_mf" << std::setw(8) << "s_aqi" << std::setw(12) << "aqi"
        << std::setw(10) << "dist_m" << "  name\n";
    int rank = 1;
    for (const auto& r : ranked) {
        out << std::left << std::setw(5) << rank++ << std::setw(10) << r.poi.id << std::right << std::setw(8)
            << fixed(r.s) << std::setw(8) << fixed(r.s_mf) << std::setw(8) << fixed(r.s_aqi) << std::setw(12)
            << fixed(r.aqi_at_poi, 6) << std::setw(10) << fixed(r.distance_m, 1) << "  " << r.poi.name << '\n';
    }
    out << std::left;
    if (ranked.empty()) out << "no POI within " << o.radius_m << " m\n";
    return kExitOk;
}

inline int forecast_cmd(const Options& o, std::ostream& out) {
    const auto series = load_series(o);
    const auto m = forecast::fit(series, forecast_config(o));
    const std::int64_t first = (series.timestamps.back() / 3600 + 1) * 3600;
    std::vector<std::int64_t> ahead;
    for (int h = 0; h < o.horizon_hours; ++h) ahead.push_back(first + 3600LL * h);
    const auto pred = forecast::predict(m, ahead);
    out << o.sensor_id << ' ' << o.pollutant << ": " << series.values.size()
        << " points, residual sigma " << fixed(m.residual_sigma) << ", daily amplitude "
        << fixed(forecast::daily_amplitude(m)) << '\n';
    std::ostringstream csv_text;
    csv_text << "timestamp,value\n";
    for (std::size_t i = 0; i < ahead.size(); ++i) {
        out << ahead[i] << "  " << fixed(pred[i]) << '\n';
        csv_text << ahead[i] << ',' << csv::format_double(pred[i]) << '\n';
    }
    if (!o.out.empty()) store::write_file_atomic(o.out, csv_text.str());
    return kExitOk;
}

inline int anomalies_cmd(const Options& o, std::ostream& out) {
    const auto series = load_series(o);
    const auto m = forecast::fit(series, forecast_config(o));
    const auto found = forecast::detect_anomalies(m, series, o.k_sigma);
    out << o.sensor_id << ' ' << o.pollutant << ": " << found.size() << " anomalies at k_sigma "
        << o.k_sigma << " (residual sigma " << fixed(m.residual_sigma) << ")\n";
    std::ostringstream csv_text;
    csv_text << "timestamp,observed,expected,z_score\n";
    for (const auto& a : found) {
        out << a.timestamp << "  observed " << fixed(a.observed) << "  expected " << fixed(a.expected)
            << "  z " << fixed(a.z_score, 2) << '\n';
        csv_text << a.timestamp << ',' << csv::format_double(a.observed) << ','
                 << csv::format_double(a.expected) << ',' << csv::format_double(a.z_score) << '\n';
    }
    if (!o.out.empty()) store::write_file_atomic(o.out, csv_text.str());
    return kExitOk;
}

inline int serve(const Options& o, std::ostream& out) {
    std::optional<std::filesystem::path> file;
    if (!o.config.empty()) file = o.config;
    auto cfg = service::load_config(file);
    if (!o.data_root.empty()) cfg.data_root = o.data_root;
    service::Service svc(cfg);
    httplib::Server server;
    out << "listening on http://" << cfg.host << ':' << cfg.port << " (data root " << cfg.data_root << ")\n"
        << std::flush;
    svc.serve(server);
    return kExitOk;
}

}  // namespace detail

// Entry point shared by the binary and the tests.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    detail::Options o;
    CLI::App app{"Pollution-aware POI recommender: data, training, federated benchmark, service"};
    app.name("airsense");
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    auto data_root = [&](CLI::App* sub) {
        sub->add_option("--data-root", o.data_root, "dataset directory (falls back to $AIRSENSE_DATA_ROOT)")
            ->envname("AIRSENSE_DATA_ROOT")
            ->type_name("DIR");
    };
    auto seed = [&](CLI::App* sub) { sub->add_option("--seed", o.seed, "random seed"); };
    auto out_opt = [&](CLI::App* sub, const std::string& what) {
        sub->add_option("--out", o.out, what)->type_name("PATH")->default_str("none");
    };

    auto* gen = app.add_subcommand("gen-data", "generate the synthetic demo dataset");
    data_root(gen);
    seed(gen);
    gen->add_option("--history-days", o.history_days, "days of per-minute sensor history")
        ->check(CLI::Range(0, 60));

    auto* ing = app.add_subcommand("ingest", "append a sensor readings CSV to the dataset");
    data_root(ing);
    ing->add_option("--file", o.file, "readings CSV to ingest")->required()->type_name("PATH");
    ing->add_option("--on-error", o.on_error, "invalid lines: skip them or abort the ingest")
        ->check(CLI::IsMember({"skip", "abort"}));

    auto* tr = app.add_subcommand("train", "train the matrix factorization model and store a snapshot");
    data_root(tr);
    seed(tr);
    tr->add_option("--dimension", o.dimension, "embedding dimension")->check(CLI::Range(1, 512));
    tr->add_option("--epochs", o.epochs, "SGD epochs")->check(CLI::Range(0, 100000));
    tr->add_option("--lr", o.lr, "learning rate")->check(CLI::PositiveNumber);
    tr->add_option("--reg", o.reg, "L2 regularization")->check(CLI::NonNegativeNumber);
    out_opt(tr, "also write the model JSON here");

    auto* fb = app.add_subcommand("fl-bench", "centralized vs distributed vs federated benchmark");
    data_root(fb);
    seed(fb);
    fb->add_option("--rounds", o.rounds, "federated rounds")->check(CLI::Range(0, 10000));
    fb->add_option("--local-epochs", o.local_epochs, "client epochs per round")->check(CLI::Range(0, 10000));
    fb->add_option("--dimension", o.dimension, "embedding dimension")->check(CLI::Range(1, 512));
    fb->add_option("--lr", o.fl_lr, "client learning rate")->check(CLI::PositiveNumber);
    fb->add_option("--clients", o.clients, "top3 (or topN) or a comma-separated user list");
    fb->add_option("--source", o.source, "ratings from the data root or the planted synthetic set")
        ->check(CLI::IsMember({"data-root", "planted"}));
    out_opt(fb, "directory for errors.csv and summary.csv (default <data-root>/bench)");

    auto* rec = app.add_subcommand("recommend", "rank nearby POIs for a user");
    data_root(rec);
    seed(rec);
    rec->add_option("--user", o.user, "user id (unknown ids take the cold-start path)")->required();
    rec->add_option("--lat", o.lat, "latitude")->check(CLI::Range(-90.0, 90.0));
    rec->add_option("--lon", o.lon, "longitude")->check(CLI::Range(-180.0, 180.0));
    rec->add_option("--alpha", o.alpha, "preference weight; 0 ranks by air quality only")
        ->check(CLI::Range(0.0, 1.0));
    rec->add_option("--radius-m", o.radius_m, "search radius in meters")->check(CLI::PositiveNumber);
    rec->add_option("--limit", o.limit, "maximum results")->check(CLI::Range(1, 1000000));
    rec->add_option("--a-ref", o.a_ref, "AQI at which the air-quality score reaches 0")
        ->check(CLI::PositiveNumber);
    rec->add_option("--dimension", o.dimension, "embedding dimension when no model is stored")
        ->check(CLI::Range(1, 512));

    auto series_opts = [&](CLI::App* sub) {
        data_root(sub);
        sub->add_option("--sensor", o.sensor_id, "station id")->required();
        sub->add_option("--pollutant", o.pollutant, "CO, NO, NO2, O3, SO2, PM1, PM2.5 or PM10");
        sub->add_option("--k-daily", o.k_daily, "daily Fourier order")->check(CLI::Range(0, 60));
        sub->add_option("--k-weekly", o.k_weekly, "weekly Fourier order")->check(CLI::Range(0, 60));
        sub->add_option("--changepoints", o.changepoints, "trend changepoints")->check(CLI::Range(0, 100));
    };
    auto* fc = app.add_subcommand("forecast", "fit a sensor series and predict ahead");
    series_opts(fc);
    fc->add_option("--horizon-hours", o.horizon_hours, "hours to predict")->check(CLI::Range(1, 24 * 366));
    out_opt(fc, "also write the forecast CSV here");

    auto* an = app.add_subcommand("anomalies", "flag readings far from the fitted model");
    series_opts(an);
    an->add_option("--k-sigma", o.k_sigma, "threshold in residual standard deviations")
        ->check(CLI::PositiveNumber);
    out_opt(an, "also write the anomaly CSV here");

    auto* sv = app.add_subcommand("serve", "run the HTTP API");
    data_root(sv);
    sv->add_option("--config", o.config, "service config JSON (AIRSENSE_BIND overrides the address)")
        ->type_name("PATH")
        ->default_str("none");

    auto* rp = app.add_subcommand("report", "print the benchmark tables from fl-bench CSVs");
    data_root(rp);
    out_opt(rp, "directory holding the CSVs (default <data-root>/bench)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) return detail::gen_data(o, out);
        if (ing->parsed()) return detail::ingest(o, out, err);
        if (tr->parsed()) return detail::train(o, out);
        if (fb->parsed()) return detail::fl_bench(o, out);
        if (rec->parsed()) return detail::recommend(o, out);
        if (fc->parsed()) return detail::forecast_cmd(o, out);
        if (an->parsed()) return detail::anomalies_cmd(o, out);
        if (sv->parsed()) return detail::serve(o, out);
        if (rp->parsed()) return detail::report(o, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\nrun with --help for usage\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace airsense::cli

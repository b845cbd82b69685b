// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "airsense/cli.hpp"
#include "airsense/engine.hpp"
#include "airsense/federated.hpp"
#include "airsense/forecast.hpp"
#include "airsense/recsys.hpp"
#include "airsense/store.hpp"

using namespace airsense;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool ok = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string sci(double v) {
    std::ostringstream s;
    s << std::scientific;
    s.precision(1);
    s << v;
    return s.str();
}

std::string num(double v, int digits = 4) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(digits);
    s << v;
    return s.str();
}

// ---------------------------------------------------------------------------
// Shared fixtures

struct Demo {
    store::Dataset data;
    recsys::MfModel model;
    field::AqiField field;
};

Demo make_demo(const std::vector<recsys::Rating>& extra = {}) {
    Demo d;
    d.data = store::generate_demo_dataset();
    d.data.ratings.insert(d.data.ratings.end(), extra.begin(), extra.end());
    d.model = recsys::train_mf(d.data.ratings);
    d.field = *engine::field_from_status(engine::station_status(d.data.stations, d.data.readings));
    return d;
}

std::vector<std::string> ids_of(const std::vector<recsys::ScoredPoi>& v) {
    std::vector<std::string> out;
    for (const auto& s : v) out.push_back(s.poi.id);
    return out;
}

// Candidates inside the radius, computed without the recommender.
std::vector<const recsys::Poi*> candidates(const std::vector<recsys::Poi>& pois, LatLon at, double radius) {
    std::vector<const recsys::Poi*> out;
    for (const auto& p : pois) {
        if (haversine_m(at, {p.latitude, p.longitude}) <= radius) out.push_back(&p);
    }
    return out;
}

// Biased-MF prediction written out from the model tables, clamped to the scale.
double mf_score(const recsys::MfModel& m, const std::string& u, const std::string& i) {
    const auto& pu = m.user_vecs.at(u);
    const auto& qi = m.item_vecs.at(i);
    double dot = 0.0;
    for (std::size_t k = 0; k < pu.size(); ++k) dot += pu[k] * qi[k];
    return std::clamp(m.global_mean + m.user_bias.at(u) + m.item_bias.at(i) + dot, 1.0, 5.0);
}

// ---------------------------------------------------------------------------
// Checks

Outcome alpha_extremes() {
    const auto d = make_demo();
    std::vector<std::string> users;
    for (const auto& [u, _] : d.model.user_bias) users.push_back(u);
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> pick_user(0, users.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_poi(0, d.data.pois.size() - 1);
    std::uniform_real_distribution<double> jitter(-300.0, 300.0);

    std::size_t total = 0;
    for (int q = 0; q < 100; ++q) {
        const auto& anchor = d.data.pois[pick_poi(rng)];
        const auto at = offset_m({anchor.latitude, anchor.longitude}, jitter(rng), jitter(rng));
        const auto& user = users[pick_user(rng)];
        const auto cand = candidates(d.data.pois, at, 1000.0);
        total += cand.size();
        recsys::RecQuery query{user, at.lat, at.lon, 1000.0, 0.0, static_cast<int>(d.data.pois.size())};

        std::vector<std::pair<double, std::string>> by_aqi, by_pref;
        for (const auto* p : cand) {
            by_aqi.emplace_back(field::eval_field(d.field, p->latitude, p->longitude), p->id);
            by_pref.emplace_back(-mf_score(d.model, user, p->id), p->id);
        }
        std::sort(by_aqi.begin(), by_aqi.end());
        std::sort(by_pref.begin(), by_pref.end());
        std::vector<std::string> want_aqi, want_pref;
        for (const auto& [_, id] : by_aqi) want_aqi.push_back(id);
        for (const auto& [_, id] : by_pref) want_pref.push_back(id);

        if (ids_of(recsys::recommend(d.model, d.field, d.data.pois, query)) != want_aqi) {
            return {false, "query " + std::to_string(q) + ": alpha=0 order differs from AQI ascending"};
        }
        query.alpha = 1.0;
        if (ids_of(recsys::recommend(d.model, d.field, d.data.pois, query)) != want_pref) {
            return {false, "query " + std::to_string(q) + ": alpha=1 order differs from preference order"};
        }
    }
    return {true, "100 queries, " + std::to_string(total) + " ranked candidates"};
}

Outcome blend_exact() {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss(0.0, 0.5);
    std::uniform_real_distribution<double> spread(-900.0, 900.0), aqi(0.0, 400.0);
    double worst = 0.0;
    std::size_t checked = 0;
    for (int trial = 0; trial < 20; ++trial) {
        recsys::MfModel m;
        m.dimension = 4;
        m.global_mean = 3.0 + gauss(rng);
        m.user_bias["u"] = gauss(rng);
        m.user_vecs["u"] = {gauss(rng), gauss(rng), gauss(rng), gauss(rng)};
        std::vector<recsys::Poi> pois;
        for (int i = 0; i < 60; ++i) {
            const auto p = offset_m(kBariAldoMoro, spread(rng), spread(rng));
            const std::string id = "P" + std::to_string(i);
            pois.push_back({id, id, "cafe", p.lat, p.lon});
            m.item_bias[id] = gauss(rng);
            m.item_vecs[id] = {gauss(rng), gauss(rng), gauss(rng), gauss(rng)};
        }
        std::vector<field::AqiSample> samples;
        for (int s = 0; s < 6; ++s) {
            const auto p = offset_m(kBariAldoMoro, spread(rng), spread(rng));
            samples.push_back({p.lat, p.lon, aqi(rng), std::nullopt});
        }
        const auto f = field::fit_field(samples);
        for (int k = 0; k <= 10; ++k) {
            const double alpha = k / 10.0;
            const recsys::RecQuery q{"u", kBariAldoMoro.lat, kBariAldoMoro.lon, 5000.0, alpha, 1000};
            for (const auto& sp : recsys::recommend(m, f, pois, q)) {
                const double s_mf = (mf_score(m, "u", sp.poi.id) - 1.0) / 4.0;
                const double a = std::clamp(field::eval_field(f, sp.poi.latitude, sp.poi.longitude), 0.0, 300.0);
                const double s_aqi = (300.0 - a) / 300.0;
                const double want = alpha * s_mf + (1.0 - alpha) * s_aqi;
                worst = std::max({worst, std::fabs(sp.s - want), std::fabs(sp.s_mf - s_mf),
                                  std::fabs(sp.s_aqi - s_aqi)});
                ++checked;
            }
        }
    }
    return {worst <= 1e-12, std::to_string(checked) + " scores, max |diff| " + sci(worst)};
}

Outcome inter_user() {
    // Two planted personas with opposite tastes around the city centre: one
    // likes the most polluted POIs, the other the cleanest.
    const auto base = store::generate_demo_dataset();
    const auto f = *engine::field_from_status(engine::station_status(base.stations, base.readings));
    const LatLon at = kBariAldoMoro;
    std::vector<std::pair<double, std::string>> near;
    for (const auto* p : candidates(base.pois, at, 1000.0)) {
        near.emplace_back(field::eval_field(f, p->latitude, p->longitude), p->id);
    }
    std::sort(near.begin(), near.end());
    if (near.size() < 40) return {false, "only " + std::to_string(near.size()) + " POIs near the centre"};
    std::vector<recsys::Rating> planted;
    for (std::size_t k = 0; k < 20; ++k) {
        const auto& clean = near[k].second;
        const auto& dirty = near[near.size() - 1 - k].second;
        planted.push_back({"UX-A", dirty, 5.0});
        planted.push_back({"UX-A", clean, 1.0});
        planted.push_back({"UX-B", dirty, 1.0});
        planted.push_back({"UX-B", clean, 5.0});
    }
    const auto d = make_demo(planted);
    auto rec = [&](const std::string& user, double alpha) {
        return ids_of(recsys::recommend(d.model, d.field, d.data.pois, {user, at.lat, at.lon, 1000.0, alpha, 10}));
    };
    const auto user1 = rec("UX-A", 1.0);
    const auto user2 = rec("UX-B", 0.3);
    const bool differ = user1 != user2;
    const bool same_at_zero = rec("UX-A", 0.0) == rec("UX-B", 0.0);
    std::size_t shared = 0;
    for (const auto& id : user1) shared += std::count(user2.begin(), user2.end(), id);
    return {differ && same_at_zero,
            std::string("alpha 1 vs 0.3 lists ") + (differ ? "differ" : "identical") + " (" +
                std::to_string(shared) + "/10 shared), alpha 0 lists " +
                (same_at_zero ? "identical" : "differ")};
}

Outcome rbf_exact() {
    const auto samples = field::simulate_sensor_grid(kBariAldoMoro, 8, 1000.0, 20.0, 70.0, 0);
    const auto f = field::fit_field(samples, std::nullopt, 0.0);
    double node = 0.0, far = 0.0, mean = 0.0;
    for (const auto& s : samples) {
        node = std::max(node, std::fabs(field::eval_field(f, s.latitude, s.longitude) - s.aqi));
        mean += s.aqi;
    }
    mean /= static_cast<double>(samples.size());
    for (int k = 0; k < 16; ++k) {
        const double ang = 2 * std::numbers::pi * k / 16;
        for (double r : {100e3, 250e3, 1000e3}) {
            const auto p = offset_m(kBariAldoMoro, r * std::cos(ang), r * std::sin(ang));
            far = std::max(far, std::fabs(field::eval_field(f, p.lat, p.lon) - f.mean_offset));
        }
    }
    const double offset_err = std::fabs(f.mean_offset - mean);
    return {node <= 1e-6 && far <= 1e-6 && offset_err <= 1e-9,
            "node err " + sci(node) + ", far-field err " + sci(far) +
                ", mean_offset vs sample mean " + sci(offset_err)};
}

forecast::TimeSeries planted_series(double noise, std::uint64_t seed) {
    constexpr std::int64_t t0 = 1706486400;
    forecast::TimeSeries s;
    s.sensor_id = "S";
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, noise > 0 ? noise : 1.0);
    for (std::int64_t t = t0; t < t0 + 14 * forecast::kDaySeconds; t += 3600) {
        const double day = static_cast<double>(t - t0) / forecast::kDaySeconds;
        double v = 40.0 + 0.5 * day + 10.0 * std::sin(2 * std::numbers::pi * day);
        if (noise > 0) v += n(rng);
        s.timestamps.push_back(t);
        s.values.push_back(v);
    }
    return s;
}

Outcome forecast_recovery() {
    constexpr double amp = 10.0, sigma = 0.5;
    const auto noisy = planted_series(sigma, 1);
    const auto m = forecast::fit(noisy);
    const auto pred = forecast::predict(m, noisy.timestamps);
    double mean = 0.0;
    for (double v : noisy.values) mean += v;
    mean /= static_cast<double>(noisy.values.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        ss_res += (noisy.values[i] - pred[i]) * (noisy.values[i] - pred[i]);
        ss_tot += (noisy.values[i] - mean) * (noisy.values[i] - mean);
    }
    const double r2 = 1.0 - ss_res / ss_tot;
    const double amp_err = std::fabs(forecast::daily_amplitude(m) - amp) / amp;

    auto spiked = planted_series(0.0, 0);
    constexpr std::size_t at = 200;
    spiked.values[at] += 10.0 * sigma;
    const auto found = forecast::detect_anomalies(forecast::fit(spiked), spiked, 3.0);
    const bool spike_ok = found.size() == 1 && found[0].timestamp == spiked.timestamps[at];

    return {amp_err <= 0.05 && r2 > 0.95 && spike_ok,
            "amplitude err " + num(100 * amp_err, 2) + "%, R2 " + num(r2) + ", spike flags " +
                std::to_string(found.size()) + (spike_ok ? " (the spike only)" : "")};
}

Outcome fl_ordering() {
    const auto ratings = store::generate_planted_ratings({.seed = 0});
    std::vector<std::string> pois;
    for (const auto& r : ratings) pois.push_back(r.poi_id);
    const auto clients = fl::top_users_by_count(ratings, 3);
    const auto res = fl::run_baselines(ratings, pois, clients);
    int wins = 0;
    double fed_mae = 0.0, dist_mae = 0.0;
    std::string per;
    for (const auto& c : clients) {
        const auto& fe = res.errors.at("federated").at(c);
        const auto& de = res.errors.at("distributed").at(c);
        const double fm = fl::median(fe), dm = fl::median(de);
        wins += fm <= dm;
        fed_mae += fl::mean_of(fe) / static_cast<double>(clients.size());
        dist_mae += fl::mean_of(de) / static_cast<double>(clients.size());
        per += " " + c + " " + num(fm, 3) + "/" + num(dm, 3);
    }
    return {wins >= 2 && fed_mae < dist_mae,
            "median AE fed/dist" + per + "; " + std::to_string(wins) + "/3 clients, mean MAE fed " +
                num(fed_mae) + " vs dist " + num(dist_mae)};
}

// True if any object key anywhere mentions the user side of the model.
bool has_user_field(const nlohmann::json& j) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) {
            if (k.find("user") != std::string::npos || has_user_field(v)) return true;
        }
    } else if (j.is_array()) {
        for (const auto& v : j) {
            if (has_user_field(v)) return true;
        }
    }
    return false;
}

Outcome privacy() {
    const auto ratings = store::generate_planted_ratings({.seed = 0});
    std::vector<std::string> pois;
    for (const auto& r : ratings) pois.push_back(r.poi_id);
    fl::FlHyperParams hp;
    hp.rounds = 100;
    const auto clients = fl::top_users_by_count(ratings, 3);
    const auto setup = fl::prepare(ratings, pois, clients, hp);
    fl::FederatedSession session(fl::server_from_model(setup.base), setup.clients, hp);
    const std::set<std::string> top{"n_examples", "item_deltas"}, delta{"poi_id", "d_vec", "d_bias"};
    const std::set<std::string> item_ids(pois.begin(), pois.end());
    std::size_t messages = 0, bad = 0;
    session.set_wire_observer([&](const nlohmann::json& wire) {
        ++messages;
        std::set<std::string> keys;
        for (const auto& [k, _] : wire.items()) keys.insert(k);
        bool ok = keys == top && wire["n_examples"].is_number_unsigned() && wire["item_deltas"].is_array() &&
                  !has_user_field(wire);
        if (ok) {
            for (const auto& d : wire["item_deltas"]) {
                std::set<std::string> dk;
                for (const auto& [k, _] : d.items()) dk.insert(k);
                ok = ok && dk == delta && item_ids.contains(d["poi_id"].get<std::string>());
            }
        }
        bad += !ok;
    });
    for (int r = 0; r < hp.rounds; ++r) session.run_round();
    return {messages > 0 && bad == 0,
            std::to_string(messages) + " messages over 100 rounds, " + std::to_string(bad) + " with other fields"};
}

Outcome dataset_stats() {
    const auto d = store::generate_demo_dataset();
    std::set<std::string> users, rated_pois, pois;
    std::size_t off_scale = 0;
    for (const auto& r : d.ratings) {
        users.insert(r.user_id);
        rated_pois.insert(r.poi_id);
        off_scale += !(r.value == 1 || r.value == 2 || r.value == 3 || r.value == 4 || r.value == 5);
    }
    for (const auto& p : d.pois) pois.insert(p.id);
    const bool ok = d.ratings.size() == 11606 && users.size() == 8982 && pois.size() == 2594 &&
                    d.pois.size() == 2594 && rated_pois.size() == 2594 && off_scale == 0;
    return {ok, std::to_string(d.ratings.size()) + " ratings, " + std::to_string(users.size()) + " users, " +
                    std::to_string(pois.size()) + " POIs, " + std::to_string(off_scale) + " off-scale"};
}

std::map<std::string, std::string> hash_tree(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = store::sha256_hex(store::read_file(e.path()));
    }
    return out;
}

int cli(std::vector<std::string> args) {
    args.insert(args.begin(), "airsense");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    return cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome determinism() {
    const auto base = fs::temp_directory_path() / ("airsense-acceptance-" + std::to_string(::getpid()));
    fs::remove_all(base);
    std::vector<std::map<std::string, std::string>> hashes;
    std::vector<double> runs;
    for (int i = 0; i < 2; ++i) {
        const auto root = (base / ("run" + std::to_string(i))).string();
        const auto t0 = Clock::now();
        const int code = cli({"gen-data", "--data-root", root, "--seed", "42"}) |
                         cli({"train", "--data-root", root, "--seed", "42"}) |
                         cli({"fl-bench", "--data-root", root, "--seed", "42"});
        runs.push_back(seconds_since(t0));
        if (code != 0) {
            fs::remove_all(base);
            return {false, "pipeline exited nonzero on run " + std::to_string(i + 1)};
        }
        hashes.push_back(hash_tree(root));
    }
    fs::remove_all(base);
    const bool same = hashes[0] == hashes[1] && hashes[0].size() >= 7;
    return {same, std::to_string(hashes[0].size()) + " files " + (same ? "hash-identical" : "differ") +
                      ", single run " + num(runs[0], 2) + " s"};
}

}  // namespace

int main() {
    struct Check {
        const char* name;
        double limit_s;
        std::function<Outcome()> run;
    };
    const std::vector<Check> checks{
        {"alpha-extremes", 10.0, alpha_extremes}, {"blend", 1.0, blend_exact},
        {"inter-user", 5.0, inter_user},          {"rbf-exactness", 1.0, rbf_exact},
        {"forecast-recovery", 5.0, forecast_recovery}, {"fl-ordering", 60.0, fl_ordering},
        {"privacy", 10.0, privacy},               {"dataset-stats", 10.0, dataset_stats},
    };
    int failures = 0;
    auto report = [&](const char* name, bool ok, double secs, const std::string& limit, const std::string& detail) {
        failures += !ok;
        std::cout << (ok ? "PASS " : "FAIL ") << name << " [" << num(secs, 3) << " s, limit " << limit << "] "
                  << detail << std::endl;
    };
    for (const auto& c : checks) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = seconds_since(t0);
        report(c.name, o.ok && secs < c.limit_s, secs, num(c.limit_s, 0) + " s", o.detail);
    }

    // Two seeded pipeline runs; the verification run must stay under twice
    // the first.
    {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = determinism();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double total = seconds_since(t0);
        const auto pos = o.detail.rfind("single run ");
        const double single = pos == std::string::npos ? 0.0 : std::stod(o.detail.substr(pos + 11));
        const double extra = total - single;
        report("determinism", o.ok && single > 0 && extra < 2.0 * single, total,
               "verification " + num(extra, 2) + " s < 2x single", o.detail);
    }
    return failures == 0 ? 0 : 1;
}

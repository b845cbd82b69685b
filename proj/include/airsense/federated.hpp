#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "airsense/csv.hpp"
#include "airsense/errors.hpp"
#include "airsense/recsys.hpp"
#include "json.hpp"

// Simulated client/server federated training of the MF recommender. Clients
// keep their user embedding and bias private and send only item-embedding
// deltas (plus an example count) to the server, which combines them with
// FedAvg and broadcasts the updated item table.
namespace airsense::fl {

using recsys::MfHyperParams;
using recsys::MfModel;
using recsys::Rating;
using recsys::Vec;

struct ItemEmbedding {
    Vec vec;
    double bias = 0.0;

    bool operator==(const ItemEmbedding&) const = default;
};

using ItemTable = std::map<std::string, ItemEmbedding>;  // poi_id -> embedding
using ItemDelta = std::map<std::string, ItemEmbedding>;  // poi_id -> change

// The only record a client ever sends to the server.
struct ClientMessage {
    std::size_t n_examples = 0;
    ItemDelta deltas;

    bool operator==(const ClientMessage&) const = default;
};

struct ClientState {
    std::string user_id;
    Vec user_vec;          // private
    double user_bias = 0;  // private
    ItemTable local_items;
    std::vector<Rating> local_ratings;
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> holdout_idx;

    std::vector<Rating> train_ratings() const {
        std::vector<Rating> out;
        for (auto i : train_idx) out.push_back(local_ratings[i]);
        return out;
    }
    std::vector<Rating> holdout_ratings() const {
        std::vector<Rating> out;
        for (auto i : holdout_idx) out.push_back(local_ratings[i]);
        return out;
    }
};

struct ServerState {
    int dimension = 16;
    double global_mean = 3.0;
    ItemTable global_items;
    int round_counter = 0;
};

struct RoundReport {
    int round = 0;
    std::vector<std::string> participating_clients;
    std::vector<std::string> skipped_clients;
    std::map<std::string, double> per_client_holdout_mae;
    double aggregate_delta_norm = 0.0;
};

struct FlHyperParams {
    int rounds = 10;
    int local_epochs = 5;
    double lr = 0.02;
    double reg = 0.02;
    int dimension = 16;
    std::uint64_t seed = 0;
    int base_epochs = 30;
    double base_lr = 0.01;
    double holdout_fraction = 0.2;
    double init_std = 0.1;
    bool parallel_clients = true;
};

// ---------------------------------------------------------------------------
// Wire format

inline nlohmann::json to_json(const ClientMessage& m) {
    nlohmann::json deltas = nlohmann::json::array();
    for (const auto& [poi, d] : m.deltas) {
        deltas.push_back({{"poi_id", poi}, {"d_vec", d.vec}, {"d_bias", d.bias}});
    }
    return {{"n_examples", m.n_examples}, {"item_deltas", std::move(deltas)}};
}

inline ClientMessage client_message_from_json(const nlohmann::json& j) {
    static const std::set<std::string> kTop{"n_examples", "item_deltas"};
    static const std::set<std::string> kDelta{"poi_id", "d_vec", "d_bias"};
    for (const auto& [k, _] : j.items()) {
        if (!kTop.contains(k)) throw ProtocolError("client message: unexpected field '" + k + "'");
    }
    ClientMessage m;
    m.n_examples = j.at("n_examples").get<std::size_t>();
    for (const auto& d : j.at("item_deltas")) {
        for (const auto& [k, _] : d.items()) {
            if (!kDelta.contains(k)) {
                throw ProtocolError("client message: unexpected delta field '" + k + "'");
            }
        }
        m.deltas[d.at("poi_id").get<std::string>()] = {d.at("d_vec").get<Vec>(),
                                                       d.at("d_bias").get<double>()};
    }
    return m;
}

// ---------------------------------------------------------------------------
// Protocol steps

inline MfHyperParams local_hp(const FlHyperParams& hp, int epochs, std::uint64_t seed) {
    MfHyperParams m;
    m.dimension = hp.dimension;
    m.lr = hp.lr;
    m.reg = hp.reg;
    m.epochs = epochs;
    m.seed = seed;
    m.init_std = hp.init_std;
    return m;
}

// Builds the client's on-device MF model: its private user state plus the
// given item table.
inline MfModel client_model(const ClientState& client, const ItemTable& items, int dimension,
                            double global_mean) {
    MfModel m;
    m.dimension = dimension;
    m.global_mean = global_mean;
    m.user_vecs[client.user_id] = client.user_vec;
    m.user_bias[client.user_id] = client.user_bias;
    for (const auto& [id, e] : items) {
        m.item_vecs[id] = e.vec;
        m.item_bias[id] = e.bias;
    }
    return m;
}

struct LocalUpdate {
    ClientMessage message;
    bool skipped = false;
};

// Copies the broadcast items, runs local SGD over the client's training
// ratings (updating user and item embeddings), and returns the item change
// restricted to POIs the client rated. User state stays in `client`.
inline LocalUpdate client_local_update(ClientState& client, const ServerState& server,
                                       const FlHyperParams& hp, std::uint64_t round_seed) {
    LocalUpdate out;
    const auto train = client.train_ratings();
    if (train.empty()) {
        out.skipped = true;
        return out;
    }
    auto model = client_model(client, server.global_items, server.dimension, server.global_mean);
    model = recsys::continue_training(std::move(model), train,
                                      local_hp(hp, hp.local_epochs, round_seed));

    client.user_vec = model.user_vecs.at(client.user_id);
    client.user_bias = model.user_bias.at(client.user_id);
    client.local_items.clear();
    for (auto& [id, v] : model.item_vecs) {
        client.local_items[id] = {std::move(v), model.item_bias.at(id)};
    }

    out.message.n_examples = train.size();
    for (const auto& r : train) {
        if (out.message.deltas.contains(r.poi_id)) continue;
        const auto& local = client.local_items.at(r.poi_id);
        ItemEmbedding d{Vec(static_cast<std::size_t>(server.dimension)), 0.0};
        const auto g = server.global_items.find(r.poi_id);
        for (std::size_t k = 0; k < d.vec.size(); ++k) {
            d.vec[k] = local.vec[k] - (g != server.global_items.end() ? g->second.vec[k] : 0.0);
        }
        d.bias = local.bias - (g != server.global_items.end() ? g->second.bias : 0.0);
        out.message.deltas[r.poi_id] = std::move(d);
    }
    return out;
}

// Per-POI weighted mean of the client deltas, weights = example counts of
// the clients that touched that POI. POIs nobody touched are absent (zero).
inline ItemDelta fedavg(const std::vector<ClientMessage>& messages) {
    if (messages.empty()) throw ArgumentError("fedavg: no client messages");
    std::size_t dim = 0;
    bool have_dim = false;
    for (const auto& m : messages) {
        for (const auto& [poi, d] : m.deltas) {
            if (!have_dim) {
                dim = d.vec.size();
                have_dim = true;
            } else if (d.vec.size() != dim) {
                throw ProtocolError("fedavg: delta for '" + poi + "' has dimension " +
                                    std::to_string(d.vec.size()) + ", expected " +
                                    std::to_string(dim));
            }
        }
    }
    // Sum in message order per POI (std::map keeps POIs sorted), so the
    // result does not depend on which client finished first.
    std::map<std::string, double> weight;
    ItemDelta sum;
    for (const auto& m : messages) {
        const double w = static_cast<double>(m.n_examples);
        for (const auto& [poi, d] : m.deltas) {
            auto& acc = sum[poi];
            if (acc.vec.empty()) acc.vec.assign(dim, 0.0);
            for (std::size_t k = 0; k < dim; ++k) acc.vec[k] += w * d.vec[k];
            acc.bias += w * d.bias;
            weight[poi] += w;
        }
    }
    for (auto& [poi, acc] : sum) {
        const double w = weight[poi];
        if (w <= 0.0) {
            std::fill(acc.vec.begin(), acc.vec.end(), 0.0);
            acc.bias = 0.0;
            continue;
        }
        for (auto& x : acc.vec) x /= w;
        acc.bias /= w;
    }
    return sum;
}

inline double apply_delta(ServerState& server, const ItemDelta& delta) {
    double sq = 0.0;
    for (const auto& [poi, d] : delta) {
        auto it = server.global_items.find(poi);
        if (it == server.global_items.end()) {
            it = server.global_items
                     .emplace(poi, ItemEmbedding{Vec(d.vec.size(), 0.0), 0.0})
                     .first;
        }
        for (std::size_t k = 0; k < d.vec.size(); ++k) {
            it->second.vec[k] += d.vec[k];
            sq += d.vec[k] * d.vec[k];
        }
        it->second.bias += d.bias;
        sq += d.bias * d.bias;
    }
    return std::sqrt(sq);
}

inline double client_predict(const ClientState& c, const ItemTable& items, double global_mean,
                             const std::string& poi_id) {
    double r = global_mean + c.user_bias;
    const auto it = items.find(poi_id);
    if (it != items.end()) r += it->second.bias + recsys::dot(c.user_vec, it->second.vec);
    return std::clamp(r, recsys::kMinRating, recsys::kMaxRating);
}

inline std::vector<double> holdout_abs_errors(const ClientState& c, const ItemTable& items,
                                              double global_mean) {
    std::vector<double> out;
    for (auto i : c.holdout_idx) {
        const auto& r = c.local_ratings[i];
        out.push_back(std::fabs(client_predict(c, items, global_mean, r.poi_id) - r.value));
    }
    return out;
}

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// ---------------------------------------------------------------------------
// Setup shared by the federated run and the baselines

// Users with the most ratings; ties by user id.
inline std::vector<std::string> top_users_by_count(const std::vector<Rating>& ratings,
                                                   std::size_t k) {
    std::map<std::string, std::size_t> counts;
    for (const auto& r : ratings) ++counts[r.user_id];
    std::vector<std::pair<std::string, std::size_t>> v(counts.begin(), counts.end());
    std::stable_sort(v.begin(), v.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min(k, v.size()); ++i) out.push_back(v[i].first);
    return out;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (a + 1) + 0xD1B54A32D192ED03ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Holdout of round(fraction * n) ratings, at least 1 and leaving at least 1
// for training. A single-rating user gets no holdout.
inline void split_client(ClientState& c, double fraction, std::uint64_t seed) {
    const auto n = c.local_ratings.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::size_t h = 0;
    if (n >= 2) {
        h = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
        h = std::clamp<std::size_t>(h, 1, n - 1);
    }
    c.holdout_idx.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(h));
    c.train_idx.assign(idx.begin() + static_cast<std::ptrdiff_t>(h), idx.end());
    std::sort(c.holdout_idx.begin(), c.holdout_idx.end());
    std::sort(c.train_idx.begin(), c.train_idx.end());
}

// Everything the three benchmark scenarios share: the base model trained
// without the client users, and identically initialized, identically split
// clients.
struct Setup {
    MfModel base;
    std::vector<ClientState> clients;
    std::vector<Rating> others;  // ratings of non-client users
};

inline Setup prepare(const std::vector<Rating>& ratings, const std::vector<std::string>& poi_ids,
                     const std::vector<std::string>& client_ids, const FlHyperParams& hp) {
    if (client_ids.empty()) throw ArgumentError("federated: no clients");
    std::set<std::string> client_set(client_ids.begin(), client_ids.end());
    if (client_set.size() != client_ids.size()) throw ArgumentError("federated: duplicate client id");
    std::set<std::string> users;
    for (const auto& r : ratings) users.insert(r.user_id);
    for (const auto& id : client_ids) {
        if (!users.contains(id)) throw ArgumentError("federated: client '" + id + "' has no ratings");
    }

    Setup s;
    for (const auto& r : ratings) {
        if (!client_set.contains(r.user_id)) s.others.push_back(r);
    }
    if (s.others.empty()) throw ArgumentError("federated: no ratings left for the base model");

    MfHyperParams base_hp;
    base_hp.dimension = hp.dimension;
    base_hp.lr = hp.base_lr;
    base_hp.reg = hp.reg;
    base_hp.epochs = hp.base_epochs;
    base_hp.seed = hp.seed;
    base_hp.init_std = hp.init_std;
    s.base = recsys::train_mf(s.others, base_hp);

    // Every known POI gets an embedding, including ones only clients rated.
    std::set<std::string> all_pois(poi_ids.begin(), poi_ids.end());
    for (const auto& r : ratings) all_pois.insert(r.poi_id);
    std::mt19937_64 item_rng(mix_seed(hp.seed, 0xC0FFEE));
    for (const auto& poi : all_pois) {
        if (s.base.item_vecs.contains(poi)) continue;
        s.base.item_vecs[poi] = recsys::random_vec(hp.dimension, hp.init_std, item_rng);
        s.base.item_bias[poi] = 0.0;
    }

    for (std::size_t c = 0; c < client_ids.size(); ++c) {
        ClientState cs;
        cs.user_id = client_ids[c];
        for (const auto& r : ratings) {
            if (r.user_id == cs.user_id) cs.local_ratings.push_back(r);
        }
        std::mt19937_64 rng(mix_seed(hp.seed, c, 1));
        cs.user_vec = recsys::random_vec(hp.dimension, hp.init_std, rng);
        cs.user_bias = 0.0;
        split_client(cs, hp.holdout_fraction, mix_seed(hp.seed, c, 2));
        s.clients.push_back(std::move(cs));
    }
    return s;
}

inline ItemTable items_of(const MfModel& m) {
    ItemTable t;
    for (const auto& [id, v] : m.item_vecs) t[id] = {v, m.item_bias.at(id)};
    return t;
}

// ---------------------------------------------------------------------------
// Round orchestration

// Holds server and client state between rounds. Each round: broadcast,
// local updates (optionally in parallel), serialize client messages, FedAvg,
// apply, redistribute, report.
class FederatedSession {
public:
    using WireObserver = std::function<void(const nlohmann::json&)>;

    FederatedSession(ServerState server, std::vector<ClientState> clients, FlHyperParams hp)
        : server_(std::move(server)), clients_(std::move(clients)), hp_(hp) {
        for (auto& c : clients_) c.local_items = server_.global_items;
    }

    // Sees every serialized client->server message.
    void set_wire_observer(WireObserver obs) { observer_ = std::move(obs); }

    RoundReport initial_report() const {
        RoundReport rep;
        rep.round = server_.round_counter;
        for (const auto& c : clients_) {
            rep.per_client_holdout_mae[c.user_id] =
                mean_of(holdout_abs_errors(c, server_.global_items, server_.global_mean));
        }
        return rep;
    }

    RoundReport run_round() {
        const int round = server_.round_counter + 1;
        std::vector<LocalUpdate> updates(clients_.size());
        auto work = [&](std::size_t i) {
            updates[i] = client_local_update(clients_[i], server_, hp_,
                                             mix_seed(hp_.seed, i, 1000 + static_cast<std::uint64_t>(round)));
        };
        if (hp_.parallel_clients && clients_.size() > 1) {
            std::vector<std::jthread> workers;
            for (std::size_t i = 0; i < clients_.size(); ++i) workers.emplace_back(work, i);
        } else {
            for (std::size_t i = 0; i < clients_.size(); ++i) work(i);
        }

        RoundReport rep;
        rep.round = round;
        std::vector<ClientMessage> received;
        for (std::size_t i = 0; i < clients_.size(); ++i) {
            if (updates[i].skipped) {
                rep.skipped_clients.push_back(clients_[i].user_id);
                continue;
            }
            rep.participating_clients.push_back(clients_[i].user_id);
            // The server only ever sees the serialized record.
            const auto wire = to_json(updates[i].message);
            if (observer_) observer_(wire);
            received.push_back(client_message_from_json(wire));
        }
        if (!received.empty()) rep.aggregate_delta_norm = apply_delta(server_, fedavg(received));
        server_.round_counter = round;
        for (auto& c : clients_) c.local_items = server_.global_items;
        for (const auto& c : clients_) {
            rep.per_client_holdout_mae[c.user_id] =
                mean_of(holdout_abs_errors(c, server_.global_items, server_.global_mean));
        }
        return rep;
    }

    const ServerState& server() const { return server_; }
    const std::vector<ClientState>& clients() const { return clients_; }
    const FlHyperParams& hyper_params() const { return hp_; }

private:
    ServerState server_;
    std::vector<ClientState> clients_;
    FlHyperParams hp_;
    WireObserver observer_;
};

inline ServerState server_from_model(const MfModel& base) {
    ServerState s;
    s.dimension = base.dimension;
    s.global_mean = base.global_mean;
    s.global_items = items_of(base);
    return s;
}

struct FederatedRun {
    ServerState server;
    std::vector<ClientState> clients;
    std::vector<RoundReport> reports;  // reports[0] is the pre-training state
    MfModel base;
};

inline FederatedRun run_federated_from(const Setup& setup, const FlHyperParams& hp) {
    FederatedSession session(server_from_model(setup.base), setup.clients, hp);
    FederatedRun run;
    run.base = setup.base;
    run.reports.push_back(session.initial_report());
    for (int r = 0; r < hp.rounds; ++r) run.reports.push_back(session.run_round());
    run.server = session.server();
    run.clients = session.clients();
    return run;
}

inline FederatedRun run_federated(const std::vector<Rating>& ratings,
                                  const std::vector<std::string>& poi_ids,
                                  const std::vector<std::string>& client_ids,
                                  const FlHyperParams& hp = {}) {
    return run_federated_from(prepare(ratings, poi_ids, client_ids, hp), hp);
}

// ---------------------------------------------------------------------------
// Centralized / distributed / federated comparison

inline constexpr std::array<std::string_view, 3> kScenarios{"centralized", "distributed",
                                                            "federated"};

struct BenchmarkResult {
    // scenario -> user -> absolute error per held-out rating
    std::map<std::string, std::map<std::string, std::vector<double>>> errors;
    std::vector<std::string> clients;
};

inline BenchmarkResult run_baselines(const std::vector<Rating>& ratings,
                                     const std::vector<std::string>& poi_ids,
                                     const std::vector<std::string>& client_ids,
                                     const FlHyperParams& hp = {}) {
    const Setup setup = prepare(ratings, poi_ids, client_ids, hp);
    BenchmarkResult out;
    out.clients = client_ids;
    const int total_epochs = hp.rounds * hp.local_epochs;

    // Centralized: one more pass over everything, client train data included.
    {
        MfModel m = setup.base;
        std::vector<Rating> pooled = setup.others;
        for (const auto& c : setup.clients) {
            m.user_vecs[c.user_id] = c.user_vec;
            m.user_bias[c.user_id] = c.user_bias;
            for (const auto& r : c.train_ratings()) pooled.push_back(r);
        }
        m = recsys::continue_training(std::move(m), pooled,
                                      local_hp(hp, total_epochs, mix_seed(hp.seed, 77)));
        const auto items = items_of(m);
        for (auto c : setup.clients) {
            c.user_vec = m.user_vecs.at(c.user_id);
            c.user_bias = m.user_bias.at(c.user_id);
            out.errors["centralized"][c.user_id] = holdout_abs_errors(c, items, m.global_mean);
        }
    }

    // Distributed: each client fine-tunes its own copy, nothing is shared.
    for (std::size_t i = 0; i < setup.clients.size(); ++i) {
        ClientState c = setup.clients[i];
        const auto train = c.train_ratings();
        auto m = client_model(c, items_of(setup.base), setup.base.dimension, setup.base.global_mean);
        if (!train.empty()) {
            m = recsys::continue_training(std::move(m), train,
                                          local_hp(hp, total_epochs, mix_seed(hp.seed, i, 88)));
        }
        c.user_vec = m.user_vecs.at(c.user_id);
        c.user_bias = m.user_bias.at(c.user_id);
        out.errors["distributed"][c.user_id] = holdout_abs_errors(c, items_of(m), m.global_mean);
    }

    const auto fed = run_federated_from(setup, hp);
    for (const auto& c : fed.clients) {
        out.errors["federated"][c.user_id] =
            holdout_abs_errors(c, fed.server.global_items, fed.server.global_mean);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Benchmark files

struct FiveNumber {
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

// Linear-interpolated quantile of a sorted sample.
inline double quantile_sorted(const std::vector<double>& v, double q) {
    if (v.empty()) return 0.0;
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline FiveNumber five_number(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    if (v.empty()) return {};
    return {v.front(), quantile_sorted(v, 0.25), quantile_sorted(v, 0.5), quantile_sorted(v, 0.75),
            v.back()};
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return quantile_sorted(v, 0.5);
}

struct SummaryRow {
    std::string scenario;
    std::string user_id;
    double median_ae = 0.0;
    double mean_ae = 0.0;
    std::size_t n = 0;
};

inline constexpr std::string_view kErrorsHeader = "scenario,user_id,abs_error";
inline constexpr std::string_view kSummaryHeader = "scenario,user_id,median_ae,mean_ae,n";

inline std::vector<SummaryRow> summarize(const BenchmarkResult& r) {
    std::vector<SummaryRow> rows;
    for (auto sc : kScenarios) {
        const auto it = r.errors.find(std::string(sc));
        if (it == r.errors.end()) continue;
        for (const auto& user : r.clients) {
            const auto u = it->second.find(user);
            if (u == it->second.end()) continue;
            rows.push_back({std::string(sc), user, median(u->second), mean_of(u->second),
                            u->second.size()});
        }
    }
    return rows;
}

inline void write_errors_csv(std::ostream& out, const BenchmarkResult& r) {
    out << kErrorsHeader << '\n';
    for (auto sc : kScenarios) {
        const auto it = r.errors.find(std::string(sc));
        if (it == r.errors.end()) continue;
        for (const auto& user : r.clients) {
            const auto u = it->second.find(user);
            if (u == it->second.end()) continue;
            for (double e : u->second) out << sc << ',' << user << ',' << csv::format_double(e) << '\n';
        }
    }
}

inline void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << kSummaryHeader << '\n';
    for (const auto& r : rows) {
        out << r.scenario << ',' << r.user_id << ',' << csv::format_double(r.median_ae) << ','
            << csv::format_double(r.mean_ae) << ',' << r.n << '\n';
    }
}

inline std::vector<SummaryRow> read_summary_csv(std::istream& in) {
    csv::LineReader reader(in);
    csv::expect_header(reader, kSummaryHeader, "benchmark summary");
    std::vector<SummaryRow> rows;
    std::string line;
    while (reader.next(line)) {
        const auto cells = csv::split(line);
        if (cells.size() != 5) throw ValidationError(reader.line_no(), "row", "expected 5 columns");
        SummaryRow r;
        r.scenario = std::string(csv::trim(cells[0]));
        r.user_id = std::string(csv::trim(cells[1]));
        const auto med = csv::to_double(cells[2]);
        const auto mean = csv::to_double(cells[3]);
        const auto n = csv::to_int64(cells[4]);
        if (!med) throw ValidationError(reader.line_no(), "median_ae", "not a number");
        if (!mean) throw ValidationError(reader.line_no(), "mean_ae", "not a number");
        if (!n || *n < 0) throw ValidationError(reader.line_no(), "n", "not a count");
        r.median_ae = *med;
        r.mean_ae = *mean;
        r.n = static_cast<std::size_t>(*n);
        rows.push_back(std::move(r));
    }
    return rows;
}

// scenario -> user -> errors, as written by write_errors_csv.
inline BenchmarkResult read_errors_csv(std::istream& in) {
    csv::LineReader reader(in);
    csv::expect_header(reader, kErrorsHeader, "benchmark errors");
    BenchmarkResult r;
    std::string line;
    while (reader.next(line)) {
        const auto cells = csv::split(line);
        if (cells.size() != 3) throw ValidationError(reader.line_no(), "row", "expected 3 columns");
        const auto e = csv::to_double(cells[2]);
        if (!e || *e < 0) throw ValidationError(reader.line_no(), "abs_error", "invalid");
        const std::string user(csv::trim(cells[1]));
        if (std::find(r.clients.begin(), r.clients.end(), user) == r.clients.end()) {
            r.clients.push_back(user);
        }
        r.errors[std::string(csv::trim(cells[0]))][user].push_back(*e);
    }
    return r;
}

inline nlohmann::json to_json(const RoundReport& r) {
    return {{"round", r.round},
            {"participating_clients", r.participating_clients},
            {"skipped_clients", r.skipped_clients},
            {"per_client_holdout_mae", r.per_client_holdout_mae},
            {"aggregate_delta_norm", r.aggregate_delta_norm}};
}

}  // namespace airsense::fl

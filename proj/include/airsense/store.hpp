#pragma once

#include <sys/file.h>
#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <openssl/evp.h>

#include "airsense/aqi_field.hpp"
#include "airsense/errors.hpp"
#include "airsense/recsys.hpp"
#include "airsense/sensor.hpp"
#include "json.hpp"

namespace airsense::store {

namespace fs = std::filesystem;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kStationsFile = "stations.csv";
inline constexpr const char* kReadingsFile = "readings.csv";
inline constexpr const char* kPoisFile = "pois.csv";
inline constexpr const char* kRatingsFile = "ratings.csv";
inline constexpr const char* kSnapshotDir = "snapshots";
inline constexpr std::array<const char*, 4> kDatasetFiles{kStationsFile, kReadingsFile, kPoisFile,
                                                          kRatingsFile};

struct Dataset {
    std::vector<sensor::SensorStation> stations;
    std::vector<sensor::SensorReading> readings;
    std::vector<recsys::Poi> pois;
    std::vector<recsys::Rating> ratings;

    bool operator==(const Dataset&) const = default;
};

// ---------------------------------------------------------------------------
// Hashing

inline std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256: digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xF]);
    }
    return out;
}

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw LoadError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Writes via a temporary file and rename so readers never see a partial file.
inline void write_file_atomic(const fs::path& p, std::string_view content) {
    fs::create_directories(p.parent_path());
    const fs::path tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("short write to " + tmp.string());
    }
    fs::rename(tmp, p);
}

// Advisory exclusive lock on <root>/.lock for the lifetime of the object.
class WriterLock {
public:
    explicit WriterLock(const fs::path& root) {
        fs::create_directories(root);
        const auto p = (root / ".lock").string();
        fd_ = ::open(p.c_str(), O_CREAT | O_RDWR, 0644);
        if (fd_ < 0) throw Error("cannot open lock file " + p);
        if (::flock(fd_, LOCK_EX) != 0) {
            ::close(fd_);
            throw Error("cannot lock " + p);
        }
    }
    ~WriterLock() {
        if (fd_ >= 0) {
            ::flock(fd_, LOCK_UN);
            ::close(fd_);
        }
    }
    WriterLock(const WriterLock&) = delete;
    WriterLock& operator=(const WriterLock&) = delete;

private:
    int fd_ = -1;
};

// ---------------------------------------------------------------------------
// Manifest

struct FileEntry {
    std::size_t rows = 0;
    std::string sha256;
};

struct Manifest {
    int schema_version = kSchemaVersion;
    std::map<std::string, FileEntry> files;      // dataset file -> entry
    std::map<std::string, FileEntry> snapshots;  // snapshot name -> entry (rows unused)
};

inline nlohmann::json to_json(const Manifest& m) {
    nlohmann::json files = nlohmann::json::object();
    for (const auto& [name, e] : m.files) files[name] = {{"rows", e.rows}, {"sha256", e.sha256}};
    nlohmann::json snaps = nlohmann::json::object();
    for (const auto& [name, e] : m.snapshots) {
        snaps[name] = {{"file", std::string(kSnapshotDir) + "/" + name + ".json"},
                       {"sha256", e.sha256}};
    }
    return {{"schema_version", m.schema_version}, {"files", files}, {"snapshots", snaps}};
}

inline Manifest manifest_from_json(const nlohmann::json& j) {
    Manifest m;
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version != kSchemaVersion) {
        throw VersioningError("manifest: unsupported schema version " +
                              std::to_string(m.schema_version));
    }
    for (const auto& [name, e] : j.at("files").items()) {
        m.files[name] = {e.at("rows").get<std::size_t>(), e.at("sha256").get<std::string>()};
    }
    if (j.contains("snapshots")) {
        for (const auto& [name, e] : j.at("snapshots").items()) {
            m.snapshots[name] = {0, e.at("sha256").get<std::string>()};
        }
    }
    return m;
}

inline std::size_t count_rows(std::string_view csv_text) {
    std::size_t rows = 0;
    bool header_seen = false;
    std::size_t start = 0;
    while (start < csv_text.size()) {
        auto end = csv_text.find('\n', start);
        if (end == std::string_view::npos) end = csv_text.size();
        const auto line = csv::trim(csv_text.substr(start, end - start));
        if (!line.empty() && line.front() != '#') {
            if (header_seen) ++rows;
            header_seen = true;
        }
        start = end + 1;
    }
    return rows;
}

// A directory holding the dataset CSVs, snapshot documents and the manifest.
class DataRoot {
public:
    explicit DataRoot(fs::path dir) : dir_(std::move(dir)) {}

    const fs::path& dir() const { return dir_; }
    fs::path manifest_path() const { return dir_ / kManifestFile; }
    fs::path snapshot_path(const std::string& name) const {
        return dir_ / kSnapshotDir / (name + ".json");
    }

    bool has_manifest() const { return fs::exists(manifest_path()); }

    Manifest manifest() const {
        if (!has_manifest()) throw LoadError("missing manifest: " + manifest_path().string());
        try {
            return manifest_from_json(nlohmann::json::parse(read_file(manifest_path())));
        } catch (const nlohmann::json::exception& e) {
            throw CorruptionError("manifest is not valid JSON: " + std::string(e.what()));
        }
    }

    void write_manifest(const Manifest& m) const {
        write_file_atomic(manifest_path(), to_json(m).dump(2) + "\n");
    }

    // Reads a dataset file and checks it against the manifest hash.
    std::string read_verified(const std::string& name, const Manifest& m) const {
        const auto it = m.files.find(name);
        if (it == m.files.end()) throw LoadError("manifest does not list " + name);
        const auto p = dir_ / name;
        if (!fs::exists(p)) throw LoadError("missing dataset file: " + name);
        auto content = read_file(p);
        if (sha256_hex(content) != it->second.sha256) {
            throw CorruptionError("hash mismatch for " + name);
        }
        return content;
    }

private:
    fs::path dir_;
};

// ---------------------------------------------------------------------------
// Dataset IO

inline std::string dataset_file_text(const Dataset& d, const std::string& name) {
    std::ostringstream out;
    if (name == kStationsFile) sensor::write_stations(out, d.stations);
    else if (name == kReadingsFile) sensor::write_readings(out, d.readings);
    else if (name == kPoisFile) recsys::write_pois(out, d.pois);
    else if (name == kRatingsFile) recsys::write_ratings(out, d.ratings);
    else throw ArgumentError("unknown dataset file " + name);
    return out.str();
}

// Writes all four dataset files and records their hashes; existing
// snapshots stay listed.
inline void save_all(const DataRoot& root, const Dataset& d) {
    WriterLock lock(root.dir());
    Manifest m;
    if (root.has_manifest()) m = root.manifest();
    for (const char* name : kDatasetFiles) {
        const auto text = dataset_file_text(d, name);
        write_file_atomic(root.dir() / name, text);
        m.files[name] = {count_rows(text), sha256_hex(text)};
    }
    root.write_manifest(m);
}

template <typename T>
std::vector<T> strict(const csv::ParseResult<T>& r, const std::string& file) {
    if (!r.errors.empty()) {
        const auto& e = r.errors.front();
        throw ValidationError(e.line(), e.field(),
                              file + ": " + std::to_string(r.errors.size()) +
                                  " invalid line(s), first: " + e.what());
    }
    return r.records;
}

inline void check_integrity(const Dataset& d) {
    std::set<std::string> station_ids;
    for (const auto& s : d.stations) {
        if (!station_ids.insert(s.id).second) {
            throw IntegrityError("duplicate station id " + s.id, {s.id});
        }
    }
    std::set<std::string> poi_ids;
    for (const auto& p : d.pois) {
        if (!poi_ids.insert(p.id).second) throw IntegrityError("duplicate poi id " + p.id, {p.id});
    }
    std::set<std::string> bad;
    for (const auto& r : d.ratings) {
        if (!poi_ids.contains(r.poi_id)) bad.insert(r.poi_id);
    }
    if (!bad.empty()) {
        std::string list;
        for (const auto& b : bad) list += (list.empty() ? "" : ", ") + b;
        throw IntegrityError("ratings reference unknown poi ids: " + list,
                             {bad.begin(), bad.end()});
    }
    for (const auto& r : d.readings) {
        if (!station_ids.contains(r.sensor_id)) bad.insert(r.sensor_id);
    }
    if (!bad.empty()) {
        std::string list;
        for (const auto& b : bad) list += (list.empty() ? "" : ", ") + b;
        throw IntegrityError("readings reference unknown stations: " + list,
                             {bad.begin(), bad.end()});
    }
}

inline Dataset load_all(const DataRoot& root) {
    const auto m = root.manifest();
    Dataset d;
    {
        std::istringstream in(root.read_verified(kStationsFile, m));
        d.stations = strict(sensor::parse_stations(in), kStationsFile);
    }
    {
        std::istringstream in(root.read_verified(kReadingsFile, m));
        d.readings = strict(sensor::parse_readings(in), kReadingsFile);
    }
    {
        std::istringstream in(root.read_verified(kPoisFile, m));
        d.pois = strict(recsys::parse_pois(in), kPoisFile);
    }
    {
        std::istringstream in(root.read_verified(kRatingsFile, m));
        d.ratings = strict(recsys::parse_ratings(in), kRatingsFile);
    }
    check_integrity(d);
    return d;
}

// Appends rows to one dataset file under the writer lock and refreshes its
// manifest entry.
inline void append_dataset_rows(const DataRoot& root, const std::string& name,
                                const std::string& rows_text, std::size_t added_rows) {
    WriterLock lock(root.dir());
    auto m = root.manifest();
    auto content = root.read_verified(name, m);
    if (!content.empty() && content.back() != '\n') content.push_back('\n');
    content += rows_text;
    write_file_atomic(root.dir() / name, content);
    m.files[name] = {m.files[name].rows + added_rows, sha256_hex(content)};
    root.write_manifest(m);
}

inline void append_rating(const DataRoot& root, const recsys::Rating& r,
                          const std::vector<recsys::Poi>& known_pois) {
    recsys::validate_rating(r);
    const bool known = std::any_of(known_pois.begin(), known_pois.end(),
                                   [&](const recsys::Poi& p) { return p.id == r.poi_id; });
    if (!known) throw IntegrityError("unknown poi id " + r.poi_id, {r.poi_id});
    std::ostringstream out;
    recsys::write_ratings(out, {r});
    auto text = out.str();
    text.erase(0, text.find('\n') + 1);  // drop header
    append_dataset_rows(root, kRatingsFile, text, 1);
}

inline void append_readings(const DataRoot& root,
                            const std::vector<sensor::SensorReading>& readings) {
    std::ostringstream out;
    sensor::write_readings(out, readings);
    auto text = out.str();
    text.erase(0, text.find('\n') + 1);
    append_dataset_rows(root, kReadingsFile, text, readings.size());
}

// ---------------------------------------------------------------------------
// Snapshots

inline void validate_snapshot_name(const std::string& name) {
    static const std::regex kName("[A-Za-z0-9][A-Za-z0-9._-]{0,127}");
    if (!std::regex_match(name, kName)) throw ArgumentError("invalid snapshot name '" + name + "'");
}

inline std::string serialize_snapshot(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

// Snapshots are write-once: saving an existing name is a versioning error.
inline void save_snapshot(const DataRoot& root, const std::string& name,
                          const nlohmann::json& doc) {
    validate_snapshot_name(name);
    WriterLock lock(root.dir());
    Manifest m;
    if (root.has_manifest()) m = root.manifest();
    if (m.snapshots.contains(name) || fs::exists(root.snapshot_path(name))) {
        throw VersioningError("snapshot '" + name + "' already exists; snapshots are immutable");
    }
    const auto text = serialize_snapshot(doc);
    write_file_atomic(root.snapshot_path(name), text);
    m.snapshots[name] = {0, sha256_hex(text)};
    root.write_manifest(m);
}

inline nlohmann::json load_snapshot(const DataRoot& root, const std::string& name) {
    validate_snapshot_name(name);
    const auto m = root.manifest();
    const auto it = m.snapshots.find(name);
    if (it == m.snapshots.end()) throw NotFoundError("snapshot '" + name + "' not found");
    const auto p = root.snapshot_path(name);
    if (!fs::exists(p)) throw NotFoundError("snapshot file missing for '" + name + "'");
    const auto text = read_file(p);
    if (sha256_hex(text) != it->second.sha256) {
        throw CorruptionError("snapshot '" + name + "' does not match its manifest hash");
    }
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception&) {
        throw CorruptionError("snapshot '" + name + "' is not valid JSON");
    }
}

// Highest N among snapshots named "<prefix>-vN", or 0.
inline int latest_version(const DataRoot& root, const std::string& prefix) {
    if (!root.has_manifest()) return 0;
    int best = 0;
    const std::string head = prefix + "-v";
    for (const auto& [name, _] : root.manifest().snapshots) {
        if (name.rfind(head, 0) != 0) continue;
        const auto v = csv::to_int64(std::string_view(name).substr(head.size()));
        if (v && *v > best) best = static_cast<int>(*v);
    }
    return best;
}

inline std::string versioned_name(const std::string& prefix, int version) {
    return prefix + "-v" + std::to_string(version);
}

// ---------------------------------------------------------------------------
// Synthetic data

struct DemoSpec {
    int n_users = 8982;
    int n_pois = 2594;
    int n_ratings = 11606;
    int rank = 4;
    double noise = 0.25;
    std::uint64_t seed = 0;
    LatLon center = kBariAldoMoro;
    double poi_spread_m = 1500.0;
    int sensor_count = 8;
    double sensor_extent_m = 1000.0;
    double aqi_lo = 20.0;
    double aqi_hi = 70.0;
    int history_days = 2;
    std::int64_t history_start = 1706486400;  // 2024-01-29T00:00:00Z
    bool inject_spike = true;
};

struct PlantedSpec {
    int n_users = 50;
    int n_items = 40;
    double density = 0.3;
    int rank = 4;
    double noise = 0.1;
    std::uint64_t seed = 0;
    double factor_std = 0.8;
    double bias_std = 0.3;
    double activity_exponent = 1.0;  // user activity ~ 1/(rank+1)^exponent
    bool quantize = false;
};

namespace detail {

inline std::string padded(char prefix, int i, int width) {
    std::string n = std::to_string(i);
    if (static_cast<int>(n.size()) < width) n.insert(0, static_cast<std::size_t>(width) - n.size(), '0');
    return std::string(1, prefix) + n;
}

// Distinct (user, item) pairs: every user and item appears at least once
// when `cover` is set, the rest drawn by activity/popularity weights.
inline std::vector<std::pair<int, int>> sample_pairs(int n_users, int n_items, int n_pairs,
                                                     bool cover, double user_exp, double item_exp,
                                                     std::mt19937_64& rng) {
    std::set<std::pair<int, int>> taken;
    std::vector<std::pair<int, int>> out;
    auto add = [&](int u, int i) {
        if (taken.emplace(u, i).second) out.emplace_back(u, i);
    };
    std::vector<int> user_rank(static_cast<std::size_t>(n_users));
    std::iota(user_rank.begin(), user_rank.end(), 0);
    std::shuffle(user_rank.begin(), user_rank.end(), rng);
    std::vector<int> item_perm(static_cast<std::size_t>(n_items));
    std::iota(item_perm.begin(), item_perm.end(), 0);
    std::shuffle(item_perm.begin(), item_perm.end(), rng);

    if (cover) {
        const int m = std::max(n_users, n_items);
        for (int j = 0; j < m; ++j) add(j % n_users, item_perm[static_cast<std::size_t>(j % n_items)]);
    }
    std::vector<double> uw(static_cast<std::size_t>(n_users)), iw(static_cast<std::size_t>(n_items));
    for (int u = 0; u < n_users; ++u) {
        uw[static_cast<std::size_t>(u)] = 1.0 / std::pow(user_rank[static_cast<std::size_t>(u)] + 1.0, user_exp);
    }
    for (int i = 0; i < n_items; ++i) {
        iw[static_cast<std::size_t>(item_perm[static_cast<std::size_t>(i)])] = 1.0 / std::pow(i + 1.0, item_exp);
    }
    std::discrete_distribution<int> pick_user(uw.begin(), uw.end());
    std::discrete_distribution<int> pick_item(iw.begin(), iw.end());
    std::uniform_int_distribution<int> any_user(0, n_users - 1), any_item(0, n_items - 1);
    std::size_t misses = 0;
    while (static_cast<int>(out.size()) < n_pairs) {
        const bool weighted = misses < 64;
        const int u = weighted ? pick_user(rng) : any_user(rng);
        const int i = weighted ? pick_item(rng) : any_item(rng);
        const auto before = out.size();
        add(u, i);
        misses = out.size() == before ? misses + 1 : 0;
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace detail

// Ratings from a planted biased rank-k model: 3 + b_u + b_i + <u, v> + noise,
// clamped to [1, 5] (and rounded when quantize is set).
inline std::vector<recsys::Rating> generate_planted_ratings(const PlantedSpec& spec) {
    const auto total = static_cast<std::int64_t>(spec.n_users) * spec.n_items;
    const auto n = static_cast<int>(std::llround(spec.density * static_cast<double>(total)));
    if (spec.n_users < 1 || spec.n_items < 1 || n < 1 || n > total || spec.rank < 1) {
        throw ArgumentError("planted ratings: infeasible spec");
    }
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> factor(0.0, spec.factor_std), bias(0.0, spec.bias_std),
        noise(0.0, spec.noise);
    std::vector<std::vector<double>> uf(static_cast<std::size_t>(spec.n_users)),
        vf(static_cast<std::size_t>(spec.n_items));
    std::vector<double> ub(static_cast<std::size_t>(spec.n_users)), ib(static_cast<std::size_t>(spec.n_items));
    for (int u = 0; u < spec.n_users; ++u) {
        for (int k = 0; k < spec.rank; ++k) uf[static_cast<std::size_t>(u)].push_back(factor(rng));
        ub[static_cast<std::size_t>(u)] = bias(rng);
    }
    for (int i = 0; i < spec.n_items; ++i) {
        for (int k = 0; k < spec.rank; ++k) vf[static_cast<std::size_t>(i)].push_back(factor(rng));
        ib[static_cast<std::size_t>(i)] = bias(rng);
    }
    const auto pairs = detail::sample_pairs(spec.n_users, spec.n_items, n, false,
                                            spec.activity_exponent, 0.0, rng);
    std::vector<recsys::Rating> out;
    const int uw = static_cast<int>(std::to_string(spec.n_users).size());
    const int iw = static_cast<int>(std::to_string(spec.n_items).size());
    for (const auto& [u, i] : pairs) {
        double r = 3.0 + ub[static_cast<std::size_t>(u)] + ib[static_cast<std::size_t>(i)] +
                   recsys::dot(uf[static_cast<std::size_t>(u)], vf[static_cast<std::size_t>(i)]) +
                   noise(rng);
        if (spec.quantize) r = std::round(r);
        r = std::clamp(r, 1.0, 5.0);
        out.push_back({detail::padded('U', u, uw), detail::padded('P', i, iw), r});
    }
    return out;
}

inline const char* kPoiCategories[] = {"restaurant", "pizzeria", "cafe",   "bar",
                                       "gelateria",  "museum",   "park",   "bakery",
                                       "bookshop",   "market",   "church", "theatre"};

// Synthetic stand-in for the Bari deployment: POIs scattered around the
// city centre, integer 1-5 ratings from a planted low-rank model with a
// long-tailed user activity, eight virtual sensors around the centre and a
// short per-minute pollutant history ending in one reading per sensor
// whose AQI is the sensor's sampled value.
inline Dataset generate_demo_dataset(const DemoSpec& spec = {}) {
    const auto cells = static_cast<std::int64_t>(spec.n_users) * spec.n_pois;
    if (spec.n_users < 1 || spec.n_pois < 1 || spec.n_ratings < std::max(spec.n_users, spec.n_pois) ||
        spec.n_ratings > cells || spec.rank < 1 || spec.history_days < 0) {
        throw ArgumentError("generate_demo_dataset: infeasible spec (need max(users, pois) <= "
                            "ratings <= users * pois)");
    }
    Dataset d;
    std::mt19937_64 rng(spec.seed);

    // POIs.
    std::normal_distribution<double> spread(0.0, spec.poi_spread_m);
    std::uniform_int_distribution<std::size_t> cat(0, std::size(kPoiCategories) - 1);
    const int pw = static_cast<int>(std::to_string(spec.n_pois).size());
    for (int i = 0; i < spec.n_pois; ++i) {
        const auto p = offset_m(spec.center, spread(rng), spread(rng));
        const std::string category = kPoiCategories[cat(rng)];
        const auto id = detail::padded('P', i, pw);
        d.pois.push_back({id, category + " " + id.substr(1), category, p.lat, p.lon});
    }

    // Ratings: item effects dominate so that sparse users are still predictable.
    std::normal_distribution<double> item_bias(0.0, 0.8), user_bias(0.0, 0.25),
        factor(0.0, std::sqrt(0.4 / std::sqrt(static_cast<double>(spec.rank)))),
        noise(0.0, spec.noise);
    std::vector<double> ub(static_cast<std::size_t>(spec.n_users)), ib(static_cast<std::size_t>(spec.n_pois));
    std::vector<std::vector<double>> uf(static_cast<std::size_t>(spec.n_users)),
        vf(static_cast<std::size_t>(spec.n_pois));
    for (int u = 0; u < spec.n_users; ++u) {
        ub[static_cast<std::size_t>(u)] = user_bias(rng);
        for (int k = 0; k < spec.rank; ++k) uf[static_cast<std::size_t>(u)].push_back(factor(rng));
    }
    for (int i = 0; i < spec.n_pois; ++i) {
        ib[static_cast<std::size_t>(i)] = item_bias(rng);
        for (int k = 0; k < spec.rank; ++k) vf[static_cast<std::size_t>(i)].push_back(factor(rng));
    }
    const auto pairs =
        detail::sample_pairs(spec.n_users, spec.n_pois, spec.n_ratings, true, 1.0, 0.5, rng);
    const int uw = static_cast<int>(std::to_string(spec.n_users).size());
    for (const auto& [u, i] : pairs) {
        const double raw = 3.5 + ub[static_cast<std::size_t>(u)] + ib[static_cast<std::size_t>(i)] +
                           recsys::dot(uf[static_cast<std::size_t>(u)], vf[static_cast<std::size_t>(i)]) +
                           noise(rng);
        d.ratings.push_back({detail::padded('U', u, uw), detail::padded('P', i, pw),
                             std::clamp(std::round(raw), 1.0, 5.0)});
    }

    // Virtual sensors and their history.
    if (spec.sensor_count > 0) {
        const auto samples = field::simulate_sensor_grid(spec.center, spec.sensor_count,
                                                         spec.sensor_extent_m, spec.aqi_lo,
                                                         spec.aqi_hi, spec.seed);
        for (const auto& s : samples) {
            d.stations.push_back({"AQ-" + *s.sensor_id, s.latitude, s.longitude, "virtual",
                                  "Bari"});
        }
        std::vector<sensor::SensorReading> history;
        for (int day = 0; day < spec.history_days; ++day) {
            sensor::CitySimOptions opts;
            const std::int64_t day0 = spec.history_start + day * 86400LL;
            if (spec.inject_spike && day == spec.history_days - 1 && d.stations.size() > 2) {
                opts.spike = sensor::SpikeSpec{d.stations[2].id, sensor::Pollutant::NO,
                                               day0 + 18 * 3600, 600, 10.0};
            }
            auto day_readings = sensor::simulate_city_day(d.stations, day0, spec.seed + 17, opts);
            history.insert(history.end(), day_readings.begin(), day_readings.end());
        }
        const std::int64_t now = spec.history_start + spec.history_days * 86400LL;
        for (std::size_t k = 0; k < samples.size(); ++k) {
            history.push_back(sensor::reading_for_aqi(d.stations[k].id, now, samples[k].aqi));
        }
        std::stable_sort(history.begin(), history.end(), [](const auto& a, const auto& b) {
            if (a.sensor_id != b.sensor_id) return a.sensor_id < b.sensor_id;
            return a.timestamp < b.timestamp;
        });
        d.readings = std::move(history);
    }
    return d;
}

}  // namespace airsense::store

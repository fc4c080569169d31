#include "prefevo/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "prefevo/errors.hpp"

namespace prefevo {

using nlohmann::json;

namespace {

struct DefaultTrack {
    const char* id;
    const char* title;
    const char* artist;
};

constexpr DefaultTrack kExampleTracks[] = {
    {"fast_car", "Fast Car", "Tracy Chapman"},
    {"change_the_world", "Change The World", "Eric Clapton"},
    {"7_years", "7 Years", "Lukas Graham"},
    {"dreams", "Dreams", "Fleetwood Mac"},
    {"get_lucky", "Get Lucky", "Daft Punk ft. Pharrell"},
    {"hotel_california", "Hotel California", "The Eagles"},
    {"meaning_of_blues", "The Meaning of Blues", "Claire Martin"},
    {"know_who_you_are", "Know Who You Are", "Pharrell ft. Alicia Keys"},
};

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& prefix = "") {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError("config field '" + prefix + key + "': " + e.what());
    }
}

std::vector<double> doubles_from_json(const json& j, const std::string& field) {
    if (!j.is_array()) throw ValidationError("config field '" + field + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) throw ValidationError("config field '" + field + "' must be an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

} // namespace

json curve_to_json(const Curve& curve) { return json(curve.values()); }

Curve curve_from_json(const json& j, const std::string& field) {
    try {
        return Curve(doubles_from_json(j, field));
    } catch (const ValidationError& e) {
        throw ValidationError("config field '" + field + "': " + e.what());
    }
}

ExperimentConfig ExperimentConfig::defaults() {
    ExperimentConfig config;
    config.initial_curve = Curve::flat(kDefaultBandCount);
    config.bounds = Bounds::around(config.initial_curve, 3.0);
    for (const auto& t : kExampleTracks) {
        config.tracks.push_back(TrackDescriptor{t.id, std::string("audio/") + t.id + ".wav", 0.0, 20.0, t.title, t.artist});
    }
    return config;
}

void ExperimentConfig::validate() const {
    std::vector<std::string> issues;
    auto collect = [&issues](auto&& check) {
        try {
            check();
        } catch (const ValidationError& e) {
            issues.insert(issues.end(), e.issues().begin(), e.issues().end());
        }
    };
    collect([&] { de.validate(); });
    collect([&] { bounds.validate(); });
    collect([&] { band_plan.validate(); });
    if (initial_curve.bands() != band_plan.bands()) {
        issues.push_back("initial_curve has " + std::to_string(initial_curve.bands()) + " bands, band plan has " +
                         std::to_string(band_plan.bands()));
    }
    if (bounds.lower.bands() != band_plan.bands() || bounds.upper.bands() != band_plan.bands()) {
        issues.emplace_back("bounds band count differs from the band plan");
    } else if (initial_curve.bands() == bounds.bands()) {
        if (auto band = bounds.first_violation(initial_curve)) {
            issues.push_back("initial_curve band " + std::to_string(*band) + " (" +
                             std::to_string(initial_curve[*band]) + " dB) is outside the bounds");
        }
    }
    if (tracks.empty()) issues.emplace_back("at least one track is required");
    std::set<std::string> ids;
    for (const auto& t : tracks) {
        if (t.id.empty()) issues.emplace_back("track with empty id");
        if (!ids.insert(t.id).second) issues.push_back("duplicate track id '" + t.id + "'");
        if (t.start_s < 0.0 || t.length_s < 0.0) issues.push_back("track '" + t.id + "' has a negative excerpt");
    }
    if (!std::isfinite(target_lufs)) issues.emplace_back("target_lufs must be finite");
    if (tap_count % 2 == 0) issues.emplace_back("tap_count must be odd");
    if (listener.hidden_target && listener.hidden_target->bands() != band_plan.bands()) {
        issues.emplace_back("listener.hidden_target band count differs from the band plan");
    }
    if (!listener.band_weights.empty() && listener.band_weights.size() != band_plan.bands()) {
        issues.emplace_back("listener.band_weights band count differs from the band plan");
    }
    if (!(listener.noise_sd >= 0.0) || !std::isfinite(listener.noise_sd)) {
        issues.emplace_back("listener.noise_sd must be finite and >= 0");
    }
    if (!(listener.indifference_width >= 0.0)) issues.emplace_back("listener.indifference_width must be >= 0");
    if (!issues.empty()) throw ValidationError(std::move(issues));
}

std::filesystem::path ExperimentConfig::resolve(const std::filesystem::path& p) const {
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

std::string ExperimentConfig::hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_json().dump())));
    return buf;
}

json ExperimentConfig::to_json() const {
    json tracks_json = json::array();
    for (const auto& t : tracks) {
        tracks_json.push_back({{"id", t.id},
                               {"path", t.path.generic_string()},
                               {"start_s", t.start_s},
                               {"length_s", t.length_s},
                               {"title", t.title},
                               {"artist", t.artist}});
    }
    json listener_json = {{"kind", std::string(to_string(listener.kind))},
                          {"noise_sd", listener.noise_sd},
                          {"indifference_width", listener.indifference_width},
                          {"hidden_target", listener.hidden_target ? curve_to_json(*listener.hidden_target) : json()},
                          {"band_weights", listener.band_weights.empty() ? json() : json(listener.band_weights)}};
    return json{
        {"format", "prefevo-config"},
        {"version", 1},
        {"seed", de.seed},
        {"de",
         {{"scale_factor", de.scale_factor},
          {"crossover_rate", de.crossover_rate},
          {"population_size", de.population_size},
          {"generations", de.generations}}},
        {"band_centers_hz", band_plan.centers_hz},
        {"bounds", {{"lower", curve_to_json(bounds.lower)}, {"upper", curve_to_json(bounds.upper)}}},
        {"initial_curve", curve_to_json(initial_curve)},
        {"tracks", tracks_json},
        {"target_lufs", target_lufs},
        {"evaluation_scale", {1, 5}},
        {"compensation", compensation ? json(compensation->generic_string()) : json()},
        {"tap_count", tap_count},
        {"listener", listener_json},
    };
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("config must be an object");
    ExperimentConfig c = defaults();
    if (j.contains("format") && j.at("format") != "prefevo-config") {
        throw ValidationError("config field 'format' must be \"prefevo-config\"");
    }
    if (get_or<int>(j, "version", 1) != 1) throw ValidationError("config field 'version': unsupported version");
    c.de.seed = get_or<std::uint64_t>(j, "seed", c.de.seed);
    if (j.contains("de")) {
        const json& d = j.at("de");
        c.de.scale_factor = get_or<double>(d, "scale_factor", c.de.scale_factor, "de.");
        c.de.crossover_rate = get_or<double>(d, "crossover_rate", c.de.crossover_rate, "de.");
        c.de.population_size = get_or<int>(d, "population_size", c.de.population_size, "de.");
        c.de.generations = get_or<int>(d, "generations", c.de.generations, "de.");
    }
    if (j.contains("band_centers_hz")) c.band_plan.centers_hz = doubles_from_json(j.at("band_centers_hz"), "band_centers_hz");
    if (j.contains("initial_curve")) c.initial_curve = curve_from_json(j.at("initial_curve"), "initial_curve");
    if (j.contains("bounds")) {
        const json& b = j.at("bounds");
        if (b.contains("half_width_db")) {
            c.bounds = Bounds::around(c.initial_curve, get_or<double>(b, "half_width_db", 3.0, "bounds."));
        } else {
            if (!b.contains("lower") || !b.contains("upper")) {
                throw ValidationError("config field 'bounds' needs 'lower' and 'upper' (or 'half_width_db')");
            }
            c.bounds = Bounds{curve_from_json(b.at("lower"), "bounds.lower"), curve_from_json(b.at("upper"), "bounds.upper")};
        }
    } else {
        c.bounds = Bounds::around(c.initial_curve, 3.0);
    }
    if (j.contains("tracks")) {
        if (!j.at("tracks").is_array()) throw ValidationError("config field 'tracks' must be an array");
        c.tracks.clear();
        for (const auto& t : j.at("tracks")) {
            TrackDescriptor d;
            d.id = get_or<std::string>(t, "id", "", "tracks[].");
            d.path = get_or<std::string>(t, "path", "", "tracks[].");
            d.start_s = get_or<double>(t, "start_s", 0.0, "tracks[].");
            d.length_s = get_or<double>(t, "length_s", 0.0, "tracks[].");
            d.title = get_or<std::string>(t, "title", "", "tracks[].");
            d.artist = get_or<std::string>(t, "artist", "", "tracks[].");
            c.tracks.push_back(std::move(d));
        }
    }
    c.target_lufs = get_or<double>(j, "target_lufs", c.target_lufs);
    if (j.contains("evaluation_scale") && j.at("evaluation_scale") != json({1, 5})) {
        throw ValidationError("config field 'evaluation_scale' is fixed at [1, 5]");
    }
    if (j.contains("compensation") && !j.at("compensation").is_null()) {
        c.compensation = get_or<std::string>(j, "compensation", "");
    }
    c.tap_count = get_or<std::size_t>(j, "tap_count", c.tap_count);
    if (j.contains("listener")) {
        const json& l = j.at("listener");
        c.listener.kind = listener_kind_from_string(get_or<std::string>(l, "kind", "oracle", "listener."));
        c.listener.noise_sd = get_or<double>(l, "noise_sd", c.listener.noise_sd, "listener.");
        c.listener.indifference_width = get_or<double>(l, "indifference_width", c.listener.indifference_width, "listener.");
        if (l.contains("hidden_target") && !l.at("hidden_target").is_null()) {
            c.listener.hidden_target = curve_from_json(l.at("hidden_target"), "listener.hidden_target");
        }
        if (l.contains("band_weights") && !l.at("band_weights").is_null()) {
            c.listener.band_weights = doubles_from_json(l.at("band_weights"), "listener.band_weights");
        }
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    ExperimentConfig config = ExperimentConfig::from_json(j);
    config.base_dir = path.parent_path();
    return config;
}

void save_config(const std::filesystem::path& path, const ExperimentConfig& config) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << config.to_json().dump(2) << '\n';
}

ListenerModel make_listener(const ExperimentConfig& config, Rng& rng) {
    ListenerModel model;
    model.kind = config.listener.kind;
    model.noise_sd = config.listener.noise_sd;
    model.indifference_width = config.listener.indifference_width;
    model.band_weights = config.listener.band_weights;
    if (config.listener.hidden_target) {
        model.hidden_target = *config.listener.hidden_target;
    } else {
        std::vector<double> target(config.bounds.bands());
        for (std::size_t i = 0; i < target.size(); ++i) {
            target[i] = rng.uniform(config.bounds.lower[i], config.bounds.upper[i]);
        }
        model.hidden_target = Curve(std::move(target));
    }
    model.validate();
    return model;
}

} // namespace prefevo

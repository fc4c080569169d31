#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "prefevo/curve.hpp"
#include "prefevo/de.hpp"
#include "prefevo/fir.hpp"
#include "prefevo/listener.hpp"

namespace prefevo {

struct TrackDescriptor {
    std::string id;
    std::filesystem::path path; ///< relative paths resolve against the config file's directory
    double start_s = 0.0;
    double length_s = 0.0; ///< 0 = to the end of the file
    std::string title;
    std::string artist;

    friend bool operator==(const TrackDescriptor&, const TrackDescriptor&) = default;
};

/// Simulated-listener parameters as written in a config file. A missing
/// hidden target is drawn per session, uniformly within the bounds.
struct ListenerSpec {
    ListenerKind kind = ListenerKind::Oracle;
    std::optional<Curve> hidden_target;
    std::vector<double> band_weights;
    double noise_sd = 0.5;
    double indifference_width = 0.25;

    friend bool operator==(const ListenerSpec&, const ListenerSpec&) = default;
};

struct ExperimentConfig {
    DEParams de;
    Bounds bounds;
    Curve initial_curve;
    BandPlan band_plan = BandPlan::octaves();
    std::vector<TrackDescriptor> tracks;
    double target_lufs = -18.0;
    std::optional<std::filesystem::path> compensation;
    std::size_t tap_count = kDefaultTapCount;
    ListenerSpec listener;
    /// Directory of the file this config was read from; not serialized.
    std::filesystem::path base_dir;

    /// Five members, eight generations, F = 0.2, C = 0.7, flat initial curve
    /// with +-3 dB bounds, ten octave bands, eight example tracks, -18 LUFS.
    static ExperimentConfig defaults();

    /// Throws ValidationError listing every problem found.
    void validate() const;

    std::size_t comparison_trials() const {
        return static_cast<std::size_t>(de.population_size) * static_cast<std::size_t>(de.generations);
    }

    std::filesystem::path resolve(const std::filesystem::path& p) const;

    /// Stable hex digest of the serialized config.
    std::string hash() const;

    friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
        return a.to_json() == b.to_json();
    }

    nlohmann::json to_json() const;
    /// Missing fields take their defaults; malformed ones throw ValidationError
    /// naming the field.
    static ExperimentConfig from_json(const nlohmann::json& j);
};

ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ExperimentConfig& config);

nlohmann::json curve_to_json(const Curve& curve);
Curve curve_from_json(const nlohmann::json& j, const std::string& field);

/// Concrete listener for one session: resolves a missing hidden target by
/// drawing uniformly within the config bounds from `rng`.
ListenerModel make_listener(const ExperimentConfig& config, Rng& rng);

} // namespace prefevo

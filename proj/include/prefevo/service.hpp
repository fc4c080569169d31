#pragma once

/// Session-scoped listening-test API, independent of the HTTP transport.
///
/// Each session lives in `<data_dir>/sessions/<token>/` as `snapshot.json`,
/// an append-only `events.jsonl` and rendered `stimuli/*.wav`. The snapshot is
/// rewritten after every accepted command, so a restart resumes at the
/// pending trial. Clients only ever see opaque stimulus ids; which stimulus
/// is the reference (or the anchor) is never part of a response.

#include <cstdint>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "prefevo/audio.hpp"
#include "prefevo/config.hpp"
#include "prefevo/session.hpp"

namespace prefevo {

struct ApiResponse {
    int status = 200;
    nlohmann::json body;
};

struct StimulusResponse {
    int status = 200;
    std::shared_ptr<const std::vector<std::uint8_t>> wav; ///< set when status == 200
    nlohmann::json error;
};

struct ServiceOptions {
    std::filesystem::path data_dir;
    std::map<std::string, ExperimentConfig> configs; ///< config id -> config
};

class Service {
public:
    /// Reloads every session found under the data directory.
    explicit Service(ServiceOptions options);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Body: {"config": id, "idempotency_key"?: string}. 201 with {"token"}.
    ApiResponse create_session(const nlohmann::json& request);
    ApiResponse get_trial(const std::string& token);
    StimulusResponse get_stimulus(const std::string& token, const std::string& stimulus_id);
    /// Body: {"trial_id", "rating": x} (pair) or {"trial_id", "ratings": [...]} (screen).
    ApiResponse submit_rating(const std::string& token, const nlohmann::json& payload);

    /// Blocks until pending stimulus rendering has finished, then rewrites
    /// every snapshot.
    void persist_all();

    std::vector<std::string> tokens() const;

private:
    struct Active;

    std::shared_ptr<Active> find(const std::string& token) const;
    void persist(Active& session);
    void schedule_stimuli(Active& session);
    std::shared_ptr<const AudioClip> track_excerpt(const ExperimentConfig& config, const std::string& track_id);
    nlohmann::json trial_descriptor(const Active& session) const;

    ServiceOptions options_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Active>> sessions_;
    std::map<std::string, std::string> idempotency_;
    std::mutex tracks_mutex_;
    std::map<std::string, std::shared_ptr<const AudioClip>> tracks_;
};

/// Stable opaque id for stimulus `position` of `trial_id` in session `token`.
std::string stimulus_id(const std::string& token, const std::string& trial_id, std::size_t position);

} // namespace prefevo

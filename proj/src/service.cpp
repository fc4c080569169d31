#include "prefevo/service.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include "prefevo/errors.hpp"
#include "prefevo/event_log.hpp"
#include "prefevo/render.hpp"

namespace prefevo {

using nlohmann::json;
using WavBytes = std::shared_ptr<const std::vector<std::uint8_t>>;

struct Service::Active {
    std::mutex mutex;
    std::string token;
    std::string config_id;
    std::filesystem::path base_dir;
    std::filesystem::path dir;
    SessionState state;
    std::size_t logged_events = 0;
    std::string stimuli_trial;
    std::vector<std::string> stimulus_ids; ///< presentation order for stimuli_trial
    std::map<std::string, std::shared_future<WavBytes>> stimuli;
};

namespace {

std::string now_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string new_token() {
    std::random_device device;
    char buf[33];
    std::snprintf(buf, sizeof buf, "%08x%08x%08x%08x", device(), device(), device(), device());
    return buf;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& text) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << text;
        out.flush();
        if (!out) throw std::runtime_error("short write to " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

ApiResponse error(int status, const std::string& message) { return {status, json{{"error", message}}}; }

json progress_json(const SessionState& s) {
    const Progress p = s.progress();
    return {{"completed", p.completed}, {"total", p.total}, {"stage", std::string(to_string(p.stage))}};
}

} // namespace

std::string stimulus_id(const std::string& token, const std::string& trial_id, std::size_t position) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "s%016llx",
                  static_cast<unsigned long long>(fnv1a(token + "/" + trial_id + "/" + std::to_string(position))));
    return buf;
}

Service::Service(ServiceOptions options) : options_(std::move(options)) {
    const auto root = options_.data_dir / "sessions";
    std::filesystem::create_directories(root);
    const auto idem = options_.data_dir / "idempotency.json";
    if (std::filesystem::exists(idem)) idempotency_ = json::parse(read_file(idem)).get<std::map<std::string, std::string>>();

    for (const auto& entry : std::filesystem::directory_iterator(root)) {
        const auto snapshot = entry.path() / "snapshot.json";
        if (!entry.is_directory() || !std::filesystem::exists(snapshot)) continue;
        auto session = std::make_shared<Active>();
        session->token = entry.path().filename().string();
        session->dir = entry.path();
        session->state = load(read_file(snapshot));
        const json meta = json::parse(read_file(entry.path() / "session.json"));
        session->config_id = meta.value("config_id", "");
        session->base_dir = meta.value("base_dir", "");
        session->state.config.base_dir = session->base_dir;
        // Bring the log in line with the snapshot (the snapshot is written first).
        const std::string log = render_event_log(session->state);
        const auto log_path = session->dir / "events.jsonl";
        if (!std::filesystem::exists(log_path) || read_file(log_path) != log) write_atomic(log_path, log);
        session->logged_events = session_events(session->state).size();
        schedule_stimuli(*session);
        sessions_.emplace(session->token, std::move(session));
    }
}

Service::~Service() {
    try {
        persist_all();
    } catch (...) {
    }
}

std::vector<std::string> Service::tokens() const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [token, _] : sessions_) out.push_back(token);
    return out;
}

std::shared_ptr<Service::Active> Service::find(const std::string& token) const {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(token);
    return it == sessions_.end() ? nullptr : it->second;
}

void Service::persist(Active& session) {
    std::filesystem::create_directories(session.dir / "stimuli");
    write_atomic(session.dir / "snapshot.json", save(session.state));
    const auto events = session_events(session.state);
    std::ofstream log(session.dir / "events.jsonl", std::ios::binary | std::ios::app);
    for (std::size_t i = session.logged_events; i < events.size(); ++i) log << events[i].dump() << '\n';
    session.logged_events = events.size();
}

void Service::persist_all() {
    std::vector<std::shared_ptr<Active>> all;
    {
        std::lock_guard lock(mutex_);
        for (const auto& [_, s] : sessions_) all.push_back(s);
    }
    for (const auto& s : all) {
        std::lock_guard lock(s->mutex);
        for (auto& [_, f] : s->stimuli) f.wait();
        persist(*s);
    }
}

std::shared_ptr<const AudioClip> Service::track_excerpt(const ExperimentConfig& config, const std::string& track_id) {
    const auto it = std::find_if(config.tracks.begin(), config.tracks.end(),
                                 [&](const TrackDescriptor& t) { return t.id == track_id; });
    if (it == config.tracks.end()) throw std::runtime_error("unknown track '" + track_id + "'");
    const auto path = config.resolve(it->path);
    const std::string key = path.string() + "|" + std::to_string(it->start_s) + "|" + std::to_string(it->length_s);
    {
        std::lock_guard lock(tracks_mutex_);
        if (const auto cached = tracks_.find(key); cached != tracks_.end()) return cached->second;
    }
    const AudioClip full = read_wav(path);
    const auto start = static_cast<std::size_t>(it->start_s * full.sample_rate);
    const std::size_t length =
        it->length_s > 0.0 ? static_cast<std::size_t>(it->length_s * full.sample_rate) : full.frames();
    auto excerpt = std::make_shared<const AudioClip>(full.excerpt(start, length));
    std::lock_guard lock(tracks_mutex_);
    return tracks_.emplace(key, std::move(excerpt)).first->second;
}

void Service::schedule_stimuli(Active& session) {
    const SessionState& s = session.state;
    if (s.stage == Stage::Done) {
        session.stimuli.clear();
        session.stimulus_ids.clear();
        session.stimuli_trial.clear();
        return;
    }
    const PendingTrial pending = next_trial(s);
    std::vector<Curve> curves;
    std::string trial_id, track_id;
    if (const auto* t = std::get_if<ComparisonTrial>(&pending)) {
        trial_id = t->trial_id;
        track_id = t->track_id;
        curves = {t->curve_a(), t->curve_b()};
    } else {
        const auto& screen = std::get<EvaluationScreen>(pending);
        trial_id = screen.trial_id;
        track_id = screen.track_id;
        for (const auto& id : screen.stimuli) curves.push_back(s.curve_of(id));
    }
    if (session.stimuli_trial == trial_id) return;

    session.stimuli.clear();
    session.stimulus_ids.clear();
    session.stimuli_trial = trial_id;
    const auto cache_dir = session.dir / "stimuli";
    std::filesystem::create_directories(cache_dir);

    RenderSettings settings;
    settings.plan = s.config.band_plan;
    settings.tap_count = s.config.tap_count;
    settings.target_lufs = s.config.target_lufs;
    for (std::size_t i = 0; i < curves.size(); ++i) {
        const std::string id = stimulus_id(session.token, trial_id, i);
        session.stimulus_ids.push_back(id);
        const auto file = cache_dir / (id + ".wav");
        session.stimuli[id] = std::async(std::launch::async, [this, config = s.config, settings, curve = curves[i],
                                                              track_id, file]() mutable -> WavBytes {
                                  if (std::filesystem::exists(file)) {
                                      const std::string bytes = read_file(file);
                                      return std::make_shared<const std::vector<std::uint8_t>>(bytes.begin(), bytes.end());
                                  }
                                  const auto track = track_excerpt(config, track_id);
                                  if (config.compensation) {
                                      settings.compensation = load_fir(config.resolve(*config.compensation), track->sample_rate);
                                  }
                                  const RenderedStimulus rendered = render_stimulus(*track, curve, settings);
                                  auto wav = std::make_shared<const std::vector<std::uint8_t>>(encode_wav(rendered.clip));
                                  write_atomic(file, std::string(wav->begin(), wav->end()));
                                  return wav;
                              }).share();
    }
}

json Service::trial_descriptor(const Active& session) const {
    const SessionState& s = session.state;
    json stimuli = json::array();
    const PendingTrial pending = next_trial(s);
    const bool pair = std::holds_alternative<ComparisonTrial>(pending);
    for (std::size_t i = 0; i < session.stimulus_ids.size(); ++i) {
        stimuli.push_back({{"id", session.stimulus_ids[i]},
                           {"label", pair ? std::string(1, static_cast<char>('A' + i)) : std::to_string(i + 1)}});
    }
    json body = {{"stage", std::string(to_string(s.stage))},
                 {"trial_id", session.stimuli_trial},
                 {"layout", pair ? "pair" : "multi"},
                 {"stimuli", stimuli},
                 {"progress", progress_json(s)}};
    if (pair) {
        body["scale"] = {{"min", -1}, {"max", 1}, {"labels", {"A is better", "Same", "B is better"}}};
    } else {
        body["scale"] = {{"min", 1}, {"max", 5}, {"labels", {"Bad", "Poor", "Fair", "Good", "Excellent"}}};
    }
    return body;
}

ApiResponse Service::create_session(const json& request) {
    if (!request.is_object() || !request.contains("config") || !request.at("config").is_string()) {
        return error(422, "request needs a string 'config' id");
    }
    const std::string config_id = request.at("config").get<std::string>();
    std::string key;
    if (request.contains("idempotency_key")) {
        if (!request.at("idempotency_key").is_string()) return error(422, "'idempotency_key' must be a string");
        key = request.at("idempotency_key").get<std::string>();
    }
    const auto config_it = options_.configs.find(config_id);
    if (config_it == options_.configs.end()) return error(404, "unknown config '" + config_id + "'");

    std::lock_guard lock(mutex_);
    if (!key.empty()) {
        if (const auto it = idempotency_.find(key); it != idempotency_.end()) {
            return {200, json{{"token", it->second}, {"replayed", true}}};
        }
    }
    ExperimentConfig config = config_it->second;
    json missing = json::array();
    for (const auto& t : config.tracks) {
        const auto path = config.resolve(t.path);
        if (!std::filesystem::exists(path)) missing.push_back(path.string());
    }
    if (!missing.empty()) return {422, json{{"error", "missing track files"}, {"files", missing}}};

    auto session = std::make_shared<Active>();
    session->token = new_token();
    session->config_id = config_id;
    session->base_dir = config.base_dir;
    session->dir = options_.data_dir / "sessions" / session->token;
    // Each listener gets an independent random stream.
    config.de.seed = mix_seed(config.de.seed, fnv1a(session->token));
    try {
        session->state = prefevo::create_session(config, now_utc());
    } catch (const ValidationError& e) {
        return error(422, e.what());
    }
    std::filesystem::create_directories(session->dir);
    write_atomic(session->dir / "session.json",
                 json{{"token", session->token}, {"config_id", config_id}, {"base_dir", config.base_dir.string()}}.dump(2));
    persist(*session);
    schedule_stimuli(*session);
    if (!key.empty()) {
        idempotency_[key] = session->token;
        write_atomic(options_.data_dir / "idempotency.json", json(idempotency_).dump(2));
    }
    const std::string token = session->token;
    sessions_.emplace(token, std::move(session));
    return {201, json{{"token", token}}};
}

ApiResponse Service::get_trial(const std::string& token) {
    const auto session = find(token);
    if (!session) return error(404, "unknown session");
    std::lock_guard lock(session->mutex);
    if (session->state.stage == Stage::Done) {
        return {200, json{{"stage", "done"},
                          {"best_ranked", *session->state.best_ranked},
                          {"progress", progress_json(session->state)}}};
    }
    schedule_stimuli(*session);
    try {
        for (auto& [_, f] : session->stimuli) f.get();
    } catch (const std::exception& e) {
        // Drop the failed renders so the next request retries them.
        session->stimuli_trial.clear();
        return error(500, std::string("stimulus rendering failed: ") + e.what());
    }
    return {200, trial_descriptor(*session)};
}

StimulusResponse Service::get_stimulus(const std::string& token, const std::string& id) {
    const auto session = find(token);
    if (!session) return {404, nullptr, json{{"error", "unknown session"}}};
    std::lock_guard lock(session->mutex);
    const auto it = session->stimuli.find(id);
    if (it == session->stimuli.end()) return {410, nullptr, json{{"error", "stimulus is not part of the pending trial"}}};
    try {
        return {200, it->second.get(), {}};
    } catch (const std::exception& e) {
        session->stimuli_trial.clear();
        return {500, nullptr, json{{"error", std::string("stimulus rendering failed: ") + e.what()}}};
    }
}

ApiResponse Service::submit_rating(const std::string& token, const json& payload) {
    const auto session = find(token);
    if (!session) return error(404, "unknown session");
    if (!payload.is_object() || !payload.contains("trial_id") || !payload.at("trial_id").is_string()) {
        return error(422, "payload needs a string 'trial_id'");
    }
    const std::string trial_id = payload.at("trial_id").get<std::string>();

    std::lock_guard lock(session->mutex);
    SessionState& s = session->state;
    if (s.stage == Stage::Done) return error(409, "session is complete");
    try {
        if (s.stage == Stage::Comparison) {
            if (s.pending->trial_id != trial_id) return error(409, "trial '" + trial_id + "' is not pending");
            if (!payload.contains("rating") || !payload.at("rating").is_number()) {
                return error(422, "comparison payload needs a numeric 'rating' in [-1, 1]");
            }
            s = submit_comparison(s, trial_id, BipolarRating(payload.at("rating").get<double>()), now_utc());
        } else {
            if (s.screens.at(s.screen_position).trial_id != trial_id) {
                return error(409, "trial '" + trial_id + "' is not pending");
            }
            if (!payload.contains("ratings") || !payload.at("ratings").is_array()) {
                return error(422, "evaluation payload needs a 'ratings' array with values in [1, 5]");
            }
            std::vector<EvaluationRating> ratings;
            for (const auto& v : payload.at("ratings")) {
                if (!v.is_number()) return error(422, "ratings must be numbers in [1, 5]");
                ratings.emplace_back(v.get<double>());
            }
            s = submit_evaluation(s, trial_id, ratings, now_utc());
        }
    } catch (const ValidationError& e) {
        return error(422, e.what());
    } catch (const StateError& e) {
        return error(409, e.what());
    }
    persist(*session);
    schedule_stimuli(*session);
    json body = {{"stage", std::string(to_string(s.stage))}, {"progress", progress_json(s)}};
    if (s.best_ranked) body["best_ranked"] = *s.best_ranked;
    return {200, body};
}

} // namespace prefevo

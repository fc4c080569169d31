#include "cli.hpp"

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "prefevo/analysis.hpp"
#include "prefevo/errors.hpp"
#include "prefevo/http_server.hpp"
#include "prefevo/loudness.hpp"
#include "prefevo/render.hpp"
#include "prefevo/simulate.hpp"

namespace prefevo::cli {

using nlohmann::json;

namespace {

HttpServer* g_server = nullptr;

extern "C" void handle_stop_signal(int) {
    if (g_server) g_server->stop();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Tables written by both simulate and analyze.
json write_tables(const std::filesystem::path& dir, const ConvergenceTable& table,
                  const std::vector<BenchmarkRecord>& benchmark) {
    std::filesystem::create_directories(dir);
    write_text(dir / "convergence.csv", convergence_csv(table));
    write_text(dir / "convergence_summary.csv", convergence_summary_csv(table));
    write_text(dir / "convergence_series.dat", convergence_series(table));

    std::size_t declining = 0, monotone = 0;
    double ratio_sum = 0.0;
    const std::size_t last = table.generations() - 1;
    for (const auto& row : table.per_session_average) {
        if (row[last] < row[0]) ++declining;
        bool strictly = true;
        for (std::size_t g = 1; g < row.size(); ++g) strictly = strictly && row[g] < row[g - 1];
        if (strictly) ++monotone;
        ratio_sum += row[0] > 0.0 ? row[last] / row[0] : 1.0;
    }
    json summary = {{"sessions", table.sessions.size()},
                    {"generations", table.generations()},
                    {"band_average_sd_db", table.band_average},
                    {"sessions_declining", declining},
                    {"sessions_strictly_monotone", monotone},
                    {"mean_final_initial_ratio", ratio_sum / static_cast<double>(table.sessions.size())}};
    if (!benchmark.empty()) {
        const json preference = to_json(preference_summary(benchmark));
        write_text(dir / "preference.json", preference.dump(2) + "\n");
        summary["preference"] = preference;
    }
    write_text(dir / "summary.json", summary.dump(2) + "\n");
    return summary;
}

void print_summary(std::ostream& out, const json& summary, bool as_json) {
    if (as_json) {
        out << summary.dump(2) << '\n';
        return;
    }
    out << "sessions: " << summary["sessions"] << "\n";
    out << "band-averaged sd (dB) by generation:";
    for (const auto& v : summary["band_average_sd_db"]) out << ' ' << v.get<double>();
    out << "\nsessions declining first->last: " << summary["sessions_declining"]
        << ", strictly monotone: " << summary["sessions_strictly_monotone"]
        << "\nmean final/initial ratio: " << summary["mean_final_initial_ratio"].get<double>() << '\n';
    if (summary.contains("preference")) {
        const auto& p = summary["preference"];
        out << "initial mean " << p["initial"]["mean"].get<double>() << ", best ranked mean "
            << p["best_ranked"]["mean"].get<double>() << ", odds ratio " << p["odds_ratio"].get<double>() << '\n';
    }
}

Curve read_curve(const std::filesystem::path& path) {
    const json j = json::parse(read_text(path));
    return curve_from_json(j.is_object() ? j.at("gains_db") : j, "gains_db");
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Interactive differential evolution of headphone target curves", "prefevo"};
    app.require_subcommand(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Run sessions against a simulated listener");
    std::string sim_config, sim_out = "sim-out", sim_listener;
    std::size_t sim_sessions = 24;
    std::optional<std::uint64_t> sim_seed;
    std::optional<double> sim_noise, sim_indifference, sim_f, sim_c, sim_half_width;
    std::optional<int> sim_pop, sim_generations;
    bool sim_json = false, sim_serial = false;
    simulate->add_option("-c,--config", sim_config, "Experiment config (JSON); defaults apply otherwise")
        ->check(CLI::ExistingFile);
    simulate->add_option("-o,--out", sim_out, "Output directory for logs and tables");
    simulate->add_option("-n,--sessions", sim_sessions, "Number of sessions")->check(CLI::PositiveNumber);
    simulate->add_option("--seed", sim_seed, "Batch seed (overrides config)");
    simulate->add_option("--listener", sim_listener, "oracle | random");
    simulate->add_option("--noise-sd", sim_noise, "Listener noise in dB");
    simulate->add_option("--indifference", sim_indifference, "Half-width of the 'Same' region in dB");
    simulate->add_option("--scale-factor", sim_f, "DE scale factor F");
    simulate->add_option("--crossover-rate", sim_c, "DE crossover rate C");
    simulate->add_option("--population", sim_pop, "Population size");
    simulate->add_option("--generations", sim_generations, "Generations");
    simulate->add_option("--half-width", sim_half_width, "Bounds half-width around the initial curve, dB");
    simulate->add_flag("--serial", sim_serial, "Run sessions one after another");
    simulate->add_flag("--json", sim_json, "Machine-readable summary");

    // serve
    auto* serve = app.add_subcommand("serve", "Serve the listening-test API");
    std::vector<std::string> serve_configs;
    std::string serve_host = "127.0.0.1", serve_data = "data", serve_static;
    int serve_port = 8080;
    serve->add_option("-c,--config", serve_configs, "Config file; id is the file stem (repeatable)")
        ->required()
        ->check(CLI::ExistingFile);
    serve->add_option("--host", serve_host, "Listen address");
    serve->add_option("-p,--port", serve_port, "Listen port (0 picks one)");
    serve->add_option("-d,--data-dir", serve_data, "Session storage directory");
    serve->add_option("--static", serve_static, "Directory served at / (listener UI)");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Convergence and preference tables from session logs");
    std::string an_logs, an_out;
    bool an_json = false;
    analyze->add_option("logs", an_logs, "Log directory")->required();
    analyze->add_option("-o,--out", an_out, "Output directory (default: the log directory)");
    analyze->add_flag("--json", an_json, "Machine-readable summary");

    // render
    auto* render = app.add_subcommand("render", "Equalize and loudness-align a track");
    std::string r_track, r_curve, r_out, r_comp;
    double r_target = -18.0;
    std::size_t r_taps = kDefaultTapCount;
    bool r_json = false;
    render->add_option("track", r_track, "Input WAV")->required();
    render->add_option("curve", r_curve, "Curve file: JSON array of band gains (dB)")->required();
    render->add_option("-o,--out", r_out, "Output WAV")->required();
    render->add_option("--compensation", r_comp, "Compensation FIR (text or WAV)");
    render->add_option("--target", r_target, "Target loudness, LUFS");
    render->add_option("--taps", r_taps, "Equalizer length (odd)");
    render->add_flag("--json", r_json, "Machine-readable summary");

    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    try {
        if (*simulate) {
            ExperimentConfig config = sim_config.empty() ? ExperimentConfig::defaults() : load_config(sim_config);
            if (sim_seed) config.de.seed = *sim_seed;
            if (!sim_listener.empty()) config.listener.kind = listener_kind_from_string(sim_listener);
            if (sim_noise) config.listener.noise_sd = *sim_noise;
            if (sim_indifference) config.listener.indifference_width = *sim_indifference;
            if (sim_f) config.de.scale_factor = *sim_f;
            if (sim_c) config.de.crossover_rate = *sim_c;
            if (sim_pop) config.de.population_size = *sim_pop;
            if (sim_generations) config.de.generations = *sim_generations;
            if (sim_half_width) config.bounds = Bounds::around(config.initial_curve, *sim_half_width);
            config.validate();

            const auto results = sim_serial ? simulate_batch_serial(config, sim_sessions, config.de.seed)
                                            : simulate_batch(config, sim_sessions, config.de.seed);
            write_simulation_logs(sim_out, results);
            save_config(std::filesystem::path(sim_out) / "config.json", config);
            std::vector<SessionHistory> histories;
            std::vector<BenchmarkRecord> benchmark;
            for (const auto& r : results) {
                histories.push_back({r.session_id, r.state.history});
                benchmark.insert(benchmark.end(), r.benchmark.begin(), r.benchmark.end());
            }
            print_summary(out, write_tables(sim_out, convergence_table(histories), benchmark), sim_json);
        } else if (*serve) {
            ServiceOptions options;
            options.data_dir = serve_data;
            for (const auto& path : serve_configs) {
                ExperimentConfig config = load_config(path);
                config.validate();
                options.configs.emplace(std::filesystem::path(path).stem().string(), std::move(config));
            }
            Service service(std::move(options));
            HttpServer server(service, serve_static);
            const int port = server.bind(serve_host, serve_port);
            g_server = &server;
            std::signal(SIGINT, handle_stop_signal);
            std::signal(SIGTERM, handle_stop_signal);
            out << "listening on http://" << serve_host << ':' << port << std::endl;
            server.serve();
            g_server = nullptr;
            service.persist_all();
            out << "stopped; " << service.tokens().size() << " session(s) persisted" << std::endl;
        } else if (*analyze) {
            const LogDirectory logs = read_log_directory(an_logs);
            const auto summary =
                write_tables(an_out.empty() ? an_logs : an_out, convergence_table(logs.sessions), logs.benchmark);
            print_summary(out, summary, an_json);
        } else if (*render) {
            const AudioClip track = read_wav(r_track);
            RenderSettings settings;
            settings.tap_count = r_taps;
            settings.target_lufs = r_target;
            if (!r_comp.empty()) settings.compensation = load_fir(r_comp, track.sample_rate);
            const RenderedStimulus rendered = render_stimulus(track, read_curve(r_curve), settings);
            write_wav(r_out, rendered.clip);
            const json summary = {{"out", r_out},
                                  {"gain_db", rendered.gain_db},
                                  {"exceeds_full_scale", rendered.exceeds_full_scale},
                                  {"loudness_lufs", measure_loudness(rendered.clip).value_or(-HUGE_VAL)}};
            if (r_json) {
                out << summary.dump(2) << '\n';
            } else {
                out << "wrote " << r_out << " (gain " << rendered.gain_db << " dB"
                    << (rendered.exceeds_full_scale ? ", peak exceeds full scale" : "") << ")\n";
            }
        }
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

} // namespace prefevo::cli

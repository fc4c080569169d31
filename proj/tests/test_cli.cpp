#include "doctest.h"

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <csignal>
#include <fstream>
#include <sstream>
#include <thread>

#include "cli.hpp"
#include "httplib.h"
#include "prefevo/analysis.hpp"
#include "prefevo/loudness.hpp"
#include "support.hpp"

using namespace prefevo;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "prefevo");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

int free_port() {
    const int fd = socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
    socklen_t len = sizeof addr;
    getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    close(fd);
    return ntohs(addr.sin_port);
}

} // namespace

TEST_CASE("simulate is a pure function of its inputs") {
    const auto a = testing::temp_dir("cli-sim-a"), b = testing::temp_dir("cli-sim-b");
    const Run ra = run({"simulate", "-n", "4", "--seed", "9", "-o", a.string(), "--json"});
    const Run rb = run({"simulate", "-n", "4", "--seed", "9", "-o", b.string(), "--json", "--serial"});
    REQUIRE(ra.code == 0);
    REQUIRE(rb.code == 0);
    CHECK(ra.out == rb.out);
    for (const char* f : {"session_000/events.jsonl", "session_003/snapshot.json", "benchmark.jsonl", "convergence.csv"}) {
        CHECK(testing::read_text(a / f) == testing::read_text(b / f));
    }
    CHECK(json::parse(ra.out).at("sessions") == 4);
}

TEST_CASE("simulate flags override the config file") {
    const auto dir = testing::temp_dir("cli-sim-flags");
    ExperimentConfig config = ExperimentConfig::defaults();
    config.de.generations = 3;
    save_config(dir / "config.json", config);
    const Run r = run({"simulate", "-c", (dir / "config.json").string(), "-n", "2", "--generations", "5",
                       "--listener", "random", "-o", (dir / "out").string(), "--json"});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out).at("generations") == 5);
    const ExperimentConfig used = load_config(dir / "out" / "config.json");
    CHECK(used.de.generations == 5);
    CHECK(used.listener.kind == ListenerKind::Random);
}

TEST_CASE("simulate rejects invalid models") {
    const auto dir = testing::temp_dir("cli-sim-bad");
    CHECK(run({"simulate", "--listener", "psychic", "-o", dir.string()}).code == 1);
    CHECK(run({"simulate", "--noise-sd", "-1", "-o", dir.string()}).code == 1);
    CHECK(run({"simulate", "--population", "3", "-o", dir.string()}).code == 1);
    CHECK(run({"simulate", "--bogus"}).code == 1);
    CHECK(run({}).code == 1);
}

TEST_CASE("analyze reproduces the in-process tables") {
    const auto sim = testing::temp_dir("cli-analyze-sim"), out = testing::temp_dir("cli-analyze-out");
    REQUIRE(run({"simulate", "-n", "6", "--seed", "3", "-o", sim.string()}).code == 0);
    const Run r = run({"analyze", sim.string(), "-o", out.string(), "--json"});
    REQUIRE(r.code == 0);
    for (const char* f : {"convergence.csv", "convergence_summary.csv", "convergence_series.dat", "preference.json", "summary.json"}) {
        CHECK(testing::read_text(sim / f) == testing::read_text(out / f));
    }
    const std::string summary = testing::read_text(out / "convergence_summary.csv");
    CHECK(std::count(summary.begin(), summary.end(), '\n') - 1 == 8);
    CHECK(run({"analyze", testing::temp_dir("cli-analyze-empty").string()}).code == 1);
    CHECK(run({"analyze", "/nonexistent/dir"}).code != 0);
}

TEST_CASE("render") {
    const auto dir = testing::temp_dir("cli-render");
    write_wav(dir / "track.wav", testing::program_clip(48000, 2.0, 5));
    {
        std::ofstream(dir / "zero.json") << "[0,0,0,0,0,0,0,0,0,0]";
        std::ofstream(dir / "curve.json") << R"({"gains_db":[1,-2,0.5,3,-3,0,1.5,-1,2,-0.5]})";
        std::ofstream(dir / "short.json") << "[1,2,3]";
    }
    const Run zero = run({"render", (dir / "track.wav").string(), (dir / "zero.json").string(), "-o",
                          (dir / "zero.wav").string(), "--json"});
    REQUIRE(zero.code == 0);
    const AudioClip rendered = read_wav(dir / "zero.wav");
    CHECK(std::abs(*measure_loudness(rendered) + 18.0) <= 0.1);
    const AlignedClip expected = align_loudness(read_wav(dir / "track.wav"), -18.0);
    CHECK(json::parse(zero.out).at("gain_db").get<double>() == doctest::Approx(expected.gain_db).epsilon(0.01));

    CHECK(run({"render", (dir / "track.wav").string(), (dir / "curve.json").string(), "-o", (dir / "eq.wav").string(),
               "--target", "-23"}).code == 0);
    CHECK(std::abs(*measure_loudness(read_wav(dir / "eq.wav")) + 23.0) <= 0.1);
    CHECK(run({"render", (dir / "missing.wav").string(), (dir / "zero.json").string(), "-o", (dir / "x.wav").string()}).code == 2);
    CHECK(run({"render", (dir / "track.wav").string(), (dir / "short.json").string(), "-o", (dir / "x.wav").string()}).code == 1);
    CHECK(run({"render", (dir / "track.wav").string(), (dir / "zero.json").string(), "-o", (dir / "x.wav").string(), "--taps", "4096"}).code == 1);
}

TEST_CASE("serve: port in use, SIGTERM mid-trial, restart resumes") {
    const auto root = testing::temp_dir("cli-serve");
    const ExperimentConfig config = testing::config_with_tracks(root / "exp");
    save_config(root / "exp" / "default.json", config);
    const std::string config_path = (root / "exp" / "default.json").string();
    const std::string data = (root / "data").string();
    const int port = free_port();
    const std::vector<std::string> args{"serve", "-c", config_path, "-p", std::to_string(port), "-d", data};

    Run first{};
    std::thread server([&] { first = run(args); });
    httplib::Client client("127.0.0.1", port);
    for (int i = 0; i < 200 && !client.Get("/health"); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(10));

    CHECK(run(args).code == 2); // port already taken

    const std::string token =
        json::parse(client.Post("/api/sessions", R"({"config":"default"})", "application/json")->body).at("token");
    for (int i = 0; i < 3; ++i) {
        const json t = json::parse(client.Get("/api/sessions/" + token + "/trial")->body);
        client.Post("/api/sessions/" + token + "/ratings", json{{"trial_id", t.at("trial_id")}, {"rating", 0.4}}.dump(),
                    "application/json");
    }
    const std::string pending = client.Get("/api/sessions/" + token + "/trial")->body;
    std::raise(SIGTERM);
    server.join();
    CHECK(first.code == 0);
    CHECK(first.out.find("1 session(s) persisted") != std::string::npos);

    Run second{};
    std::thread restarted([&] { second = run(args); });
    for (int i = 0; i < 200 && !client.Get("/health"); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(10));
    auto resumed = client.Get("/api/sessions/" + token + "/trial");
    REQUIRE(resumed);
    CHECK(resumed->body == pending);
    std::raise(SIGINT);
    restarted.join();
    CHECK(second.code == 0);
}

// Drives the built binary end to end: exit codes, file outputs, determinism.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/stat.h>
#include <sys/wait.h>

#include <json.hpp>

#include "urabound/curve.hpp"

namespace {

std::string bin_path() {
    const char* env = std::getenv("URABOUND_BIN");
    REQUIRE(env != nullptr);
    return env;
}

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run(const std::string& dir, const std::string& args) {
    const std::string cmd = "cd " + dir + " && " + bin_path() + " " + args +
                            " > cli_stdout.txt 2> cli_stderr.txt";
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(dir + "/cli_stdout.txt");
    r.err = slurp(dir + "/cli_stderr.txt");
    return r;
}

std::string make_workspace() {
    char tmpl[] = "/tmp/urabound_cli_XXXXXX";
    const char* dir = mkdtemp(tmpl);
    REQUIRE(dir != nullptr);
    return dir;
}

void write_config(const std::string& dir, const std::string& name, const std::string& body) {
    std::ofstream out(dir + "/" + name);
    out << body;
}

const char* kDeskConfig =
    "ka = 4\n"
    "n = 64\n"
    "k = 8\n"
    "p = 1.25\n"
    "p_prime = 1.0\n"
    "eps_target = 0.01\n"
    "seed = 7\n";

}  // namespace

TEST_CASE("selftest passes") {
    const auto ws = make_workspace();
    const auto r = run(ws, "selftest");
    CHECK(r.code == 0);
    CHECK(r.out.find("[PASS]") != std::string::npos);
    CHECK(r.out.find("[FAIL]") == std::string::npos);
}

TEST_CASE("config errors exit with code 2 and a reason") {
    const auto ws = make_workspace();
    write_config(ws, "desk.cfg", kDeskConfig);

    auto r = run(ws, "train --config missing.cfg --out x.json");
    CHECK(r.code == 2);
    CHECK(r.err.find("error: config:") != std::string::npos);

    r = run(ws, "train --config desk.cfg --samples 1 --out x.json");
    CHECK(r.code == 2);

    write_config(ws, "conflict.cfg", std::string(kDeskConfig) + "ebn0_db = 3\n");
    r = run(ws, "eval --config conflict.cfg --out x.json");
    CHECK(r.code == 2);
}

TEST_CASE("training is deterministic and reports converge") {
    const auto ws = make_workspace();
    write_config(ws, "desk.cfg", kDeskConfig);

    auto r = run(ws, "train --config desk.cfg --model linear --samples 3000 --epochs 8"
                     " --out lin.json");
    REQUIRE(r.code == 0);
    const auto first = slurp(ws + "/lin.json");
    CHECK(!first.empty());
    const auto report = nlohmann::json::parse(slurp(ws + "/lin.json.report.json"));
    CHECK(report.at("loss_trace").size() == 8);

    r = run(ws, "train --config desk.cfg --model linear --samples 3000 --epochs 8"
                " --out lin2.json");
    REQUIRE(r.code == 0);
    CHECK(slurp(ws + "/lin2.json") == first);

    // Divergent training exits 3.
    r = run(ws, "train --config desk.cfg --model linear --samples 500 --epochs 3"
                " --step-size 1e6 --out div.json");
    CHECK(r.code == 3);
    CHECK(r.err.find("error: numerical:") != std::string::npos);
}

TEST_CASE("constants pipeline: analytic, zero-dimension mismatch, mlp") {
    const auto ws = make_workspace();
    write_config(ws, "desk.cfg", kDeskConfig);

    // Analytic reference: sigma^2 = 1 + 4 * 1.0 = 5.
    auto r = run(ws, "train --config desk.cfg --model analytic --out an.json");
    REQUIRE(r.code == 0);
    r = run(ws, "constants --config desk.cfg --checkpoint an.json --n-samples 30000"
                " --out an_consts.json");
    REQUIRE(r.code == 0);
    const auto consts = nlohmann::json::parse(slurp(ws + "/an_consts.json"));
    CHECK(consts.at("j_star").get<double>() == doctest::Approx(0.2).epsilon(0.05));
    CHECK(consts.at("k_e").get<double>() == 0.0);
    CHECK(consts.at("v_star").get<double>() ==
          doctest::Approx(1.0 + consts.at("j_star").get<double>()).epsilon(1e-12));
    CHECK(consts.at("model_checksum").get<std::string>().size() == 16);

    // Dimension mismatch exits 2.
    write_config(ws, "other.cfg",
                 "ka = 4\nn = 32\nk = 8\np = 1.25\np_prime = 1.0\neps_target = 0.01\nseed = 7\n");
    r = run(ws, "constants --config other.cfg --checkpoint an.json --n-samples 1000"
                " --out bad.json");
    CHECK(r.code == 2);
    CHECK(r.err.find("dimension") != std::string::npos);

    // The mlp's own denoiser differs from the score rule: k_e > 0.
    r = run(ws, "train --config desk.cfg --model mlp --samples 1500 --epochs 4 --hidden 8"
                " --step-size 0.02 --out mlp.json");
    REQUIRE(r.code == 0);
    r = run(ws, "constants --config desk.cfg --checkpoint mlp.json --n-samples 2000"
                " --out mlp_consts.json");
    REQUIRE(r.code == 0);
    const auto mc = nlohmann::json::parse(slurp(ws + "/mlp_consts.json"));
    CHECK(mc.at("k_e").get<double>() > 0.0);
    CHECK(mc.at("v_star").get<double>() > 1.0);

    // Forcing the score-rule denoiser zeroes the mismatch for the same model.
    r = run(ws, "constants --config desk.cfg --checkpoint mlp.json --n-samples 2000"
                " --denoiser score --out mlp_score.json");
    REQUIRE(r.code == 0);
    CHECK(nlohmann::json::parse(slurp(ws + "/mlp_score.json")).at("k_e").get<double>() == 0.0);
}

TEST_CASE("eval writes a parsable record with clamped total") {
    const auto ws = make_workspace();
    write_config(ws, "desk.cfg", kDeskConfig);
    auto r = run(ws, "eval --config desk.cfg --v-star 1.2 --samples 800 --out ev.json");
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(ws + "/ev.json"));
    CHECK(j.at("eps_total").get<double>() <= 1.0);
    CHECK(j.at("per_t").size() <= 4);
    CHECK(j.at("variants").at("kernel") == "split");
    CHECK(slurp(ws + "/ev.json.manifest.json").find("\"command\": \"eval\"") !=
          std::string::npos);
}

TEST_CASE("curve-ka smoke: three variants per ka, replay is byte-identical") {
    const auto ws = make_workspace();
    // Small blocklength + low ratios keep the desk bracket feasible.
    write_config(ws, "curve.cfg",
                 "ka = 3\nn = 128\nk = 10\neps_target = 0.02\nseed = 11\n");
    auto r = run(ws, "curve-ka --config curve.cfg --ka-list 3 --target-eps 0.02"
                     " --lo-db 0 --hi-db 14 --ratios 0.7,0.8,0.9 --samples 600"
                     " --out curve.csv");
    REQUIRE(r.code == 0);
    const auto csv = slurp(ws + "/curve.csv");
    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "ka,ebn0_db,eps_total,q0,best_p_prime,v_star,variant");
    std::size_t rows = 0;
    bool saw_denoiser = false, saw_v1 = false, saw_base = false;
    for (std::string line; std::getline(lines, line);) {
        ++rows;
        CHECK(line.find("nan") == std::string::npos);
        saw_denoiser |= line.find(",denoiser") != std::string::npos;
        saw_v1 |= line.find("denoiser_v1") != std::string::npos;
        saw_base |= line.find("baseline") != std::string::npos;
    }
    CHECK(rows == 3);
    CHECK(saw_denoiser);
    CHECK(saw_v1);
    CHECK(saw_base);
    CHECK(csv.find("\r") == std::string::npos);  // LF only

    // Rerun: byte-identical CSV.
    r = run(ws, "curve-ka --config curve.cfg --ka-list 3 --target-eps 0.02"
                " --lo-db 0 --hi-db 14 --ratios 0.7,0.8,0.9 --samples 600"
                " --out curve2.csv");
    REQUIRE(r.code == 0);
    CHECK(slurp(ws + "/curve2.csv") == csv);

    // Replay from the manifest into a fresh directory.
    REQUIRE(mkdir((ws + "/replayed").c_str(), 0755) == 0);
    r = run(ws, "replay curve.csv.manifest.json --out-dir replayed");
    REQUIRE(r.code == 0);
    CHECK(slurp(ws + "/replayed/curve.csv") == csv);
}

TEST_CASE("curve-ka marks bracket failures and keeps going") {
    const auto ws = make_workspace();
    write_config(ws, "curve.cfg",
                 "ka = 3\nn = 128\nk = 10\neps_target = 0.02\nseed = 11\n");
    // hi-db too low to reach the target: rows emitted as nan, rc stays 0.
    auto r = run(ws, "curve-ka --config curve.cfg --ka-list 3 --target-eps 1e-4"
                     " --lo-db 0 --hi-db 0.5 --ratios 0.8 --samples 400 --out bad.csv");
    REQUIRE(r.code == 0);
    CHECK(r.err.find("bracket_failure") != std::string::npos);
    CHECK(slurp(ws + "/bad.csv").find("nan") != std::string::npos);
}

TEST_CASE("curve-eps: monotone under common random numbers, clamp emitted as 1") {
    const auto ws = make_workspace();
    write_config(ws, "eps.cfg",
                 "ka = 4\nn = 128\nk = 10\neps_target = 0.01\nseed = 13\n");
    auto r = run(ws, "curve-eps --config eps.cfg --ebn0-grid \"-2,2,6,10\" --ratio 0.8"
                     " --samples 800 --v-star 1.3 --out eps.csv");
    REQUIRE(r.code == 0);
    const auto csv = slurp(ws + "/eps.csv");
    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    double prev = 2.0;
    std::string prev_variant;
    bool saw_clamp = false;
    for (std::string line; std::getline(lines, line);) {
        std::istringstream fields(line);
        std::string ka_s, db_s, eps_s, q0_s, pp_s, v_s, variant;
        std::getline(fields, ka_s, ',');
        std::getline(fields, db_s, ',');
        std::getline(fields, eps_s, ',');
        std::getline(fields, q0_s, ',');
        std::getline(fields, pp_s, ',');
        std::getline(fields, v_s, ',');
        std::getline(fields, variant, ',');
        const double eps = urabound::curve::parse_csv_double(eps_s);
        if (variant == prev_variant) CHECK(eps <= prev + 1e-12);
        if (eps_s == "1") saw_clamp = true;
        prev = eps;
        prev_variant = variant;
    }
    CHECK(saw_clamp);  // the -2 dB point clamps to exactly 1

    // Byte-identical rerun.
    r = run(ws, "curve-eps --config eps.cfg --ebn0-grid \"-2,2,6,10\" --ratio 0.8"
                " --samples 800 --v-star 1.3 --out eps2.csv");
    REQUIRE(r.code == 0);
    CHECK(slurp(ws + "/eps2.csv") == csv);
}

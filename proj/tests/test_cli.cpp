#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#ifndef CAVMAG_CLI_PATH
#error "CAVMAG_CLI_PATH must point at the CLI binary"
#endif

namespace {

using Json = nlohmann::json;

int run(const std::string& args, const std::string& stdout_path = "/dev/null") {
    const std::string cmd =
        std::string(CAVMAG_CLI_PATH) + " " + args + " > " + stdout_path + " 2> /dev/null";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out);
    out << text;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
    return lines;
}

// a fast-running configuration shared by the CLI shape checks
Json base_config() {
    Json j;
    j["params"] = {{"omega_c", 85.0}, {"omega_m", 35.0}, {"epsilon_m", 50.0},
                   {"g_m", 1.0},      {"kappa_c", 1.0},  {"kappa_m", 0.3}};
    j["protocol"] = "CD";
    j["integrator"] = {{"rel_tol", 1e-8}, {"abs_tol", 1e-10}, {"t_end", 2.0},
                       {"sample_count", 21}};
    return j;
}

}  // namespace

TEST_CASE("cli exit codes") {
    CHECK(run("") == 2);                       // missing subcommand
    CHECK(run("frobnicate") == 2);             // unknown subcommand
    CHECK(run("simulate") == 2);               // no --config / --preset
    CHECK(run("simulate --preset NHS-z --out cli_x.csv") == 2);  // unknown preset
    CHECK(run("simulate --preset NHS-a") == 2);                  // no output path
    CHECK(run("simulate --config missing.json --out cli_x.csv") == 2);
    CHECK(run("simulate --preset NHS-a --format yaml --out cli_x.csv") == 2);
    CHECK(run("simulate --preset NHS-a --time-convention both --out cli_x.csv") == 2);
    // unwritable output -> I/O failure
    CHECK(run("simulate --preset NHS-a --out /nonexistent-dir/x.csv") == 4);
}

TEST_CASE("simulate writes the trajectory table") {
    write_file("cli_sim.json", base_config().dump());
    REQUIRE(run("simulate --config cli_sim.json --out cli_sim.csv") == 0);
    const auto lines = lines_of(slurp("cli_sim.csv"));
    REQUIRE(lines.size() == 22);  // header + sample_count rows
    CHECK(lines[0] == "t,re_a,im_a,re_m,im_m,p0r,p1r,log_scale,tracking_fidelity");
    CHECK(lines[1].substr(0, 2) == "0,");
    CHECK(lines.back().substr(0, 2) == "2,");

    SUBCASE("reruns are byte-identical") {
        REQUIRE(run("simulate --config cli_sim.json --out cli_sim2.csv") == 0);
        CHECK(slurp("cli_sim.csv") == slurp("cli_sim2.csv"));
        std::remove("cli_sim2.csv");
    }

    SUBCASE("json format") {
        REQUIRE(run("simulate --config cli_sim.json --format json --out cli_sim.jsn") == 0);
        const Json j = Json::parse(slurp("cli_sim.jsn"));
        CHECK(j["t"].size() == 21);
        CHECK(j["p1r"].size() == 21);
        CHECK(j["tracking_fidelity"].size() == 21);
        std::remove("cli_sim.jsn");
    }

    SUBCASE("period convention stretches the axis") {
        REQUIRE(run("simulate --config cli_sim.json --time-convention period "
                    "--out cli_simp.csv") == 0);
        const auto plines = lines_of(slurp("cli_simp.csv"));
        CHECK(plines.back().substr(0, 6) == "12.566");  // 4*pi
        std::remove("cli_simp.csv");
    }

    std::remove("cli_sim.json");
    std::remove("cli_sim.csv");
}

TEST_CASE("simulate accepts a preset plus overrides") {
    REQUIRE(run("simulate --preset NHS-a --out cli_preset.csv") == 0);
    const auto lines = lines_of(slurp("cli_preset.csv"));
    CHECK(lines.size() == 1002);  // default sample_count
    std::remove("cli_preset.csv");
}

TEST_CASE("sweep command") {
    Json j = base_config();
    j["sweep"] = {{"x_axis", "alpha"}, {"x_range", {-0.5, 0.5}}, {"x_points", 3}};
    j["integrator"]["sample_count"] = 5;
    write_file("cli_sweep.json", j.dump());

    SUBCASE("1D shape") {
        REQUIRE(run("sweep --config cli_sweep.json --out cli_sweep1.csv") == 0);
        const auto lines = lines_of(slurp("cli_sweep1.csv"));
        REQUIRE(lines.size() == 4);
        CHECK(lines[0] == "x,probability");
        CHECK(lines[1].substr(0, 5) == "-0.5,");
        CHECK(lines[3].substr(0, 4) == "0.5,");
        std::remove("cli_sweep1.csv");
    }

    SUBCASE("missing sweep section") {
        write_file("cli_nosweep.json", base_config().dump());
        CHECK(run("sweep --config cli_nosweep.json --out cli_x.csv") == 2);
        std::remove("cli_nosweep.json");
    }

    SUBCASE("alpha=0 row of the 2D grid equals the eta-only 1D sweep") {
        Json j2 = j;
        j2["sweep"] = {{"x_axis", "alpha"}, {"x_range", {-0.2, 0.2}}, {"x_points", 3},
                       {"y_axis", "eta"},   {"y_range", {-0.2, 0.2}}, {"y_points", 5}};
        write_file("cli_sweep2.json", j2.dump());
        REQUIRE(run("sweep --config cli_sweep2.json --out cli_grid2.csv --jobs 1") == 0);

        Json j1 = j;
        j1["sweep"] = {{"x_axis", "eta"}, {"x_range", {-0.2, 0.2}}, {"x_points", 5}};
        write_file("cli_sweep1d.json", j1.dump());
        REQUIRE(run("sweep --config cli_sweep1d.json --out cli_grid1.csv --jobs 1") == 0);

        const auto grid2 = lines_of(slurp("cli_grid2.csv"));
        const auto grid1 = lines_of(slurp("cli_grid1.csv"));
        REQUIRE(grid2.size() == 16);  // header + 3*5
        CHECK(grid2[0] == "alpha,eta,probability");
        REQUIRE(grid1.size() == 6);

        // middle alpha row (ix = 1, alpha = 0): rows 7..11 of the 2D file
        for (int iy = 0; iy < 5; ++iy) {
            const std::string& row2 = grid2[1 + 5 + iy];
            const std::string& row1 = grid1[1 + iy];
            const std::string val2 = row2.substr(row2.rfind(',') + 1);
            const std::string val1 = row1.substr(row1.rfind(',') + 1);
            CHECK(val2 == val1);  // byte-identical probabilities
        }
        std::remove("cli_sweep2.json");
        std::remove("cli_sweep1d.json");
        std::remove("cli_grid2.csv");
        std::remove("cli_grid1.csv");
    }

    std::remove("cli_sweep.json");
}

TEST_CASE("phase-diagram command") {
    REQUIRE(run("phase-diagram --g-points 10 --km-points 9 --out cli_phase.csv") == 0);
    const auto lines = lines_of(slurp("cli_phase.csv"));
    REQUIRE(lines.size() == 91);  // header + 10*9
    CHECK(lines[0] == "g_over_kc,km_over_kc,symmetry_code,stability_code");

    const auto ep = lines_of(slurp("cli_phase.csv.ep_locus"));
    REQUIRE(ep.size() == 10);  // header + km_points
    CHECK(ep[0] == "km_over_kc,g_over_kc");
    CHECK(ep[1] == "0,0.5");
    CHECK(ep.back() == "3,2");  // km/kc = 3 -> g/kc = 2

    CHECK(run("phase-diagram") == 2);  // no output path
    std::remove("cli_phase.csv");
    std::remove("cli_phase.csv.ep_locus");
}

TEST_CASE("calibrate command") {
    REQUIRE(run("calibrate --time-convention raw", "cli_cal.json") == 0);
    const Json j = Json::parse(slurp("cli_cal.json"));
    CHECK(j["entries"].size() == 16);  // 8 presets x 1 time x 2 signs
    CHECK(j.contains("best_time_convention"));
    CHECK(j.contains("best_diagonal_sign"));
    CHECK(j.contains("matched"));
    for (const auto& e : j["entries"]) {
        if (e.contains("deviation") && e["deviation"].is_number())
            CHECK(e["deviation"].get<double>() >= 0.0);
    }
    std::remove("cli_cal.json");

    SUBCASE("--out writes the same report to a file") {
        REQUIRE(run("calibrate --time-convention raw --out cli_cal2.json") == 0);
        const Json j2 = Json::parse(slurp("cli_cal2.json"));
        CHECK(j2["entries"].size() == 16);
        std::remove("cli_cal2.json");
    }
}

TEST_CASE("presets list") {
    REQUIRE(run("presets list", "cli_presets.json") == 0);
    const Json arr = Json::parse(slurp("cli_presets.json"));
    REQUIRE(arr.is_array());
    REQUIRE(arr.size() == 8);
    int with_expected = 0;
    for (const auto& p : arr) {
        CHECK(p.contains("name"));
        CHECK(p["config"]["params"]["omega_c"] == 85.0);
        CHECK(p["config"].contains("protocol"));
        if (p.contains("expected")) ++with_expected;
    }
    CHECK(with_expected == 4);
    CHECK(run("presets") == 2);  // list is required
    std::remove("cli_presets.json");
}

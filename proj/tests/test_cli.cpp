#include "doctest.h"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
    int code = -1;
    std::string out;  // stdout and stderr interleaved
};

CliResult run_cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + FFMAP_CLI_EXE + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return {};
    CliResult r;
    std::array<char, 4096> buf;
    std::size_t k = 0;
    while ((k = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), k);
    const int st = pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "ffmap_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t line_count(const std::string& s) {
    std::size_t n = 0;
    for (char c : s)
        if (c == '\n') ++n;
    return n;
}

}  // namespace

TEST_CASE("orbit command writes a csv with the seed and every iterate") {
    const fs::path dir = scratch("orbit_basic");
    const CliResult r = run_cli("orbit -n 50 --out-dir " + dir.string());
    CHECK(r.code == 0);
    CHECK(r.out.find("wrote ") != std::string::npos);
    CHECK(r.out.find("points: 51") != std::string::npos);

    const std::string csv = slurp(dir / "orbit.csv");
    CHECK(csv.rfind("# version: 1.0.0", 0) == 0);
    CHECK(csv.find("\"command\":\"orbit\"") != std::string::npos);
    CHECK(csv.find("n,x,y\n") != std::string::npos);
    CHECK(csv.find("0,0.564,0.342\n") != std::string::npos);
    // 2 comment lines + column header + 51 rows
    CHECK(line_count(csv) == 54);
    CHECK_FALSE(fs::exists(dir / "orbit.json"));
    CHECK_FALSE(fs::exists(dir / "orbit.svg"));
}

TEST_CASE("orbit command adds json and svg on request") {
    const fs::path dir = scratch("orbit_formats");
    const CliResult r = run_cli("orbit -n 20 --format json --format svg --out-dir " + dir.string());
    CHECK(r.code == 0);

    const json j = json::parse(slurp(dir / "orbit.json"));
    CHECK(j["version"] == "1.0.0");
    CHECK(j["config"]["command"] == "orbit");
    CHECK(j["escaped"] == false);
    CHECK(j["points_written"] == 21);
    CHECK(j["last"].contains("x"));

    const std::string svg = slurp(dir / "orbit.svg");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("version: 1.0.0") != std::string::npos);
}

TEST_CASE("flags override the config file which overrides the environment") {
    const fs::path d1 = scratch("prec_config");
    const fs::path d2 = scratch("prec_env");
    const fs::path d3 = scratch("prec_flag");

    const fs::path cfg = d1 / "run.json";
    {
        std::ofstream out(cfg);
        out << "{\"mu\": 4.75, \"iters\": 10, \"out_dir\": \"" << d1.string() << "\"}\n";
    }

    // config file beats the environment variable
    CliResult r = run_cli("orbit --config " + cfg.string(), "FFMAP_OUT_DIR=" + d2.string());
    CHECK(r.code == 0);
    CHECK(fs::exists(d1 / "orbit.csv"));
    CHECK_FALSE(fs::exists(d2 / "orbit.csv"));
    CHECK(slurp(d1 / "orbit.csv").find("\"mu\":4.75") != std::string::npos);

    // flags beat the config file
    r = run_cli("orbit --config " + cfg.string() + " --mu 4.9 --out-dir " + d3.string());
    CHECK(r.code == 0);
    CHECK(fs::exists(d3 / "orbit.csv"));
    const std::string csv = slurp(d3 / "orbit.csv");
    CHECK(csv.find("\"mu\":4.9") != std::string::npos);
    CHECK(csv.find("\"iters\":10") != std::string::npos);  // config value still in force

    // environment alone redirects the output
    r = run_cli("orbit -n 5", "FFMAP_OUT_DIR=" + d2.string());
    CHECK(r.code == 0);
    CHECK(fs::exists(d2 / "orbit.csv"));
}

TEST_CASE("configuration errors exit with code 2") {
    const fs::path dir = scratch("bad_config");

    CHECK(run_cli("orbit --lambda -1 --out-dir " + dir.string()).code == 2);
    CHECK(run_cli("orbit --bogus-flag").code == 2);
    CHECK(run_cli("orbit --format tiff").code == 2);
    CHECK(run_cli("").code == 2);  // a subcommand is required
    CHECK(run_cli("figure fig9 --out-dir " + dir.string()).code == 2);
    CHECK(run_cli("orbit --config " + (dir / "missing.json").string()).code == 2);

    const fs::path broken = dir / "broken.json";
    {
        std::ofstream out(broken);
        out << "{ not json";
    }
    CHECK(run_cli("orbit --config " + broken.string()).code == 2);

    const fs::path unknown = dir / "unknown.json";
    {
        std::ofstream out(unknown);
        out << "{\"zeldovich\": 1}";
    }
    const CliResult r = run_cli("orbit --config " + unknown.string());
    CHECK(r.code == 2);
    CHECK(r.out.find("unknown key") != std::string::npos);
}

TEST_CASE("escaped orbits exit 3 but still write the truncated rows") {
    const fs::path dir = scratch("orbit_escape");
    const CliResult r = run_cli("orbit --x0 0 --y0 10 --mu 5 -n 100 --out-dir " + dir.string());
    CHECK(r.code == 3);
    CHECK(r.out.find("(escaped)") != std::string::npos);
    const std::string csv = slurp(dir / "orbit.csv");
    CHECK(csv.find("# orbit escaped; rows truncated") != std::string::npos);
    CHECK(line_count(csv) < 20);
}

TEST_CASE("curve command separates bad input from failed analysis") {
    const fs::path dir = scratch("curve_errors");
    // below the oscillation threshold there is nothing to solve for: input error
    CHECK(run_cli("curve --mu 4.5 --out-dir " + dir.string()).code == 2);
    // far above it the solver runs and honestly reports no small loop
    CHECK(run_cli("curve --nu 0.5 --grid 128 --out-dir " + dir.string()).code == 4);
}

TEST_CASE("curve command solves just above the threshold") {
    const fs::path dir = scratch("curve_ok");
    const CliResult r =
        run_cli("curve --nu 2e-3 --grid 128 --tol 1e-8 --format json --out-dir " + dir.string());
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "curve.csv"));

    const json j = json::parse(slurp(dir / "curve.json"));
    CHECK(j["converged"] == true);
    CHECK(j["nu"].get<double>() == doctest::Approx(2e-3).epsilon(1e-9));
    // the sweep tolerance is 1e-8; the closure residual is limited by the
    // 128-node discretization, not the iteration
    CHECK(j["residual"].get<double>() < 1e-5);
    CHECK(j["rho_max"].get<double>() > j["rho_min"].get<double>());
    CHECK(j["rho_min"].get<double>() > 0.0);

    const std::string csv = slurp(dir / "curve.csv");
    CHECK(csv.find("theta,rho,x,y\n") != std::string::npos);
    // 2 comments + header + one row per grid node
    CHECK(line_count(csv) == 2 + 1 + 128);
}

TEST_CASE("hopf command reports the threshold data") {
    const fs::path dir = scratch("hopf");
    const CliResult r = run_cli("hopf --lambda 0.99 --format csv --out-dir " + dir.string());
    CHECK(r.code == 0);
    CHECK(r.out.find("mu_h(0.99) = 4.543904397289") != std::string::npos);

    const json j = json::parse(slurp(dir / "hopf.json"));
    CHECK(j["mu_h"].get<double>() == doctest::Approx(4.543904397289001).epsilon(1e-12));
    CHECK(j["x_star"].get<double>() == doctest::Approx(0.5632035523003116).epsilon(1e-9));
    CHECK(j["y_star"].get<double>() == doctest::Approx(0.34312849953365937).epsilon(1e-9));
    CHECK(j["sigma_abs"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(j["rotation_turns"].get<double>() == doctest::Approx(0.31351442857443607).epsilon(1e-9));
    CHECK(fs::exists(dir / "hopf.csv"));
}

TEST_CASE("fixed-points command lists all four families") {
    const fs::path dir = scratch("fixed_points");
    const CliResult r = run_cli("fixed-points --mu 4.5 --out-dir " + dir.string());
    CHECK(r.code == 0);

    const json j = json::parse(slurp(dir / "fixed_points.json"));
    REQUIRE(j["fixed_points"].size() == 4);
    int axis_unit = 0, axis_reciprocal = 0, interior = 0, exterior = 0;
    for (const auto& fp : j["fixed_points"]) {
        const std::string fam = fp["family"];
        if (fam == "axis-unit") {
            ++axis_unit;
            CHECK(fp["classification"] == "saddle");
        } else if (fam == "axis-reciprocal") {
            ++axis_reciprocal;
        } else if (fam == "interior") {
            ++interior;
            CHECK(fp["classification"] == "spiral-sink");
        } else if (fam == "exterior") {
            ++exterior;
        }
        CHECK(fp["residual"].get<double>() < 1e-10);
    }
    CHECK(axis_unit == 1);
    CHECK(axis_reciprocal == 1);
    CHECK(interior == 1);
    CHECK(exterior == 1);
}

TEST_CASE("identical configurations produce byte-identical artifacts") {
    const fs::path dir = scratch("determinism");
    const std::string args =
        "orbit -n 200 --format json --format svg --out-dir " + dir.string();

    CHECK(run_cli(args).code == 0);
    const std::string csv1 = slurp(dir / "orbit.csv");
    const std::string json1 = slurp(dir / "orbit.json");
    const std::string svg1 = slurp(dir / "orbit.svg");

    CHECK(run_cli(args).code == 0);
    CHECK(slurp(dir / "orbit.csv") == csv1);
    CHECK(slurp(dir / "orbit.json") == json1);
    CHECK(slurp(dir / "orbit.svg") == svg1);
}

TEST_CASE("lyapunov command defaults its transient and reports contraction") {
    const fs::path dir = scratch("lyapunov");
    const CliResult r =
        run_cli("lyapunov --x0 0.58 --y0 0.35 -n 2000 --mu 4.5 --out-dir " + dir.string());
    CHECK(r.code == 0);

    const json j = json::parse(slurp(dir / "lyapunov.json"));
    CHECK(j["transient"] == 1000);
    CHECK(j["n"] == 2000);
    CHECK(j["exponents"][0].get<double>() < 0.0);
    CHECK(j["exponents"][1].get<double>() < 0.0);
    const double sum = j["exponents"][0].get<double>() + j["exponents"][1].get<double>();
    CHECK(sum == doctest::Approx(j["mean_log_det"].get<double>()).epsilon(1e-6));
}

TEST_CASE("rotation command measures the winding rate near the threshold") {
    const fs::path dir = scratch("rotation");
    const CliResult r = run_cli("rotation --nu 1e-4 -n 2000 --out-dir " + dir.string());
    CHECK(r.code == 0);

    const json j = json::parse(slurp(dir / "rotation.json"));
    const double v = j["rotation_number"].get<double>();
    CHECK(v > 0.30);
    CHECK(v < 0.33);
    CHECK(j["n_iterates"].get<int>() > 0);
    CHECK(j["std_error"].get<double>() >= 0.0);
}

TEST_CASE("cascade command scans a window and reports loop counts") {
    const fs::path dir = scratch("cascade");
    const CliResult r = run_cli(
        "cascade --nu-from 2e-3 --nu-to 4e-3 --steps 3 --format json --out-dir " + dir.string());
    CHECK(r.code == 0);

    const json j = json::parse(slurp(dir / "cascade.json"));
    REQUIRE(j["scan"].size() == 3);
    for (const auto& s : j["scan"]) {
        CHECK(s["conclusive"] == true);
        CHECK(s["components"] == 1);
    }
    CHECK(j["nu_breaks"].empty());

    CHECK(run_cli("cascade --nu-from -1 --nu-to 1e-3 --steps 3 --out-dir " + dir.string()).code ==
          2);
}

TEST_CASE("horseshoe command verifies the fold and knows its limits") {
    const fs::path dir = scratch("horseshoe");
    const CliResult r = run_cli("horseshoe --format csv --format svg --out-dir " + dir.string());
    CHECK(r.code == 0);
    CHECK(r.out.find("key points pass") != std::string::npos);

    const json j = json::parse(slurp(dir / "horseshoe.json"));
    CHECK(j["component_count"].get<int>() >= 2);
    CHECK(j["containment_ok"] == true);
    CHECK(j["diagonal_crossing"] == true);
    CHECK(j["inconclusive"] == false);
    CHECK(fs::exists(dir / "horseshoe.csv"));
    CHECK(fs::exists(dir / "horseshoe.svg"));

    // sample budget too small for geometry: inconclusive, code 3
    CHECK(run_cli("horseshoe -n 100 --out-dir " + dir.string()).code == 3);
    // the witness is only defined at its pinned parameters
    CHECK(run_cli("horseshoe --mu 4.5 --out-dir " + dir.string()).code == 2);
}

TEST_CASE("figure recipe fig6 writes the histogram and scatter artifacts") {
    const fs::path dir = scratch("fig6");
    const CliResult r = run_cli("figure fig6 --out-dir " + dir.string());
    CHECK(r.code == 0);
    CHECK(r.out.find("binned: 376") != std::string::npos);
    CHECK(r.out.find("escaped orbits: 3") != std::string::npos);

    const std::string csv = slurp(dir / "fig6.csv");
    CHECK(csv.find("ix,iy,x,y,count\n") != std::string::npos);
    CHECK(csv.find("mu=5") != std::string::npos);  // binding note in the preamble
    CHECK(slurp(dir / "fig6.svg").rfind("<svg", 0) == 0);
}

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "nmlqg/analysis.hpp"
#include "nmlqg/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code = 0;
    std::string out;
    std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("nmlqg");
    for (const std::string& arg : args) {
        argv.push_back(arg.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    CliResult result;
    result.exit_code = nmlqg::run(static_cast<int>(argv.size()), argv.data(), out, err);
    result.out = out.str();
    result.err = err.str();
    return result;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

fs::path temp_file(const std::string& name) {
    return fs::temp_directory_path() / name;
}

std::vector<std::vector<double>> parse_csv(const std::string& text, std::size_t columns) {
    std::vector<std::vector<double>> rows;
    std::istringstream lines(text);
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<double> row;
        std::istringstream fields(line);
        std::string field;
        while (std::getline(fields, field, ',')) {
            row.push_back(std::stod(field));
        }
        REQUIRE(row.size() == columns);
        rows.push_back(row);
    }
    return rows;
}

} // namespace

TEST_CASE("sweep writes the expected CSV and round-trips exactly") {
    const fs::path path = temp_file("nmlqg_test_sweep.csv");
    const CliResult result = run_cli(
        {"sweep", "--n-min", "0", "--n-max", "5", "--steps", "11", "--out", path.string()});
    REQUIRE(result.exit_code == 0);

    const std::string text = slurp(path);
    CHECK(text.starts_with("thermal_n,j_whitening,j_markovian\n"));
    const auto rows = parse_csv(text, 3);
    REQUIRE(rows.size() == 11);

    // parsing the CSV back reproduces the in-memory rows bit for bit
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) {
        grid.push_back(0.5 * i);
    }
    const auto reference = nmlqg::sweep_thermal(nmlqg::PhysicalParams{}, grid);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i][0] == reference[i].thermal_n);
        CHECK(rows[i][1] == reference[i].j_whitening);
        CHECK(rows[i][2] == reference[i].j_markovian);
    }
    fs::remove(path);
}

TEST_CASE("repeated invocations produce byte-identical files") {
    const fs::path first = temp_file("nmlqg_test_sweep_a.csv");
    const fs::path second = temp_file("nmlqg_test_sweep_b.csv");
    REQUIRE(run_cli({"sweep", "--steps", "5", "--out", first.string()}).exit_code == 0);
    REQUIRE(run_cli({"sweep", "--steps", "5", "--out", second.string()}).exit_code == 0);
    CHECK(slurp(first) == slurp(second));
    fs::remove(first);
    fs::remove(second);

    const fs::path sim_a = temp_file("nmlqg_test_sim_a.txt");
    const fs::path sim_b = temp_file("nmlqg_test_sim_b.txt");
    const std::vector<std::string> sim_args{
        "simulate", "--dt", "1e-3", "--horizon", "10", "--trajectories", "8",
        "--seed", "42", "--thermal-n", "1"};
    auto with_out = [&](const fs::path& p) {
        std::vector<std::string> args = sim_args;
        args.push_back("--out");
        args.push_back(p.string());
        return args;
    };
    REQUIRE(run_cli(with_out(sim_a)).exit_code == 0);
    REQUIRE(run_cli(with_out(sim_b)).exit_code == 0);
    CHECK(slurp(sim_a) == slurp(sim_b));
    CHECK(!slurp(sim_a).empty());
    fs::remove(sim_a);
    fs::remove(sim_b);
}

TEST_CASE("spectrum is centered on the line") {
    const CliResult result = run_cli({"spectrum", "--points", "11"});
    REQUIRE(result.exit_code == 0);
    CHECK(result.out.starts_with("omega,psd_lorentzian,psd_model\n"));
    const auto rows = parse_csv(result.out, 3);
    REQUIRE(rows.size() == 11);
    // the middle row sits at omega_0 = 10 where the PSD peaks at 1
    CHECK(rows[5][0] == 10.0);
    CHECK(rows[5][1] == 1.0);
    CHECK(rows[5][2] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("analyze prints both objectives") {
    const CliResult result = run_cli({"analyze", "--thermal-n", "2"});
    REQUIRE(result.exit_code == 0);
    CHECK(result.out.find("j_whitening = ") != std::string::npos);
    CHECK(result.out.find("j_markovian = ") != std::string::npos);

    // the two numbers obey the dominance ordering
    std::istringstream lines(result.out);
    std::string line;
    double j_w = -1.0, j_m = -1.0;
    while (std::getline(lines, line)) {
        if (line.starts_with("j_whitening = ")) {
            j_w = std::stod(line.substr(14));
        } else if (line.starts_with("j_markovian = ")) {
            j_m = std::stod(line.substr(14));
        }
    }
    CHECK(j_w > 0.0);
    CHECK(j_w <= j_m + 1e-9);
}

TEST_CASE("invalid input exits with code 2 and names the offender") {
    const CliResult result = run_cli({"analyze", "--thermal-n", "-1"});
    CHECK(result.exit_code == 2);
    CHECK(result.err.find("thermal_n") != std::string::npos);

    CHECK(run_cli({"analyze", "--no-such-flag"}).exit_code == 2);
    CHECK(run_cli({}).exit_code == 2);  // a subcommand is required
    CHECK(run_cli({"sweep", "--steps", "0"}).exit_code == 2);
}

TEST_CASE("model prints the state-space matrices") {
    const CliResult result = run_cli({"model"});
    REQUIRE(result.exit_code == 0);
    CHECK(result.out.find("== augmented model") != std::string::npos);
    CHECK(result.out.find("== Markovian model") != std::string::npos);
    CHECK(result.out.find("A [4x4]") != std::string::npos);
    CHECK(result.out.find("B_prime [4x6]") != std::string::npos);
    CHECK(result.out.find("V1 [2x2]") != std::string::npos);
}

TEST_CASE("synthesize prints gains and spectra for both controllers") {
    const CliResult result = run_cli({"synthesize"});
    REQUIRE(result.exit_code == 0);
    CHECK(result.out.find("== whitening controller ==") != std::string::npos);
    CHECK(result.out.find("== Markovian controller ==") != std::string::npos);
    CHECK(result.out.find("K [4x1]") != std::string::npos);
    CHECK(result.out.find("K [2x1]") != std::string::npos);
    CHECK(result.out.find("F [1x4]") != std::string::npos);
    CHECK(result.out.find("closed-loop eigenvalues") != std::string::npos);
}

TEST_CASE("simulate prints empirical against analytic objectives") {
    const CliResult result = run_cli({"simulate", "--horizon", "20", "--trajectories", "8",
                                      "--seed", "3", "--controller", "markovian"});
    REQUIRE(result.exit_code == 0);
    CHECK(result.out.find("j_analytic = ") != std::string::npos);
    CHECK(result.out.find("j_empirical = ") != std::string::npos);
    CHECK(result.out.find("controller = markovian") != std::string::npos);

    CHECK(run_cli({"simulate", "--controller", "nonsense"}).exit_code == 2);
}

TEST_CASE("config file sets values, flags override the file") {
    const fs::path config = temp_file("nmlqg_test_config.ini");
    {
        std::ofstream out(config);
        out << "thermal-n=2\n";
        out << "kappa=1\n";
    }

    const CliResult from_file = run_cli({"analyze", "--config", config.string()});
    REQUIRE(from_file.exit_code == 0);
    CHECK(from_file.out.find("thermal_n = 2\n") != std::string::npos);

    const CliResult overridden =
        run_cli({"analyze", "--config", config.string(), "--thermal-n", "3"});
    REQUIRE(overridden.exit_code == 0);
    CHECK(overridden.out.find("thermal_n = 3\n") != std::string::npos);

    fs::remove(config);
}

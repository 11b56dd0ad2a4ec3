#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stabsel/data.hpp"
#include "stabsel/io.hpp"
#include "stabsel/simgen.hpp"

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <sys/wait.h>

using namespace stabsel;
namespace fs = std::filesystem;

namespace {

const fs::path work = fs::temp_directory_path() / "stabsel_cli_test";

struct Run {
    int rc = -1;
    std::string out;
};

Run cli(const std::string& args) {
    fs::create_directories(work);
    const fs::path out = work / "stdout.txt";
    const std::string cmd = std::string(STABSEL_CLI) + " " + args + " > " + out.string() + " 2> " + (work / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    Run r;
    r.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(out);
    return r;
}

std::string fresh(const std::string& name) {
    const fs::path p = work / name;
    fs::remove_all(p);
    return p.string();
}

// rows after the header whose last field is 1
std::vector<std::string> stable_names(const std::string& dir) {
    std::istringstream in(read_file(fs::path(dir) / "stable_set.tsv"));
    std::string line;
    std::getline(in, line);
    std::vector<std::string> names;
    while (std::getline(in, line))
        if (!line.empty() && line.back() == '1') names.push_back(line.substr(0, line.find('\t')));
    return names;
}

}  // namespace

TEST_CASE("calibrate prints the missing value") {
    const Run r = cli("calibrate --p 1000 --pi 0.9 --ev 1");
    CHECK(r.rc == 0);
    CHECK(r.out.find("q = 28.2842712474619\n") != std::string::npos);
    CHECK(cli("calibrate --p 1000 --q 28.2842712474619 --ev 1").out.find("pi_thr = 0.9") != std::string::npos);
    CHECK(cli("calibrate --p 1000").rc == 2);
}

TEST_CASE("diagnose the two-correlated design") {
    const Run r = cli("diagnose --design two_correlated --rho 0.6");
    CHECK(r.rc == 0);
    CHECK(r.out.find("irc_value = 1.2\n") != std::string::npos);
    CHECK(r.out.find("irc_violation_count = 1\n") != std::string::npos);
}

TEST_CASE("simulate is deterministic") {
    const std::string a = fresh("sim_a.csv"), b = fresh("sim_b.csv");
    CHECK(cli("simulate --preset B-desk --seed 7 --output " + a).rc == 0);
    CHECK(cli("simulate --preset B-desk --seed 7 --output " + b).rc == 0);
    CHECK(read_file(a) == read_file(b));
    CHECK(read_file(a) != cli("simulate --preset B-desk --seed 8").out);
}

TEST_CASE("malformed CSV fails with a data error and writes nothing") {
    const std::string csv = fresh("bad.csv");
    write_file(csv, "X1,X2,y\n1,2,3\n4,5\n");
    const std::string dir = fresh("bad_out");
    CHECK(cli("select --input " + csv + " --output-dir " + dir).rc == 3);
    CHECK_FALSE(fs::exists(fs::path(dir) / "frequencies.tsv"));
    CHECK_FALSE(fs::exists(fs::path(dir) / "stable_set.tsv"));
    CHECK(cli("select --input " + fresh("missing.csv") + " --output-dir " + dir).rc == 3);
}

TEST_CASE("config errors exit with 2") {
    const std::string cfg = fresh("typo.json");
    write_file(cfg, R"({"schema_version": 1, "selectr": "lasso"})");
    CHECK(cli("select --config " + cfg + " --output-dir " + fresh("typo_out")).rc == 2);
    CHECK(cli("select --no-such-flag").rc == 2);
    CHECK(cli("calibrate --p 10 --pi 0.4 --ev 1").rc == 2);
}

TEST_CASE("select writes every output and finds nothing in permuted data") {
    Rng rng = make_rng(21);
    const Dataset design = gen_design(design_preset("B-desk"), rng);
    SimTruth t = gen_beta(design.p(), 5, BetaDist::uniform01, rng);
    const Dataset d = gen_response(design, t, 2.0, rng);
    // permuting every column (response included) destroys all association
    Matrix all(d.n(), d.p() + 1);
    all << d.x(), d.y();
    const Dataset shuffled = permute_null(Dataset(all), PermuteMode::per_column, {}, rng);
    const Dataset null_data(shuffled.x().leftCols(d.p()), Vector(shuffled.x().col(d.p())));
    const std::string csv = fresh("null.csv");
    write_file(csv, to_csv(null_data));
    const std::string dir = fresh("null_out");
    const Run r = cli("select --input " + csv + " --output-dir " + dir + " --seed 4");
    CHECK(r.rc == 0);
    for (const char* f : {"frequencies.tsv", "stable_set.tsv", "control.json", "stability_paths.svg"})
        CHECK(fs::exists(fs::path(dir) / f));
    CHECK(stable_names(dir).empty());
    const std::string control = read_file(fs::path(dir) / "control.json");
    CHECK(control.find("\"pi_thr\": 0.9") != std::string::npos);
    CHECK(control.find("\"target_ev\": 1.0") != std::string::npos);
}

TEST_CASE("randomised Lasso on the two-correlated example") {
    // the goal is {X1, X2} in at least 90% of seeds; the measured rate is reported, not asserted
    const int seeds = 5;
    int hits = 0, clean = 0;
    for (int i = 0; i < seeds; ++i) {
        Rng rng = make_rng(500 + static_cast<std::uint64_t>(i));
        const Matrix raw = gen_design_raw(design_preset("two-correlated"), rng);
        Vector beta = Vector::Zero(raw.cols());
        beta(0) = beta(1) = 1.0;
        const std::string csv = fresh("sep.csv");
        write_file(csv, to_csv(gen_response_fixed_noise(Dataset(raw), beta, 0.5, rng)));
        const std::string dir = fresh("sep_out");
        const Run r = cli("select --input " + csv + " --output-dir " + dir + " --selector randomised_lasso --alpha 0.2 --pi 0.9 --ev 1 --seed " +
                          std::to_string(77 + i));
        REQUIRE(r.rc == 0);
        const auto names = stable_names(dir);
        const bool has1 = std::find(names.begin(), names.end(), "X1") != names.end();
        const bool has2 = std::find(names.begin(), names.end(), "X2") != names.end();
        hits += has1 && has2;
        clean += std::find(names.begin(), names.end(), "X3") == names.end();
    }
    MESSAGE("stable set contains {X1, X2} in " << hits << " of " << seeds << " seeds");
    CHECK(clean == seeds);  // the correlated noise variable is never stable
}

TEST_CASE("experiment reports do not depend on the thread count") {
    const std::string cfg = fresh("exp.json");
    write_file(cfg, R"({"schema_version": 1, "preset": "A-desk", "methods": ["lasso", "lasso_stability"],)"
                    R"( "replicates": 3, "resamples": 8, "grid": {"size": 20, "ratio": 0.01}, "seed": 3})");
    const std::string a = fresh("exp1.json"), b = fresh("exp2.json");
    CHECK(cli("experiment recovery --config " + cfg + " --threads 1 --output " + a).rc == 0);
    CHECK(cli("experiment recovery --config " + cfg + " --threads 2 --output " + b).rc == 0);
    CHECK(read_file(a) == read_file(b));
}

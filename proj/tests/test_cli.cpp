#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

const fs::path kWorkDir = fs::temp_directory_path() / "thetaem_cli_test";

int run_cli(const std::string& args, const std::string& log_name = "out.txt") {
    const std::string command = std::string(THETAEM_CLI_PATH) + " " + args + " > " +
                                (kWorkDir / log_name).string() + " 2>&1";
    const int status = std::system(command.c_str());
    return status < 0 ? status : WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string log_text(const std::string& log_name = "out.txt") {
    return slurp(kWorkDir / log_name);
}

struct WorkDirSetup {
    WorkDirSetup() {
        fs::remove_all(kWorkDir);
        fs::create_directories(kWorkDir);
    }
} setup;

}  // namespace

TEST_CASE("help and usage errors") {
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("") == 2);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("simulate --no-such-flag") == 2);
}

TEST_CASE("verify prints the sampled report") {
    CHECK(run_cli("verify --problem example1 --radius 2") == 0);
    const std::string text = log_text();
    CHECK(text.find("growth audit") != std::string::npos);
    CHECK(text.find("one-sided audit") != std::string::npos);
    CHECK(run_cli("verify --problem nope") == 2);
}

TEST_CASE("stepsize admissibility decides acceptance") {
    CHECK(run_cli("simulate --problem example1 --theta 0 --delta 0.3") == 0);
    CHECK(run_cli("simulate --problem example1 --theta 1 --delta 0.3") == 2);
    CHECK(log_text().find("theta*delta must be < 1/(2L)") != std::string::npos);
    // literal schedule puts desk-scale stepsizes out of the domain
    CHECK(run_cli("simulate --problem example1 --theta 1 --delta 2^-8 --radius-mode literal") == 2);
}

TEST_CASE("simulate writes the path dump") {
    const fs::path csv = kWorkDir / "path.csv";
    CHECK(run_cli("simulate --problem example1 --theta 1 --delta 2^-6 --seed 3 --output " +
                  csv.string()) == 0);
    const std::string text = slurp(csv);
    CHECK(text.find("# command=simulate") != std::string::npos);
    CHECK(text.find("t,y_1") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') > 60);
}

TEST_CASE("converge emits a reproducible table") {
    const fs::path a = kWorkDir / "conv_a.csv";
    const fs::path b = kWorkDir / "conv_b.csv";
    const std::string flags =
        "converge --problem linear:0.5,0.5,1 --theta 1 --deltas 2^-4..2^-6 --paths 200 "
        "--seed 7 --workers 1 --output ";
    CHECK(run_cli(flags + a.string()) == 0);
    CHECK(run_cli(flags + b.string()) == 0);
    const std::string text_a = slurp(a);
    CHECK(text_a == slurp(b));
    CHECK(text_a.find("experiment,theta,delta,n_paths,value,std_error,order,radius,seed") !=
          std::string::npos);
    CHECK(text_a.find("converge_exact") != std::string::npos);

    // the range grammar and the explicit comma list resolve identically
    const fs::path c = kWorkDir / "conv_c.csv";
    CHECK(run_cli("converge --problem linear:0.5,0.5,1 --theta 1 --deltas 2^-4,2^-5,2^-6 "
                  "--paths 200 --seed 7 --workers 1 --output " +
                  c.string()) == 0);
    CHECK(text_a == slurp(c));
}

TEST_CASE("self mode drives the superlinear problem") {
    const fs::path csv = kWorkDir / "self.csv";
    CHECK(run_cli("converge --problem example1 --theta 1 --deltas 2^-4..2^-6 --paths 100 "
                  "--seed 42 --refine 2 --output " +
                  csv.string()) == 0);
    CHECK(slurp(csv).find("converge_self") != std::string::npos);
    CHECK(log_text().find("pragmatic radius 8") != std::string::npos);
}

TEST_CASE("moments and exitprob round out the experiment surface") {
    const fs::path m = kWorkDir / "moments.csv";
    CHECK(run_cli("moments --problem example1 --theta 1 --deltas 2^-4,2^-6 --paths 100 "
                  "--seed 42 --output " +
                  m.string()) == 0);
    CHECK(slurp(m).find("sup_moment") != std::string::npos);

    const fs::path e = kWorkDir / "exit.csv";
    CHECK(run_cli("exitprob --problem example1 --theta 1 --delta 2^-6 --radii 2,4 --paths 100 "
                  "--seed 42 --output " +
                  e.string()) == 0);
    const std::string text = slurp(e);
    CHECK(text.find("exit_probability") != std::string::npos);
    CHECK(text.find("chebyshev_bound") != std::string::npos);
}

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ltq/census.hpp"

namespace fs = std::filesystem;

namespace {

struct result {
    int code;
    std::string out;
};

result run(const std::string& args, const std::string& env = "") {
    std::string cmd = env + " " + LTQ_CLI_PATH + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, ""};
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() / ("ltq_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
    fs::path dir;
};

}  // namespace

TEST_F(Cli, ComputeWritesValidStore) {
    auto r = run("compute --curve C_29 --bound 20000 --out " + path("c29.ltqc"));
    ASSERT_EQ(r.code, 0);
    ltq::trace_store s = ltq::load_store(path("c29.ltqc"));
    EXPECT_EQ(s.bound, 20000u);
    EXPECT_EQ(s.label, "C_29");
    EXPECT_EQ(s, ltq::build_store(ltq::builtin_curve("C_29"), 20000));
    EXPECT_TRUE(r.out.empty());  // progress goes to stderr
}

TEST_F(Cli, ComputeResumesAndIsIdempotent) {
    ASSERT_EQ(run("compute --curve C_23 --bound 5000 --out " + path("a.ltqc")).code, 0);
    ASSERT_EQ(run("compute --curve C_23 --bound 12000 --out " + path("a.ltqc")).code, 0);
    ASSERT_EQ(run("--threads 3 compute --curve C_23 --bound 12000 --out " + path("b.ltqc")).code, 0);
    EXPECT_EQ(slurp(path("a.ltqc")), slurp(path("b.ltqc")));
    ASSERT_EQ(run("compute --curve C_23 --bound 12000 --out " + path("b.ltqc")).code, 0);
    EXPECT_EQ(slurp(path("a.ltqc")), slurp(path("b.ltqc")));
}

TEST_F(Cli, ComputeOutDirSeveralCurves) {
    ASSERT_EQ(run("compute --curve C_43 --curve C_55 --bound 3000 --out-dir " + path("stores")).code, 0);
    EXPECT_EQ(ltq::load_store(path("stores/C_43.ltqc")).label, "C_43");
    EXPECT_EQ(ltq::load_store(path("stores/C_55.ltqc")).bound, 3000u);
}

TEST_F(Cli, ComputeErrors) {
    EXPECT_EQ(run("compute --curve C_999 --bound 100 --out " + path("x.ltqc")).code, 1);
    EXPECT_EQ(run("compute --curve C_29 --bound 100").code, 1);
    EXPECT_EQ(run("compute --curve C_29 --curve C_43 --bound 100 --out " + path("x.ltqc")).code, 1);
    EXPECT_EQ(run("compute --curve C_29 --bound 1 --out " + path("x.ltqc")).code, 1);
    EXPECT_EQ(run("compute --curve C_29 --bound 100 --bogus --out " + path("x.ltqc")).code, 1);
    EXPECT_FALSE(fs::exists(path("x.ltqc")));
    EXPECT_EQ(run("").code, 1);
}

TEST_F(Cli, AnalyzeCsvColumns) {
    ASSERT_EQ(run("compute --curve C_29 --bound 20000 --out " + path("s.ltqc")).code, 0);
    auto r = run("analyze --store " + path("s.ltqc") + " --samples 10 --moduli 3,8 --csv -");
    ASSERT_EQ(r.code, 0);
    std::istringstream in(r.out);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "x,pi,N_f,P,fit,P_3,Pinf_3,Pinf_pred_3,P_8,Pinf_8,Pinf_pred_8");
    int rows = 0;
    std::string line;
    while (std::getline(in, line)) rows += !line.empty();
    EXPECT_EQ(rows, 10);
    // same bytes on a rerun
    EXPECT_EQ(run("analyze --store " + path("s.ltqc") + " --samples 10 --moduli 3,8 --csv -").out, r.out);
    EXPECT_EQ(run("analyze --store " + path("s.ltqc") + " --x 30000").code, 1);
    EXPECT_EQ(run("analyze --store " + path("missing.ltqc")).code, 2);
}

TEST_F(Cli, PredictSummaryAndCsv) {
    ASSERT_EQ(run("compute --curve C_23 --bound 20000 --out " + path("s.ltqc")).code, 0);
    auto r = run("predict --store " + path("s.ltqc") + " --csv " + path("p.csv"));
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("c~/c^"), std::string::npos) << r.out;
    std::string csv = slurp(path("p.csv"));
    EXPECT_EQ(csv.substr(0, 15), "x,value,series\n");
    EXPECT_NE(csv.find(",alpha_"), std::string::npos);
}

TEST_F(Cli, VerifyGroups) {
    auto r = run("verify-groups --ell 3 --k 1");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("card_A_t"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("522"), std::string::npos);
    EXPECT_EQ(run("verify-groups --ell 4 --k 1").code, 1);
}

TEST_F(Cli, Density) {
    auto r = run("density --eps 0.1,2");
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("0.10750657"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("0.1080759"), std::string::npos) << r.out;
    EXPECT_EQ(run("density --eps 0.1 --tol 0").code, 1);
}

TEST_F(Cli, CatalogFromFlagAndEnvironment) {
    std::ofstream(path("cat.json")) << R"([{"label": "C_29t", "N": 464, "D": 2, "coeffs": [-8, 4, -13, 6, -7, 2, -1]}])";
    auto r = run("--catalog " + path("cat.json") + " catalog");
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("C_29t"), std::string::npos);
    EXPECT_NE(r.out.find("C_167"), std::string::npos);
    auto e = run("catalog", "LTQ_CATALOG=" + path("cat.json"));
    EXPECT_EQ(e.out, r.out);
    EXPECT_EQ(run("catalog").out.find("C_29t"), std::string::npos);
    std::ofstream(path("bad.json")) << R"([{"label": "C_29", "N": 29, "D": 2, "coeffs": [1,2,3]}])";
    EXPECT_EQ(run("--catalog " + path("bad.json") + " catalog").code, 1);
    ASSERT_EQ(run("--catalog " + path("cat.json") + " compute --curve C_29t --bound 3000 --out " + path("t.ltqc")).code, 0);
    EXPECT_EQ(ltq::load_store(path("t.ltqc")).N, 464u);
}

#include <catch2/catch.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "nildist/io.hpp"
#include "nildist/optimize.hpp"
#include "test_helpers.hpp"

using namespace nildist;
using testutil::randomMatrix;

namespace {

struct CliRun {
    int exitCode = -1;
    std::string out;
};

CliRun runCli(const std::string& args, bool raw = false) {
    const std::string cmd =
        (raw ? args : std::string(NILDIST_CLI_PATH) + " " + args) + " 2>/dev/null";
    CliRun run;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf;
    while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) run.out += buf.data();
    const int status = pclose(pipe);
    run.exitCode = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return run;
}

std::string tempPath(const std::string& name) {
    return std::string("/tmp/nildist_test_") + name;
}

}  // namespace

TEST_CASE("matrix JSON round trip is bit-identical") {
    Rng rng(7);
    for (int rep = 0; rep < 5; ++rep) {
        const CMatrix a = randomMatrix(rng, 3 + rep);
        const CMatrix b = readMatrixJson(writeMatrixJson(a));
        REQUIRE(b.dim() == a.dim());
        for (std::size_t i = 0; i < a.dim(); ++i)
            for (std::size_t j = 0; j < a.dim(); ++j) CHECK(a(i, j) == b(i, j));
    }
}

TEST_CASE("matrix JSON schema") {
    SECTION("scalar file") {
        const CMatrix a = readMatrixJson("{\"n\":1,\"rows\":[[[2,0]]]}");
        CHECK(a.dim() == 1);
        CHECK(a(0, 0) == Complex(2.0, 0.0));
    }
    SECTION("schema errors carry the location") {
        CHECK_THROWS_AS(readMatrixJson("{\"rows\": []}"), IoError);
        CHECK_THROWS_AS(readMatrixJson("{\"n\":2,\"rows\":[[[1,0],[0,0]]]}"), IoError);
        try {
            readMatrixJson("{\"n\":2,\"rows\":[[[1,0],[0,0]],[[1,0]]]}");
            FAIL("expected schema error");
        } catch (const IoError& e) {
            CHECK(std::string(e.what()).find("row 1") != std::string::npos);
        }
        try {
            readMatrixJson("{\"n\":1,\"rows\":[[[1]]]}");
            FAIL("expected schema error");
        } catch (const IoError& e) {
            CHECK(std::string(e.what()).find("column 0") != std::string::npos);
        }
        CHECK_THROWS_AS(readMatrixJson("not json"), IoError);
    }
    SECTION("file round trip") {
        Rng rng(3);
        const CMatrix a = randomMatrix(rng, 4);
        const std::string path = tempPath("roundtrip.json");
        writeMatrix(path, a);
        const CMatrix b = readMatrix(path);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) CHECK(a(i, j) == b(i, j));
        std::remove(path.c_str());
    }
    SECTION("missing file") { CHECK_THROWS_AS(readMatrix("/nonexistent/x.json"), IoError); }
}

TEST_CASE("flag and certificate serialization") {
    Rng rng(11);
    const CMatrix a = randomMatrix(rng, 4);
    const CertifiedUpperBound ub = nearestFlagNilpotent(a, Flag{haarUnitary(4, 5)});
    const nlohmann::json j = certifiedUpperBoundToJson(ub);
    CHECK(j.contains("value"));
    CHECK(j.contains("residual"));
    CHECK(j.contains("nilpotency_defect"));
    const PartialFlag back = flagFromJson(j["flag"]);
    CHECK(operatorNorm(back.basis - ub.flag.basis) == 0.0);
    CHECK(back.ranks == ub.flag.ranks);

    PartialFlag partial{haarUnitary(5, 9), {0, 2, 5}};
    const PartialFlag back2 = flagFromJson(flagToJson(partial));
    CHECK(back2.ranks == partial.ranks);
}

TEST_CASE("experiment rows round-trip losslessly") {
    ExperimentRow row;
    row.n = 5;
    row.m = 2;
    row.lowerBound = macdonaldValue(4);
    row.upperEstimate = 0.6180339887498949;
    row.gap = row.upperEstimate - row.lowerBound;
    row.seed = 0xdeadbeefcafef00dULL;
    row.wallTimeMs = 17.25;
    row.label = "PROVEN";
    const ExperimentRow back = experimentRowFromJson(experimentRowToJson(row));
    CHECK(back.n == row.n);
    CHECK(back.m == row.m);
    CHECK(back.lowerBound == row.lowerBound);
    CHECK(back.upperEstimate == row.upperEstimate);
    CHECK(back.gap == row.gap);
    CHECK(back.seed == row.seed);
    CHECK(back.wallTimeMs == row.wallTimeMs);
    CHECK(back.label == row.label);
    CHECK(experimentRowToCsv(row) ==
          "5,2,0.57735026918962573,0.6180339887498949,0.040683719560269171,"
          "16045690984503111693,17.25,PROVEN");
}

TEST_CASE("cli: bound and chain values") {
    const CliRun bound = runCli("bound --n 3 --m 1");
    REQUIRE(bound.exitCode == 0);
    const auto doc = nlohmann::json::parse(bound.out);
    CHECK(doc["macdonald"].get<double>() == Approx((std::sqrt(5.0) - 1.0) / 2.0).margin(1e-12));
    CHECK(doc["manifest"]["command"] == "bound");

    const CliRun chain = runCli("chain solve --n 2");
    REQUIRE(chain.exitCode == 0);
    const auto cdoc = nlohmann::json::parse(chain.out);
    CHECK(cdoc["value"].get<double>() == Approx(std::sqrt(0.5)).margin(1e-10));
    REQUIRE(cdoc["chain"].size() == 3);
    CHECK(cdoc["chain"][1].get<double>() == Approx(0.5).margin(1e-10));

    const CliRun csv = runCli("bound --n 4 --m 2 --format csv");
    REQUIRE(csv.exitCode == 0);
    CHECK(csv.out.find("n,m,macdonald,cramer,theorem1") == 0);
}

TEST_CASE("cli: estimate and nearest on the 4x4 identity") {
    const std::string path = tempPath("id4.json");
    writeMatrix(path, CMatrix::identity(4));
    const CliRun est = runCli("estimate --matrix " + path + " --restarts 4 --seed 3");
    REQUIRE(est.exitCode == 0);
    const auto doc = nlohmann::json::parse(est.out);
    CHECK(doc["value"].get<double>() == Approx(1.0).margin(1e-9));

    const std::string certPath = tempPath("cert.json");
    const CliRun near =
        runCli("nearest --matrix " + path + " --restarts 4 --seed 3 --out " + certPath);
    REQUIRE(near.exitCode == 0);
    const CMatrix cert = readMatrix(certPath);
    CHECK(cert.maxAbs() < 1e-9);  // nearest nilpotent to I is 0
    std::remove(path.c_str());
    std::remove(certPath.c_str());
}

TEST_CASE("cli: exit codes") {
    CHECK(runCli("bound --n 3").exitCode == 1);           // missing required option
    CHECK(runCli("bogus").exitCode == 1);                 // unknown subcommand
    CHECK(runCli("estimate --matrix /nope.json").exitCode == 1);
    CHECK(runCli("--help").exitCode == 0);
}

TEST_CASE("cli: harness reports are reproducible modulo timing") {
    const std::string args =
        "verify theorem1 --trials 4 --n-max 3 --seed 11 --restarts 4 --sweeps 8";
    const CliRun r1 = runCli(args);
    const CliRun r2 = runCli(args);
    REQUIRE(r1.exitCode == 0);
    REQUIRE(r2.exitCode == 0);
    std::istringstream s1(r1.out), s2(r2.out);
    std::string l1, l2;
    std::getline(s1, l1);  // manifest lines differ by timestamps only
    std::getline(s2, l2);
    int rows = 0;
    while (std::getline(s1, l1) && std::getline(s2, l2)) {
        auto j1 = nlohmann::json::parse(l1);
        auto j2 = nlohmann::json::parse(l2);
        j1.erase("wall_time_ms");
        j2.erase("wall_time_ms");
        CHECK(j1 == j2);
        ++rows;
    }
    CHECK(rows == 4);
}

TEST_CASE("cli: NILDIST_THREADS does not change the numbers") {
    const std::string args =
        "verify theorem1 --trials 3 --n-max 3 --seed 8 --restarts 4 --sweeps 6";
    const CliRun serial = runCli("NILDIST_THREADS=1 " + std::string(NILDIST_CLI_PATH) + " " + args,
                                 /*raw=*/true);
    const CliRun parallel = runCli("NILDIST_THREADS=2 " + std::string(NILDIST_CLI_PATH) + " " +
                                       args,
                                   /*raw=*/true);
    REQUIRE(serial.exitCode == 0);
    REQUIRE(parallel.exitCode == 0);
    std::istringstream s1(serial.out), s2(parallel.out);
    std::string l1, l2;
    std::getline(s1, l1);
    std::getline(s2, l2);
    while (std::getline(s1, l1) && std::getline(s2, l2)) {
        auto j1 = nlohmann::json::parse(l1);
        auto j2 = nlohmann::json::parse(l2);
        j1.erase("wall_time_ms");
        j2.erase("wall_time_ms");
        CHECK(j1 == j2);
    }
}

TEST_CASE("cli: explore cramer emits a labeled row") {
    const CliRun run = runCli("explore cramer --n 3 --m 2 --seed 5 --restarts 8");
    REQUIRE(run.exitCode == 0);
    std::istringstream ss(run.out);
    std::string manifest, rowLine;
    std::getline(ss, manifest);
    std::getline(ss, rowLine);
    const ExperimentRow row = experimentRowFromJson(nlohmann::json::parse(rowLine));
    CHECK(row.label == "PROVEN");
    CHECK(row.upperEstimate == Approx(cramerValue(3, 2)).margin(1e-3));
}

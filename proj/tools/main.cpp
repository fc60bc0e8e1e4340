// nildist command-line front end: matrix I/O, distance estimation, closed-form
// bound tables, scalar chains, and the verification harnesses, all emitting
// reproducible JSON/CSV reports.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nildist/nildist.hpp"

namespace {

using namespace nildist;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFalsification = 2;

struct SearchOptions {
    std::size_t restarts = 32;
    std::size_t sweeps = 20;
    std::size_t angleGrid = 8;
    double shrink = 0.5;
    std::uint64_t seed = 0;
    double certTol = 1e-8;

    void attach(CLI::App* cmd) {
        cmd->add_option("--restarts", restarts, "random restarts per search");
        cmd->add_option("--sweeps", sweeps, "Givens sweeps per restart");
        cmd->add_option("--angle-grid", angleGrid, "rotation/phase grid resolution");
        cmd->add_option("--shrink", shrink, "grid shrink factor per sweep");
        cmd->add_option("--seed", seed, "base RNG seed");
        cmd->add_option("--cert-tol", certTol, "certification tolerance");
    }

    SearchConfig config() const {
        SearchConfig cfg;
        cfg.restarts = restarts;
        cfg.sweeps = sweeps;
        cfg.angleGrid = angleGrid;
        cfg.shrink = shrink;
        cfg.seed = seed;
        cfg.certTol = certTol;
        return cfg;
    }
};

RunManifest makeManifest(const std::string& command, int argc, char** argv,
                         const SearchConfig& cfg) {
    RunManifest m;
    m.command = command;
    m.argv.assign(argv, argv + argc);
    m.seed = cfg.seed;
    m.config = cfg;
    m.startedAt = isoTimestampUtc();
    return m;
}

void printReport(RunManifest manifest, nlohmann::json body) {
    manifest.finishedAt = isoTimestampUtc();
    body["manifest"] = manifestToJson(manifest);
    std::cout << body.dump() << "\n";
}

void printRows(RunManifest manifest, const std::vector<ExperimentRow>& rows,
               const std::string& format) {
    manifest.finishedAt = isoTimestampUtc();
    if (format == "csv") {
        std::cout << "# " << nlohmann::json{{"manifest", manifestToJson(manifest)}}.dump()
                  << "\n";
        std::cout << experimentRowCsvHeader() << "\n";
        for (const ExperimentRow& row : rows) std::cout << experimentRowToCsv(row) << "\n";
    } else {
        std::cout << nlohmann::json{{"manifest", manifestToJson(manifest)}}.dump() << "\n";
        for (const ExperimentRow& row : rows) std::cout << experimentRowToJson(row).dump() << "\n";
    }
}

int reportFalsification(const FalsificationWitness& witness) {
    std::cerr << falsificationToJson(witness).dump() << "\n";
    std::cerr << "falsification: estimate fell below a proven lower bound; witness dumped above\n";
    return kExitFalsification;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"certified upper bounds on the operator-norm distance to nilpotent matrices"};
    app.require_subcommand(1);

    // estimate / nearest
    SearchOptions estOpts;
    std::string matrixPath;
    std::size_t order = 0;
    CLI::App* estimate = app.add_subcommand("estimate", "estimate nu(A) for a matrix file");
    estimate->add_option("--matrix", matrixPath, "matrix JSON file")->required();
    estimate->add_option("--order", order, "nilpotency order n for nu_n (default: full)");
    estOpts.attach(estimate);

    SearchOptions nearOpts;
    std::string nearMatrixPath;
    std::string certOut = "certificate.json";
    std::size_t nearOrder = 0;
    CLI::App* nearest =
        app.add_subcommand("nearest", "estimate nu(A) and write the certificate matrix");
    nearest->add_option("--matrix", nearMatrixPath, "matrix JSON file")->required();
    nearest->add_option("--out", certOut, "output path for the certificate matrix JSON");
    nearest->add_option("--order", nearOrder, "nilpotency order n for nu_n (default: full)");
    nearOpts.attach(nearest);

    // bound
    std::size_t boundN = 0, boundM = 0;
    std::string boundFormat = "json";
    CLI::App* bound = app.add_subcommand("bound", "closed-form bound table row");
    bound->add_option("--n", boundN, "matrix dimension")->required();
    bound->add_option("--m", boundM, "projection rank")->required();
    bound->add_option("--format", boundFormat, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));

    // chain solve
    CLI::App* chain = app.add_subcommand("chain", "scalar chain problems");
    chain->require_subcommand(1);
    std::size_t chainN = 0;
    double chainTol = 1e-12;
    CLI::App* chainSolve = chain->add_subcommand("solve", "optimal scalar chain for given n");
    chainSolve->add_option("--n", chainN, "chain length")->required();
    chainSolve->add_option("--tol", chainTol, "bisection tolerance");

    // verify
    CLI::App* verify = app.add_subcommand("verify", "numerical verification harnesses");
    verify->require_subcommand(1);
    std::size_t macNMax = 6;
    std::string macFormat = "jsonl";
    SearchOptions macOpts;
    CLI::App* macdonald = verify->add_subcommand("macdonald", "rank-one attainment sweep");
    macdonald->add_option("--n-max", macNMax, "largest dimension");
    macdonald->add_option("--format", macFormat, "jsonl or csv")
        ->check(CLI::IsMember({"jsonl", "csv"}));
    macOpts.attach(macdonald);

    std::size_t t1Trials = 100, t1NMax = 6;
    std::string t1Format = "jsonl";
    SearchOptions t1Opts;
    CLI::App* theorem1 = verify->add_subcommand("theorem1", "lower-bound soundness harness");
    theorem1->add_option("--trials", t1Trials, "number of random instances");
    theorem1->add_option("--n-max", t1NMax, "largest dimension");
    theorem1->add_option("--format", t1Format, "jsonl or csv")
        ->check(CLI::IsMember({"jsonl", "csv"}));
    t1Opts.attach(theorem1);

    // explore
    CLI::App* explore = app.add_subcommand("explore", "conjecture exploration");
    explore->require_subcommand(1);
    std::size_t crN = 0, crM = 0;
    std::string crFormat = "jsonl";
    SearchOptions crOpts;
    CLI::App* cramer = explore->add_subcommand("cramer", "rank-m projection distance");
    cramer->add_option("--n", crN, "matrix dimension")->required();
    cramer->add_option("--m", crM, "projection rank")->required();
    cramer->add_option("--format", crFormat, "jsonl or csv")
        ->check(CLI::IsMember({"jsonl", "csv"}));
    crOpts.attach(cramer);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (estimate->parsed() || nearest->parsed()) {
            const bool isNearest = nearest->parsed();
            const SearchOptions& opts = isNearest ? nearOpts : estOpts;
            const std::string& path = isNearest ? nearMatrixPath : matrixPath;
            const std::size_t ord = isNearest ? nearOrder : order;
            const SearchConfig cfg = opts.config();
            RunManifest manifest =
                makeManifest(isNearest ? "nearest" : "estimate", argc, argv, cfg);
            const CMatrix a = readMatrix(path);
            const CertifiedUpperBound ub =
                (ord == 0 || ord == a.dim()) ? estimateNu(a, cfg) : estimateNuOrder(a, ord, cfg);
            if (isNearest) writeMatrix(certOut, ub.certificate);
            printReport(std::move(manifest), certifiedUpperBoundToJson(ub));
            return kExitOk;
        }
        if (bound->parsed()) {
            const BoundTable table = boundTable(boundN, boundM);
            if (boundFormat == "csv") {
                std::cout << boundTableCsvHeader() << "\n" << boundTableToCsv(table) << "\n";
            } else {
                RunManifest manifest = makeManifest("bound", argc, argv, SearchConfig{});
                printReport(std::move(manifest), boundTableToJson(table));
            }
            return kExitOk;
        }
        if (chainSolve->parsed()) {
            RunManifest manifest = makeManifest("chain solve", argc, argv, SearchConfig{});
            const ScalarChainSolution sol = solveScalarChain(chainN, chainTol);
            nlohmann::json body;
            body["value"] = sol.value;
            body["chain"] = sol.chain.c;
            printReport(std::move(manifest), body);
            return kExitOk;
        }
        if (macdonald->parsed()) {
            const SearchConfig cfg = macOpts.config();
            RunManifest manifest = makeManifest("verify macdonald", argc, argv, cfg);
            const auto rows = runMacdonaldExperiment(macNMax, cfg);
            printRows(std::move(manifest), rows, macFormat);
            return kExitOk;
        }
        if (theorem1->parsed()) {
            const SearchConfig cfg = t1Opts.config();
            RunManifest manifest = makeManifest("verify theorem1", argc, argv, cfg);
            const Theorem1HarnessResult res =
                runTheorem1Harness(t1Trials, t1NMax, cfg, cfg.seed);
            printRows(std::move(manifest), res.rows, t1Format);
            if (res.falsification) return reportFalsification(*res.falsification);
            return kExitOk;
        }
        if (cramer->parsed()) {
            const SearchConfig cfg = crOpts.config();
            RunManifest manifest = makeManifest("explore cramer", argc, argv, cfg);
            const CramerResult res = runCramerExploration(crN, crM, cfg, cfg.seed);
            printRows(std::move(manifest), {res.row}, crFormat);
            if (res.falsification) return reportFalsification(*res.falsification);
            if (!res.assertionPassed) {
                std::cerr << "assertion failed: proven case gap " << res.row.gap
                          << " outside [-1e-9, 1e-3]\n";
                return kExitFalsification;
            }
            return kExitOk;
        }
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

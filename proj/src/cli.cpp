#include "lazevm/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>

#include "lazevm/bench.hpp"
#include "lazevm/errors.hpp"
#include "lazevm/machine.hpp"
#include "lazevm/metrics.hpp"
#include "lazevm/surface.hpp"
#include "lazevm/viz.hpp"

namespace lazevm {

namespace {

// Depth to which `run` forces and prints a constructor result.
constexpr int kObserveDepth = 64;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t parseSeed(const char* text) {
    if (text == nullptr || *text == '\0') {
        return 0;
    }
    std::string_view s(text);
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        throw UsageError("LAZEVM_SEED must be a non-negative integer, got '" + std::string(s) + "'");
    }
    return v;
}

GcPolicy parseGc(const std::string& text) {
    auto g = GcPolicy::parse(text);
    if (!g) {
        throw UsageError("--gc expects off, step or a positive count, got '" + text + "'");
    }
    return *g;
}

std::string metricsCsv(const Metrics& m) {
    return "steps,allocations,thunkUpdates,dupCopies,deepDupThunks,peakLiveCells,finalLiveCells\n" +
           std::to_string(m.steps) + "," + std::to_string(m.allocations) + "," + std::to_string(m.thunkUpdates) +
           "," + std::to_string(m.dupCopies) + "," + std::to_string(m.deepDupThunks) + "," +
           std::to_string(m.peakLiveCells) + "," + std::to_string(m.finalLiveCells) + "\n";
}

struct RunArgs {
    std::string file;
    std::string gc = "off";
    std::uint64_t budgetSteps = 0;
    std::uint64_t budgetCells = 0;
    bool noVarHat = false;
    std::string metrics = "text";
};

int doRun(const RunArgs& a, std::uint64_t seed, std::ostream& out, std::ostream& err) {
    MachineOptions opts;
    opts.gc = parseGc(a.gc);
    opts.budget.maxSteps = a.budgetSteps;
    opts.budget.maxCells = a.budgetCells;
    opts.varHat = !a.noVarHat;
    Program prog = loadProgramFile(a.file);
    MachineConfig cfg = initConfig(prog, opts, seed);
    try {
        run(cfg);
    } catch (const EvalError& e) {
        err << "error: " << e.what() << "\n";
        err << formatKeyValue(cfg.metrics);
        return kExitEvalError;
    }
    MachineOptions obs = opts;
    obs.gc = GcPolicy::off();
    obs.budget = Budget{};
    out << observe(cfg.control, cfg.heap, kObserveDepth, obs).render() << "\n";
    if (a.metrics == "csv") {
        out << metricsCsv(cfg.metrics);
    } else {
        out << formatKeyValue(cfg.metrics);
    }
    return kExitOk;
}

struct BenchArgs {
    BenchParams params;
    std::string out;
    std::string gc = "step";
    std::string dump;
    bool check = false;
    unsigned jobs = 1;
};

int doBench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
    try {
        validateParams(a.params);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    MachineOptions opts = defaultBenchMachine();
    opts.gc = parseGc(a.gc);
    if (!a.dump.empty()) {
        std::filesystem::create_directories(a.dump);
        for (auto st : kStrategies) {
            for (auto sc : kScenarios) {
                if (!scenarioAllowed(st, sc)) {
                    continue;
                }
                auto path = std::filesystem::path(a.dump) /
                            (std::string(strategyName(st)) + "-" + std::string(scenarioName(sc)) + ".lz");
                std::ofstream f(path);
                f << benchSource(st, sc, a.params);
                if (!f) {
                    throw std::runtime_error("cannot write " + path.string());
                }
            }
        }
    }
    auto results = runMatrix({a.params}, opts, a.jobs);
    if (a.out.empty() || a.out == "-") {
        emitCsv(results, out);
    } else {
        emitCsv(results, a.out);
    }
    for (const auto& r : results) {
        if (r.status != BenchStatus::Ok) {
            err << strategyName(r.strategy) << "/" << scenarioName(r.scenario) << ": " << r.error << "\n";
        }
    }
    if (a.check) {
        OrderingReport rep = checkOrdering(results);
        for (const auto& v : rep.violations) {
            err << "violation: " << v << "\n";
        }
        if (!rep.ok()) {
            return kExitOrdering;
        }
        err << "ordering: " << rep.checks << " checks passed\n";
    }
    return kExitOk;
}

struct TraceArgs {
    std::string file;
    std::uint64_t every = 0;
    std::string dotDir;
};

int doTrace(const TraceArgs& a, std::uint64_t seed, std::ostream& out, std::ostream& err) {
    Program prog = loadProgramFile(a.file);
    MachineConfig cfg = initConfig(prog, MachineOptions{}, seed);
    if (!a.dotDir.empty()) {
        std::filesystem::create_directories(a.dotDir);
    }
    std::size_t emitted = 0;
    std::optional<std::uint64_t> lastStep;
    auto emit = [&](const MachineConfig& c) {
        if (lastStep == c.metrics.steps) {
            return;
        }
        lastStep = c.metrics.steps;
        HeapSnapshot s = takeSnapshot(c);
        out << "step " << s.stepIndex << ": " << s.cells.size() << " cells, " << unreachableCells(s).size()
            << " unreachable\n";
        if (!a.dotDir.empty()) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "step-%08llu.dot", static_cast<unsigned long long>(s.stepIndex));
            auto path = std::filesystem::path(a.dotDir) / buf;
            std::ofstream f(path);
            f << exportDot(s);
            if (!f) {
                throw std::runtime_error("cannot write " + path.string());
            }
        }
        ++emitted;
    };
    emit(cfg);
    try {
        run(cfg, [&](const MachineConfig& c, Rule r) {
            bool sample = a.every > 0 ? c.metrics.steps % a.every == 0 : r == Rule::VarLeave;
            if (sample) {
                emit(c);
            }
        });
    } catch (const EvalError& e) {
        err << "error: " << e.what() << "\n";
        return kExitEvalError;
    }
    emit(cfg);
    out << observe(cfg.control, cfg.heap, kObserveDepth).render() << "\n";
    out << emitted << " snapshots\n";
    return kExitOk;
}

}  // namespace

int runCommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const char* seedEnv) {
    CLI::App app{"lazevm: a lazy evaluation machine with dup and deepDup", "lazevm"};
    app.require_subcommand(1);

    RunArgs ra;
    auto* runCmd = app.add_subcommand("run", "Evaluate a .lz program");
    runCmd->add_option("file", ra.file, "Program file")->required();
    runCmd->add_option("--gc", ra.gc, "off, step or N");
    runCmd->add_option("--budget-steps", ra.budgetSteps, "Step limit, 0 for none");
    runCmd->add_option("--budget-cells", ra.budgetCells, "Allocation limit, 0 for none");
    runCmd->add_flag("--no-varhat", ra.noVarHat, "Skip renaming values returned through a variable");
    runCmd->add_option("--metrics", ra.metrics, "text or csv")->check(CLI::IsMember({"text", "csv"}));

    BenchArgs ba;
    auto* benchCmd = app.add_subcommand("bench", "Run the strategy by scenario matrix");
    benchCmd->add_option("--b", ba.params.b, "Successors per state");
    benchCmd->add_option("--d", ba.params.d, "Rating depth");
    benchCmd->add_option("--n", ba.params.n, "Solution element demanded");
    benchCmd->add_option("--succs-cost", ba.params.succsCost, "Extra steps per successor");
    benchCmd->add_option("--out", ba.out, "CSV destination, stdout by default");
    benchCmd->add_option("--gc", ba.gc, "off, step or N");
    benchCmd->add_option("--dump-programs", ba.dump, "Write each generated program to this directory");
    benchCmd->add_flag("--check", ba.check, "Verify the expected memory pattern");
    benchCmd->add_option("--jobs", ba.jobs, "Parallel cells")->check(CLI::PositiveNumber);

    TraceArgs ta;
    auto* traceCmd = app.add_subcommand("trace", "Evaluate and emit heap snapshots");
    traceCmd->add_option("file", ta.file, "Program file")->required();
    traceCmd->add_option("--every", ta.every, "Sample every K steps instead of at each Var-leave")
        ->check(CLI::PositiveNumber);
    traceCmd->add_option("--dot", ta.dotDir, "Directory for DOT files");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        std::uint64_t seed = parseSeed(seedEnv);
        if (*runCmd) {
            return doRun(ra, seed, out, err);
        }
        if (*benchCmd) {
            return doBench(ba, out, err);
        }
        return doTrace(ta, seed, out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitEvalError;
    }
}

}  // namespace lazevm

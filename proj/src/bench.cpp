#include "lazevm/bench.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "lazevm/surface.hpp"

namespace lazevm {

std::string_view strategyName(Strategy s) {
    switch (s) {
        case Strategy::Original: return "original";
        case Strategy::SolveDup: return "solveDup";
        case Strategy::RateDup: return "rateDup";
        case Strategy::SolveDeepDup: return "solveDeepDup";
        case Strategy::UnitLifting: return "unitLifting";
        case Strategy::ChurchEncoding: return "churchEncoding";
    }
    return "?";
}

std::string_view scenarioName(Scenario s) {
    switch (s) {
        case Scenario::NoSharing: return "noSharing";
        case Scenario::SharedTree: return "sharedTree";
        case Scenario::AddThunk: return "addThunk";
        case Scenario::PartlyEvaled: return "partlyEvaled";
        case Scenario::FullyEvaled: return "fullyEvaled";
        case Scenario::RunTwice: return "runTwice";
    }
    return "?";
}

std::optional<Strategy> parseStrategy(std::string_view s) {
    for (auto st : kStrategies) {
        if (strategyName(st) == s) {
            return st;
        }
    }
    return std::nullopt;
}

std::optional<Scenario> parseScenario(std::string_view s) {
    for (auto sc : kScenarios) {
        if (scenarioName(sc) == s) {
            return sc;
        }
    }
    return std::nullopt;
}

bool scenarioAllowed(Strategy st, Scenario sc) {
    bool refactored = st == Strategy::UnitLifting || st == Strategy::ChurchEncoding;
    return !(refactored && (sc == Scenario::PartlyEvaled || sc == Scenario::FullyEvaled));
}

void validateParams(const BenchParams& p) {
    if (p.b < 1 || p.d < 0 || p.n < 1 || p.succsCost < 0) {
        throw std::invalid_argument("bench parameters need b >= 1, d >= 0, n >= 1, succsCost >= 0");
    }
}

std::string benchPrelude(const BenchParams& p) {
    validateParams(p);
    std::ostringstream o;
    o << "data Cons/2; data Nil/0; data Pair/2; data Node/2; data UNode/2; data Unit/0;\n"
         "map f xs = case xs of { Nil -> Nil; Cons y ys -> Cons (f y) (map f ys) };\n"
         "fst p = case p of { Pair a b -> a };\n"
         "snd p = case p of { Pair a b -> b };\n"
         "index xs k = case xs of { Cons y ys -> case k == 0 of { True -> y; False -> index ys (k - 1) } };\n"
         "maximum xs = case xs of { Cons y ys -> maxFrom y ys };\n"
         "maxFrom m xs = case xs of { Nil -> m; Cons y ys -> case y <= m of { True -> maxFrom m ys; "
         "False -> maxFrom y ys } };\n"
         "maximumBy le xs = case xs of { Cons y ys -> maxByFrom le y ys };\n"
         "maxByFrom le m xs = case xs of { Nil -> m; Cons y ys -> case le y m of { True -> maxByFrom le m ys; "
         "False -> maxByFrom le y ys } };\n"
         "sndLe p q = snd p <= snd q;\n"
         "burn k x = case k == 0 of { True -> x; False -> burn (k - 1) x };\n"
         "value s = s * 6364136223846793005 + 1442695040888963407;\n";
    o << "succs s = [";
    for (int i = 1; i <= p.b; ++i) {
        if (i > 1) {
            o << ", ";
        }
        if (p.succsCost > 0) {
            o << "burn " << p.succsCost << " (s * " << p.b << " + " << i << ")";
        } else {
            o << "s * " << p.b << " + " << i;
        }
    }
    o << "];\n";
    return o.str();
}

namespace {

std::string treeDefs(const BenchParams& p) {
    std::ostringstream o;
    o << "tree s = Node s (map tree (succs s));\n"
         "fstChild t = case t of { Node s ts -> case ts of { Cons x xs -> x } };\n"
         "rate d t = case t of { Node s ts -> case d == 0 of { True -> value s; "
         "False -> maximum (map (rate (d - 1)) ts) } };\n"
         "solve t = case t of { Node n ts -> Cons n (solve (pick ts)) };\n"
         "pick ts = fst (maximumBy sndLe (map (\\c -> Pair c (rate "
      << p.d << " c)) ts));\n";
    return o.str();
}

std::string strategyDefs(Strategy st, const BenchParams& p) {
    std::ostringstream o;
    switch (st) {
        case Strategy::Original:
            o << treeDefs(p);
            break;
        case Strategy::SolveDup:
            o << treeDefs(p) << "solveDup t = case dup t of { Box t2 -> solve t2 };\n";
            break;
        case Strategy::RateDup:
            o << treeDefs(p)
              << "rateDup d t = case dup t of { Box t2 -> rate d t2 };\n"
                 "solveR t = case t of { Node n ts -> Cons n (solveR (pickR ts)) };\n"
                 "pickR ts = fst (maximumBy sndLe (map (\\c -> Pair c (rateDup "
              << p.d << " c)) ts));\n";
            break;
        case Strategy::SolveDeepDup:
            o << treeDefs(p) << "solveDeepDup t = case deepDup t of { Box t2 -> solve t2 };\n";
            break;
        case Strategy::UnitLifting:
            o << "utree s u = UNode s (map utree (succs s));\n"
                 "ufstChild t u = case t Unit of { UNode s ts -> case ts of { Cons x xs -> x u } };\n"
                 "urate d t = case t Unit of { UNode s ts -> case d == 0 of { True -> value s; "
                 "False -> maximum (map (urate (d - 1)) ts) } };\n"
                 "usolve t = case t Unit of { UNode n ts -> Cons n (usolve (upick ts)) };\n"
                 "upick ts = fst (maximumBy sndLe (map (\\c -> Pair c (urate "
              << p.d << " c)) ts));\n";
            break;
        case Strategy::ChurchEncoding:
            o << treeDefs(p)
              << "ctree s f = f s (map (\\s2 -> ctree s2 f) (succs s));\n"
                 "csolve t = fst (t csolveStep);\n"
                 "csolveStep n rc = Pair (Cons n (fst (maximumBy crateLe rc))) (\\d -> case d == 0 of "
                 "{ True -> value n; False -> maximum (map (\\q -> snd q (d - 1)) rc) });\n"
                 "crateLe p q = snd p "
              << p.d << " <= snd q " << p.d
              << ";\n"
                 "toCTree t f = case t of { Node s ts -> f s (map (\\c -> toCTree c f) ts) };\n"
                 "fromCTree ct = ct (\\s ts -> Node s ts);\n"
                 "cfstChild t = toCTree (fstChild (fromCTree t));\n";
            break;
    }
    return o.str();
}

struct Names {
    const char* make;
    const char* solver;
    const char* firstChild;
};

Names namesFor(Strategy st) {
    switch (st) {
        case Strategy::Original: return {"tree", "solve", "fstChild"};
        case Strategy::SolveDup: return {"tree", "solveDup", "fstChild"};
        case Strategy::RateDup: return {"tree", "solveR", "fstChild"};
        case Strategy::SolveDeepDup: return {"tree", "solveDeepDup", "fstChild"};
        case Strategy::UnitLifting: return {"utree", "usolve", "ufstChild"};
        case Strategy::ChurchEncoding: return {"ctree", "csolve", "cfstChild"};
    }
    return {"tree", "solve", "fstChild"};
}

std::string mainDef(Strategy st, Scenario sc, const BenchParams& p) {
    const Names nm = namesFor(st);
    const std::string t = std::string(nm.make) + " 1";
    const std::string run = "index (" + std::string(nm.solver) + " t) " + std::to_string(p.n);
    std::ostringstream o;
    o << "main = ";
    switch (sc) {
        case Scenario::NoSharing:
            o << "let { t = " << t << " } in " << run;
            break;
        case Scenario::SharedTree:
            o << "let { t = " << t << "; r = " << run << " } in seq r (seq t r)";
            break;
        case Scenario::AddThunk:
            o << "let { t = " << t << "; r = index (" << nm.solver << " (" << nm.firstChild << " t)) " << p.n
              << " } in seq r (seq t r)";
            break;
        case Scenario::PartlyEvaled:
            o << "let { t = " << t << "; r = " << run << " } in seq (" << nm.firstChild
              << " t) (seq r (seq t r))";
            break;
        case Scenario::FullyEvaled:
            o << "let { t = " << t << "; r0 = index (solve t) " << p.n << "; r = " << run
              << " } in seq r0 (seq r (seq t r))";
            break;
        case Scenario::RunTwice:
            o << "let { t = " << t << "; r1 = " << run << "; r2 = " << run << " } in seq r1 (seq r2 (seq t r2))";
            break;
    }
    o << ";\n";
    return o.str();
}

}  // namespace

std::string benchSource(Strategy st, Scenario sc, const BenchParams& p) {
    if (!scenarioAllowed(st, sc)) {
        throw std::invalid_argument(std::string("scenario ") + std::string(scenarioName(sc)) +
                                    " is not defined for " + std::string(strategyName(st)));
    }
    return benchPrelude(p) + strategyDefs(st, p) + mainDef(st, sc, p);
}

Program buildBenchProgram(Strategy st, Scenario sc, const BenchParams& p) {
    return compileSource(benchSource(st, sc, p));
}

std::string_view benchStatusName(BenchStatus s) {
    switch (s) {
        case BenchStatus::Ok: return "ok";
        case BenchStatus::BudgetExceeded: return "budget";
        case BenchStatus::Error: return "error";
    }
    return "?";
}

MachineOptions defaultBenchMachine() {
    MachineOptions o;
    o.gc = GcPolicy::everyStep();
    o.budget.maxSteps = 200'000'000;
    o.budget.maxCells = 200'000'000;
    return o;
}

BenchResult runCell(Strategy st, Scenario sc, const BenchParams& p, const MachineOptions& options) {
    BenchResult r;
    r.strategy = st;
    r.scenario = sc;
    r.params = p;
    Program prog = buildBenchProgram(st, sc, p);
    MachineConfig cfg = initConfig(prog, options);
    try {
        run(cfg);
        r.metrics = cfg.metrics;
        r.answer = observe(cfg.control, cfg.heap, 1).render();
    } catch (const EvalError& e) {
        r.metrics = cfg.metrics;
        r.status = e.kind() == EvalError::Kind::BudgetExceeded ? BenchStatus::BudgetExceeded : BenchStatus::Error;
        r.error = e.what();
    }
    return r;
}

std::vector<BenchResult> runMatrix(const std::vector<BenchParams>& grid, const MachineOptions& options,
                                   unsigned jobs) {
    struct Task {
        std::size_t gridIndex;
        Strategy st;
        Scenario sc;
    };
    std::vector<Task> tasks;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        validateParams(grid[g]);
        for (auto st : kStrategies) {
            for (auto sc : kScenarios) {
                if (scenarioAllowed(st, sc)) {
                    tasks.push_back(Task{g, st, sc});
                }
            }
        }
    }
    std::vector<BenchResult> out(tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex errMutex;
    std::exception_ptr firstError;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) {
                return;
            }
            try {
                out[i] = runCell(tasks[i].st, tasks[i].sc, grid[tasks[i].gridIndex], options);
            } catch (...) {
                std::lock_guard lock(errMutex);
                if (!firstError) {
                    firstError = std::current_exception();
                }
            }
        }
    };
    unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(tasks.size())));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (unsigned i = 0; i < n; ++i) {
            threads.emplace_back(worker);
        }
        for (auto& t : threads) {
            t.join();
        }
    }
    if (firstError) {
        std::rethrow_exception(firstError);
    }
    return out;
}

Level expectedLevel(Strategy st, Scenario sc) {
    switch (st) {
        case Strategy::Original:
            return sc == Scenario::NoSharing ? Level::Low : Level::High;
        case Strategy::SolveDup:
            return (sc == Scenario::NoSharing || sc == Scenario::SharedTree || sc == Scenario::RunTwice)
                       ? Level::Low
                       : Level::High;
        case Strategy::RateDup:
            return (sc == Scenario::FullyEvaled || sc == Scenario::RunTwice) ? Level::High : Level::Low;
        case Strategy::SolveDeepDup:
            return sc == Scenario::FullyEvaled ? Level::High : Level::Low;
        case Strategy::UnitLifting:
        case Strategy::ChurchEncoding:
            return Level::Low;
    }
    return Level::Low;
}

namespace {

std::string cellLabel(const BenchResult& r) {
    std::ostringstream o;
    o << strategyName(r.strategy) << "/" << scenarioName(r.scenario) << " (b=" << r.params.b
      << " d=" << r.params.d << " n=" << r.params.n << " cost=" << r.params.succsCost << ")";
    return o.str();
}

}  // namespace

OrderingReport checkOrdering(const std::vector<BenchResult>& results) {
    OrderingReport rep;
    std::vector<BenchParams> points;
    for (const auto& r : results) {
        if (std::find(points.begin(), points.end(), r.params) == points.end()) {
            points.push_back(r.params);
        }
    }
    for (const auto& p : points) {
        std::map<std::pair<Strategy, Scenario>, const BenchResult*> cells;
        for (const auto& r : results) {
            if (r.params == p) {
                cells[{r.strategy, r.scenario}] = &r;
            }
        }
        auto get = [&](Strategy st, Scenario sc) -> const BenchResult* {
            auto it = cells.find({st, sc});
            return it == cells.end() ? nullptr : it->second;
        };
        bool complete = true;
        for (auto st : kStrategies) {
            for (auto sc : kScenarios) {
                if (!scenarioAllowed(st, sc)) {
                    continue;
                }
                ++rep.checks;
                const BenchResult* r = get(st, sc);
                if (r == nullptr) {
                    complete = false;
                    rep.violations.push_back(std::string("missing cell ") + std::string(strategyName(st)) + "/" +
                                             std::string(scenarioName(sc)));
                } else if (r->status != BenchStatus::Ok) {
                    complete = false;
                    rep.violations.push_back(cellLabel(*r) + " did not finish: " + r->error);
                }
            }
        }
        if (!complete) {
            continue;
        }
        const double base = static_cast<double>(get(Strategy::Original, Scenario::NoSharing)->metrics.peakLiveCells);
        for (auto st : kStrategies) {
            for (auto sc : kScenarios) {
                if (!scenarioAllowed(st, sc)) {
                    continue;
                }
                ++rep.checks;
                const BenchResult& r = *get(st, sc);
                const double peak = static_cast<double>(r.metrics.peakLiveCells);
                const Level got = peak >= kHighFactor * base ? Level::High : Level::Low;
                if (got != expectedLevel(st, sc)) {
                    std::ostringstream o;
                    o << cellLabel(r) << " expected " << (expectedLevel(st, sc) == Level::High ? "high" : "low")
                      << ", peak " << r.metrics.peakLiveCells << " against baseline " << base;
                    rep.violations.push_back(o.str());
                }
            }
            ++rep.checks;
            const BenchResult& ns = *get(st, Scenario::NoSharing);
            const BenchResult& sh = *get(st, Scenario::SharedTree);
            if (ns.answer != sh.answer) {
                rep.violations.push_back(cellLabel(sh) + " answer " + sh.answer + " differs from noSharing " +
                                         ns.answer);
            }
        }
        for (auto st : {Strategy::SolveDup, Strategy::SolveDeepDup}) {
            ++rep.checks;
            const BenchResult& sh = *get(st, Scenario::SharedTree);
            const BenchResult& twice = *get(st, Scenario::RunTwice);
            const double ratio =
                static_cast<double>(twice.metrics.steps) / (2.0 * static_cast<double>(sh.metrics.steps));
            if (ratio < 1.0 - kRunTwiceTolerance || ratio > 1.0 + kRunTwiceTolerance) {
                std::ostringstream o;
                o << cellLabel(twice) << " steps " << twice.metrics.steps << " are not twice sharedTree "
                  << sh.metrics.steps;
                rep.violations.push_back(o.str());
            }
        }
        if (p.succsCost > 0) {
            ++rep.checks;
            const BenchResult& orig = *get(Strategy::Original, Scenario::SharedTree);
            const BenchResult& rd = *get(Strategy::RateDup, Scenario::SharedTree);
            if (rd.metrics.steps <= orig.metrics.steps) {
                std::ostringstream o;
                o << cellLabel(rd) << " steps " << rd.metrics.steps << " do not exceed original "
                  << orig.metrics.steps;
                rep.violations.push_back(o.str());
            }
        }
    }
    return rep;
}

void emitCsv(const std::vector<BenchResult>& results, std::ostream& out) {
    out << kCsvHeader << "\n";
    for (const auto& r : results) {
        const Metrics& m = r.metrics;
        out << strategyName(r.strategy) << "," << scenarioName(r.scenario) << "," << r.params.b << ","
            << r.params.d << "," << r.params.n << "," << m.steps << "," << m.allocations << "," << m.thunkUpdates
            << "," << m.dupCopies << "," << m.deepDupThunks << "," << m.peakLiveCells << "," << m.finalLiveCells
            << "\n";
    }
}

void emitCsv(const std::vector<BenchResult>& results, const std::string& path) {
    std::ofstream f(path);
    if (!f) {
        throw std::runtime_error("cannot write " + path);
    }
    emitCsv(results, f);
    f.flush();
    if (!f) {
        throw std::runtime_error("cannot write " + path);
    }
}

}  // namespace lazevm

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lazevm/analysis.hpp"
#include "lazevm/bench.hpp"
#include "lazevm/machine.hpp"
#include "lazevm/surface.hpp"

using namespace lazevm;

namespace {

const std::vector<BenchResult>& defaultMatrix() {
    static const std::vector<BenchResult> m = runMatrix({BenchParams{}});
    return m;
}

std::string csvOf(const std::vector<BenchResult>& rs) {
    std::ostringstream o;
    emitCsv(rs, o);
    return o.str();
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) {
        out.push_back(l);
    }
    return out;
}

BenchResult* find(std::vector<BenchResult>& rs, Strategy st, Scenario sc) {
    for (auto& r : rs) {
        if (r.strategy == st && r.scenario == sc) {
            return &r;
        }
    }
    return nullptr;
}

bool mentions(const OrderingReport& rep, const std::string& what) {
    return std::any_of(rep.violations.begin(), rep.violations.end(),
                       [&](const std::string& v) { return v.find(what) != std::string::npos; });
}

}  // namespace

TEST_SUITE("bench") {
    TEST_CASE("names round-trip and parameters are validated") {
        for (Strategy s : kStrategies) {
            CHECK(parseStrategy(strategyName(s)) == s);
        }
        for (Scenario s : kScenarios) {
            CHECK(parseScenario(scenarioName(s)) == s);
        }
        CHECK_FALSE(parseStrategy("nope").has_value());
        CHECK_NOTHROW(validateParams(BenchParams{}));
        CHECK_THROWS_AS(validateParams(BenchParams{0, 2, 64, 0}), std::invalid_argument);
        CHECK_THROWS_AS(validateParams(BenchParams{2, -1, 64, 0}), std::invalid_argument);
        CHECK_THROWS_AS(validateParams(BenchParams{2, 2, 0, 0}), std::invalid_argument);
        CHECK_THROWS_AS(validateParams(BenchParams{2, 2, 64, -1}), std::invalid_argument);
    }

    TEST_CASE("the refactored trees omit exactly the evaluated scenarios") {
        int allowed = 0;
        for (Strategy st : kStrategies) {
            for (Scenario sc : kScenarios) {
                bool refactored = st == Strategy::UnitLifting || st == Strategy::ChurchEncoding;
                bool evaluated = sc == Scenario::PartlyEvaled || sc == Scenario::FullyEvaled;
                CHECK(scenarioAllowed(st, sc) == !(refactored && evaluated));
                allowed += scenarioAllowed(st, sc) ? 1 : 0;
            }
        }
        CHECK(allowed == 32);
        CHECK_THROWS_AS(benchSource(Strategy::UnitLifting, Scenario::PartlyEvaled, BenchParams{}),
                        std::invalid_argument);
        CHECK_THROWS_AS(buildBenchProgram(Strategy::ChurchEncoding, Scenario::FullyEvaled, BenchParams{}),
                        std::invalid_argument);
    }

    TEST_CASE("the default matrix has one finished row per allowed cell") {
        const auto& m = defaultMatrix();
        REQUIRE(m.size() == 32);
        for (const auto& r : m) {
            CHECK(scenarioAllowed(r.strategy, r.scenario));
            CHECK(r.status == BenchStatus::Ok);
            CHECK(r.params == BenchParams{});
            CHECK(r.metrics.peakLiveCells >= r.metrics.finalLiveCells);
        }
        for (std::size_t i = 1; i < m.size(); ++i) {
            auto key = [](const BenchResult& r) { return std::pair{r.strategy, r.scenario}; };
            CHECK(key(m[i - 1]) < key(m[i]));
        }
    }

    TEST_CASE("strategies agree on the answer; only addThunk solves a different tree") {
        const auto& m = defaultMatrix();
        const std::string whole = m.front().answer;
        std::string sub;
        for (const auto& r : m) {
            if (r.scenario == Scenario::AddThunk) {
                if (sub.empty()) {
                    sub = r.answer;
                }
                CHECK(r.answer == sub);
            } else {
                CHECK(r.answer == whole);
            }
        }
        CHECK(sub != whole);
    }

    TEST_CASE("csv layout and determinism") {
        CHECK(csvOf({}) == std::string(kCsvHeader) + "\n");
        std::string a = csvOf(defaultMatrix());
        auto ls = lines(a);
        REQUIRE(ls.size() == 33);
        CHECK(ls[0] == kCsvHeader);
        for (const auto& l : ls) {
            CHECK(std::count(l.begin(), l.end(), ',') == 11);
        }
        CHECK(ls[1].rfind("original,noSharing,2,2,64,", 0) == 0);
        CHECK(csvOf(runMatrix({BenchParams{}}, defaultBenchMachine(), 2)) == a);

        auto dir = std::filesystem::temp_directory_path() / "lazevm_bench_csv";
        std::filesystem::create_directories(dir);
        emitCsv(defaultMatrix(), (dir / "m.csv").string());
        std::ifstream in(dir / "m.csv");
        std::stringstream buf;
        buf << in.rdbuf();
        CHECK(buf.str() == a);
        CHECK_THROWS_AS(emitCsv(defaultMatrix(), (dir / "missing" / "m.csv").string()), std::runtime_error);
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("a corrupted matrix names the swapped cells") {
        std::vector<BenchResult> m = defaultMatrix();
        OrderingReport clean = checkOrdering(m);
        CHECK(clean.checks > 0);
        std::swap(find(m, Strategy::Original, Scenario::SharedTree)->metrics,
                  find(m, Strategy::SolveDeepDup, Scenario::SharedTree)->metrics);
        OrderingReport bad = checkOrdering(m);
        CHECK(bad.violations.size() >= clean.violations.size() + 2);
        CHECK(mentions(bad, "original/sharedTree"));
        CHECK(mentions(bad, "solveDeepDup/sharedTree"));

        std::vector<BenchResult> missing = defaultMatrix();
        missing.pop_back();
        CHECK(mentions(checkOrdering(missing), "missing cell"));

        std::vector<BenchResult> wrong = defaultMatrix();
        find(wrong, Strategy::SolveDup, Scenario::SharedTree)->answer = "0";
        CHECK(mentions(checkOrdering(wrong), "differs from noSharing"));
    }

    TEST_CASE("every bench program is unchanged by erasing dup and deepDup") {
        BenchParams small{2, 2, 8, 0};
        for (Strategy st : kStrategies) {
            for (Scenario sc : kScenarios) {
                if (!scenarioAllowed(st, sc)) {
                    continue;
                }
                Program p = buildBenchProgram(st, sc, small);
                CHECK(observe(eval(p), 4) == observe(eval(eraseDups(p)), 4));
            }
        }
    }

    TEST_CASE("a retained tree grows with n; a deep copy does not") {
        std::vector<std::uint64_t> orig;
        std::vector<std::uint64_t> deep;
        for (int n : {16, 32, 64, 128}) {
            orig.push_back(runCell(Strategy::Original, Scenario::SharedTree, BenchParams{2, 2, n, 0}).metrics.peakLiveCells);
            deep.push_back(
                runCell(Strategy::SolveDeepDup, Scenario::SharedTree, BenchParams{2, 2, n, 0}).metrics.peakLiveCells);
        }
        // Doubling n doubles the retained part.
        for (std::size_t i = 2; i < orig.size(); ++i) {
            CHECK(orig[i] - orig[i - 1] == 2 * (orig[i - 1] - orig[i - 2]));
        }
        CHECK(orig.back() > 4 * orig.front() / 2);
        CHECK(deep.back() - deep.front() <= deep.front() / 10);
    }

    TEST_CASE("small shape b=2 d=1 n=4") {
        BenchParams p{2, 1, 4, 0};
        BenchResult sh = runCell(Strategy::Original, Scenario::SharedTree, p);
        BenchResult ns = runCell(Strategy::Original, Scenario::NoSharing, p);
        BenchResult dd = runCell(Strategy::SolveDeepDup, Scenario::SharedTree, p);
        CHECK(sh.status == BenchStatus::Ok);
        CHECK(sh.answer == ns.answer);
        CHECK(sh.metrics.peakLiveCells > ns.metrics.peakLiveCells);
        CHECK(dd.metrics.deepDupThunks > 0);
        CHECK(dd.metrics.peakLiveCells < sh.metrics.peakLiveCells);
    }

    TEST_CASE("an expensive successor function makes rateDup slower than the original") {
        BenchParams p{2, 2, 16, 32};
        BenchResult o = runCell(Strategy::Original, Scenario::SharedTree, p);
        BenchResult r = runCell(Strategy::RateDup, Scenario::SharedTree, p);
        CHECK(r.metrics.steps > o.metrics.steps);
        CHECK(r.answer == o.answer);
    }

    TEST_CASE("run twice costs twice for the copying solvers") {
        const auto& m = defaultMatrix();
        for (Strategy st : {Strategy::SolveDup, Strategy::SolveDeepDup}) {
            const BenchResult* sh = nullptr;
            const BenchResult* tw = nullptr;
            for (const auto& r : m) {
                if (r.strategy == st && r.scenario == Scenario::SharedTree) {
                    sh = &r;
                }
                if (r.strategy == st && r.scenario == Scenario::RunTwice) {
                    tw = &r;
                }
            }
            REQUIRE(sh != nullptr);
            REQUIRE(tw != nullptr);
            double ratio = static_cast<double>(tw->metrics.steps) / (2.0 * static_cast<double>(sh->metrics.steps));
            CHECK(ratio >= 1.0 - kRunTwiceTolerance);
            CHECK(ratio <= 1.0 + kRunTwiceTolerance);
        }
    }

    TEST_CASE("a tiny budget is reported per cell") {
        MachineOptions o = defaultBenchMachine();
        o.budget.maxSteps = 100;
        BenchResult r = runCell(Strategy::Original, Scenario::NoSharing, BenchParams{}, o);
        CHECK(r.status == BenchStatus::BudgetExceeded);
        CHECK_FALSE(r.error.empty());
        std::vector<BenchResult> rs(defaultMatrix());
        rs[0] = r;
        CHECK(mentions(checkOrdering(rs), "did not finish"));
    }
}

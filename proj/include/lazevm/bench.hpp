#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lazevm/expr.hpp"
#include "lazevm/machine.hpp"
#include "lazevm/metrics.hpp"

namespace lazevm {

enum class Strategy { Original, SolveDup, RateDup, SolveDeepDup, UnitLifting, ChurchEncoding };
enum class Scenario { NoSharing, SharedTree, AddThunk, PartlyEvaled, FullyEvaled, RunTwice };

inline constexpr std::array<Strategy, 6> kStrategies = {
    Strategy::Original,     Strategy::SolveDup,    Strategy::RateDup,
    Strategy::SolveDeepDup, Strategy::UnitLifting, Strategy::ChurchEncoding};
inline constexpr std::array<Scenario, 6> kScenarios = {Scenario::NoSharing,    Scenario::SharedTree,
                                                       Scenario::AddThunk,     Scenario::PartlyEvaled,
                                                       Scenario::FullyEvaled,  Scenario::RunTwice};

std::string_view strategyName(Strategy s);
std::string_view scenarioName(Scenario s);
std::optional<Strategy> parseStrategy(std::string_view s);
std::optional<Scenario> parseScenario(std::string_view s);

// The refactored tree types cannot be partly or fully evaluated.
bool scenarioAllowed(Strategy st, Scenario sc);

struct BenchParams {
    int b = 2;          // successors per state
    int d = 2;          // rating depth
    int n = 64;         // index of the solution element demanded
    int succsCost = 0;  // extra countdown steps wrapped around each successor

    friend bool operator==(const BenchParams&, const BenchParams&) = default;
};

// Throws std::invalid_argument unless b ≥ 1, d ≥ 0, n ≥ 1, succsCost ≥ 0.
void validateParams(const BenchParams& p);

// Shared definitions: lists, pairs, index, maximum/maximumBy, the state space.
std::string benchPrelude(const BenchParams& p);

// Full `.lz` text for one matrix cell; throws std::invalid_argument for a
// disallowed pair.
std::string benchSource(Strategy st, Scenario sc, const BenchParams& p);

Program buildBenchProgram(Strategy st, Scenario sc, const BenchParams& p);

enum class BenchStatus { Ok, BudgetExceeded, Error };
std::string_view benchStatusName(BenchStatus s);

struct BenchResult {
    Strategy strategy = Strategy::Original;
    Scenario scenario = Scenario::NoSharing;
    BenchParams params;
    Metrics metrics;
    BenchStatus status = BenchStatus::Ok;
    std::string error;
    // Rendered observable of the demanded solution element.
    std::string answer;
};

// Defaults: collection on every step, generous budgets.
MachineOptions defaultBenchMachine();

BenchResult runCell(Strategy st, Scenario sc, const BenchParams& p,
                    const MachineOptions& options = defaultBenchMachine());

// One result per allowed cell per grid point, sorted by (params position,
// strategy, scenario) whatever order the workers finish in.
std::vector<BenchResult> runMatrix(const std::vector<BenchParams>& grid,
                                   const MachineOptions& options = defaultBenchMachine(), unsigned jobs = 1);

// A cell is high when its peak is at least kHighFactor times the
// Original/NoSharing peak of the same grid point, low otherwise.
inline constexpr double kHighFactor = 5.0;
// RunTwice steps of SolveDup and SolveDeepDup against twice SharedTree.
inline constexpr double kRunTwiceTolerance = 0.10;

enum class Level { Low, High };
// The expected memory level of each allowed cell.
Level expectedLevel(Strategy st, Scenario sc);

struct OrderingReport {
    std::vector<std::string> violations;
    std::size_t checks = 0;

    bool ok() const { return violations.empty(); }
};

// Per grid point: every cell ran, the level pattern above, the RunTwice
// step ratio, unchanged answers between NoSharing and SharedTree, and, when
// succsCost > 0, RateDup/SharedTree taking more steps than Original/SharedTree.
OrderingReport checkOrdering(const std::vector<BenchResult>& results);

inline constexpr std::string_view kCsvHeader =
    "strategy,scenario,b,d,n,steps,allocations,thunkUpdates,dupCopies,deepDupThunks,peakLiveCells,finalLiveCells";

void emitCsv(const std::vector<BenchResult>& results, std::ostream& out);
// Throws std::runtime_error when the file cannot be written.
void emitCsv(const std::vector<BenchResult>& results, const std::string& path);

}  // namespace lazevm

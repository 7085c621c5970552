#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lazevm {

struct SourceLoc {
    int line = 1;
    int column = 1;

    friend bool operator==(const SourceLoc&, const SourceLoc&) = default;
};

// Rejected program text or a malformed program structure.
class ProgramError : public std::runtime_error {
public:
    enum class Kind {
        Syntax,
        UndeclaredConstructor,
        ArityMismatch,
        UnboundVariable,
        DuplicateName,
        MissingMain,
        Malformed,
    };

    ProgramError(Kind kind, std::string message, std::optional<SourceLoc> loc = std::nullopt);

    Kind kind() const { return kind_; }
    const std::optional<SourceLoc>& loc() const { return loc_; }
    const std::string& message() const { return message_; }

private:
    Kind kind_;
    std::string message_;
    std::optional<SourceLoc> loc_;
};

std::string_view programErrorKindName(ProgramError::Kind kind);

// A run that stopped without reaching a value.
class EvalError : public std::runtime_error {
public:
    enum class Kind {
        UnboundName,
        BlackholeEntered,
        NoMatchingAlternative,
        PrimTypeMismatch,
        BudgetExceeded,
        DupOfBlackhole,
    };

    EvalError(Kind kind, std::string detail);

    Kind kind() const { return kind_; }
    const std::string& detail() const { return detail_; }

private:
    Kind kind_;
    std::string detail_;
};

std::string_view evalErrorKindName(EvalError::Kind kind);

}  // namespace lazevm

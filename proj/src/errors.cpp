#include "lazevm/errors.hpp"

namespace lazevm {

namespace {

std::string formatProgramError(ProgramError::Kind kind, const std::string& message,
                               const std::optional<SourceLoc>& loc) {
    std::string out;
    if (loc) {
        out += std::to_string(loc->line) + ":" + std::to_string(loc->column) + ": ";
    }
    out += std::string(programErrorKindName(kind)) + ": " + message;
    return out;
}

}  // namespace

ProgramError::ProgramError(Kind kind, std::string message, std::optional<SourceLoc> loc)
    : std::runtime_error(formatProgramError(kind, message, loc)),
      kind_(kind),
      message_(std::move(message)),
      loc_(loc) {}

std::string_view programErrorKindName(ProgramError::Kind kind) {
    switch (kind) {
        case ProgramError::Kind::Syntax: return "syntax error";
        case ProgramError::Kind::UndeclaredConstructor: return "undeclared constructor";
        case ProgramError::Kind::ArityMismatch: return "arity mismatch";
        case ProgramError::Kind::UnboundVariable: return "unbound variable";
        case ProgramError::Kind::DuplicateName: return "duplicate name";
        case ProgramError::Kind::MissingMain: return "missing main";
        case ProgramError::Kind::Malformed: return "malformed program";
    }
    return "program error";
}

EvalError::EvalError(Kind kind, std::string detail)
    : std::runtime_error(std::string(evalErrorKindName(kind)) + (detail.empty() ? "" : ": " + detail)),
      kind_(kind),
      detail_(std::move(detail)) {}

std::string_view evalErrorKindName(EvalError::Kind kind) {
    switch (kind) {
        case EvalError::Kind::UnboundName: return "UnboundName";
        case EvalError::Kind::BlackholeEntered: return "BlackholeEntered";
        case EvalError::Kind::NoMatchingAlternative: return "NoMatchingAlternative";
        case EvalError::Kind::PrimTypeMismatch: return "PrimTypeMismatch";
        case EvalError::Kind::BudgetExceeded: return "BudgetExceeded";
        case EvalError::Kind::DupOfBlackhole: return "DupOfBlackhole";
    }
    return "EvalError";
}

}  // namespace lazevm

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lazevm/expr.hpp"
#include "lazevm/raw.hpp"

namespace lazevm {

struct DataDecl {
    std::string tag;
    int arity = 0;
    SourceLoc loc;
};

struct SourceDecl {
    std::string name;
    std::vector<std::string> params;
    RawExpr body;
    SourceLoc loc;
};

struct SourceProgram {
    std::vector<DataDecl> data;
    std::vector<SourceDecl> decls;

    // Declared constructors plus the builtin True/False.
    ConstructorTable constructors() const;
};

// Throws ProgramError: Syntax (with position), UndeclaredConstructor or
// ArityMismatch. Constructor applications must be saturated.
SourceProgram parseProgram(std::string_view text);

// A single expression against a known constructor table.
RawExpr parseExpr(std::string_view text, const ConstructorTable& constructors = builtinConstructors());

// Top-level names are numbered first, in declaration order, then each body
// is normalized. Throws ProgramError for duplicate declarations, a missing
// `main`, or unbound variables.
Program desugar(const SourceProgram& sp);

// parseProgram, desugar, then the core validator.
Program compileSource(std::string_view text);

// Reads and compiles a `.lz` file; throws std::runtime_error if unreadable.
Program loadProgramFile(const std::string& path);

}  // namespace lazevm

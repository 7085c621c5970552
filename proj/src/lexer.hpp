#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lazevm/errors.hpp"

namespace lazevm::detail {

enum class Tok { Ident, Tag, CoreName, Int, Sym, End };

struct Token {
    Tok kind;
    std::string text;
    std::int64_t value = 0;
    SourceLoc loc;
};

// Core mode admits `base#uniq` names and negative integer literals.
std::vector<Token> lex(std::string_view text, bool coreMode);

class TokenCursor {
public:
    explicit TokenCursor(std::vector<Token> toks) : toks_(std::move(toks)) {}

    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    const Token& next() {
        const Token& t = peek();
        if (pos_ < toks_.size() - 1) {
            ++pos_;
        }
        return t;
    }
    bool isSym(std::string_view s, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == Tok::Sym && t.text == s;
    }
    bool isKeyword(std::string_view s, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == Tok::Ident && t.text == s;
    }
    bool acceptSym(std::string_view s) {
        if (isSym(s)) {
            next();
            return true;
        }
        return false;
    }
    const Token& expectSym(std::string_view s);
    const Token& expectKeyword(std::string_view s);
    const Token& expect(Tok kind, std::string_view what);

    [[noreturn]] void fail(const std::string& message) const;

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

std::string describe(const Token& t);

bool isKeywordText(std::string_view s);

}  // namespace lazevm::detail

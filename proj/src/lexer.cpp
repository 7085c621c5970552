#include "lexer.hpp"

#include <array>
#include <cctype>
#include <charconv>

namespace lazevm::detail {

namespace {

bool identStart(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool identChar(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

constexpr std::array<std::string_view, 3> kTwoCharSyms = {"->", "==", "<="};
constexpr std::string_view kOneCharSyms = "\\=;{}()[],+-*/_";

}  // namespace

std::vector<Token> lex(std::string_view text, bool coreMode) {
    std::vector<Token> out;
    int line = 1;
    int col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t k) {
        for (std::size_t j = 0; j < k && i < text.size(); ++j, ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    auto fail = [&](const std::string& msg) {
        throw ProgramError(ProgramError::Kind::Syntax, msg, SourceLoc{line, col});
    };
    auto readInt = [&](std::size_t start, std::size_t end, bool negative) {
        std::uint64_t mag = 0;
        auto res = std::from_chars(text.data() + start, text.data() + end, mag);
        const std::uint64_t limit = negative ? (1ull << 63) : (1ull << 63) - 1;
        if (res.ec != std::errc() || mag > limit) {
            fail("integer literal out of range");
        }
        return negative ? static_cast<std::int64_t>(0 - mag) : static_cast<std::int64_t>(mag);
    };

    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (text.substr(i, 2) == "--") {
            while (i < text.size() && text[i] != '\n') {
                advance(1);
            }
            continue;
        }
        SourceLoc loc{line, col};
        if (identStart(c) && !(c == '_' && (i + 1 >= text.size() || !identChar(text[i + 1])))) {
            std::size_t j = i;
            while (j < text.size() && identChar(text[j])) {
                ++j;
            }
            std::string word(text.substr(i, j - i));
            if (j < text.size() && text[j] == '#') {
                if (!coreMode) {
                    advance(j - i);
                    fail("unexpected '#'");
                }
                std::size_t k = j + 1;
                while (k < text.size() && digit(text[k])) {
                    ++k;
                }
                if (k == j + 1) {
                    advance(j + 1 - i);
                    fail("expected digits after '#'");
                }
                std::string full(text.substr(i, k - i));
                advance(k - i);
                out.push_back(Token{Tok::CoreName, std::move(full), 0, loc});
                continue;
            }
            advance(j - i);
            Tok kind = std::isupper(static_cast<unsigned char>(word[0])) ? Tok::Tag : Tok::Ident;
            out.push_back(Token{kind, std::move(word), 0, loc});
            continue;
        }
        bool negative = coreMode && c == '-' && i + 1 < text.size() && digit(text[i + 1]);
        if (digit(c) || negative) {
            std::size_t start = negative ? i + 1 : i;
            std::size_t j = start;
            while (j < text.size() && digit(text[j])) {
                ++j;
            }
            if (j < text.size() && identChar(text[j])) {
                advance(j - i);
                fail("malformed number");
            }
            std::int64_t v = readInt(start, j, negative);
            std::string lexeme(text.substr(i, j - i));
            advance(j - i);
            out.push_back(Token{Tok::Int, std::move(lexeme), v, loc});
            continue;
        }
        bool matched = false;
        for (auto s : kTwoCharSyms) {
            if (text.substr(i, 2) == s) {
                advance(2);
                out.push_back(Token{Tok::Sym, std::string(s), 0, loc});
                matched = true;
                break;
            }
        }
        if (matched) {
            continue;
        }
        if (kOneCharSyms.find(c) != std::string_view::npos) {
            advance(1);
            out.push_back(Token{Tok::Sym, std::string(1, c), 0, loc});
            continue;
        }
        fail(std::string("unexpected character '") + c + "'");
    }
    out.push_back(Token{Tok::End, "", 0, SourceLoc{line, col}});
    return out;
}

std::string describe(const Token& t) {
    switch (t.kind) {
        case Tok::End: return "end of input";
        case Tok::Int: return "integer " + t.text;
        default: return "'" + t.text + "'";
    }
}

bool isKeywordText(std::string_view s) {
    static constexpr std::array<std::string_view, 8> kw = {
        "let", "in", "case", "of", "data", "dup", "deepDup", "seq"};
    for (auto k : kw) {
        if (k == s) {
            return true;
        }
    }
    return false;
}

void TokenCursor::fail(const std::string& message) const {
    throw ProgramError(ProgramError::Kind::Syntax, message, peek().loc);
}

const Token& TokenCursor::expectSym(std::string_view s) {
    if (!isSym(s)) {
        fail("expected '" + std::string(s) + "' but found " + describe(peek()));
    }
    return next();
}

const Token& TokenCursor::expectKeyword(std::string_view s) {
    if (!isKeyword(s)) {
        fail("expected '" + std::string(s) + "' but found " + describe(peek()));
    }
    return next();
}

const Token& TokenCursor::expect(Tok kind, std::string_view what) {
    if (peek().kind != kind || (kind == Tok::Ident && isKeywordText(peek().text))) {
        fail("expected " + std::string(what) + " but found " + describe(peek()));
    }
    return next();
}

}  // namespace lazevm::detail

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "stochrobust/errors.hpp"

namespace stochrobust {

// Shared tokenizer for the model, expression and formula grammars.
// Multi-character puncts recognized: -> == != <= >= . Everything else is
// a single-character punct.

enum class TokKind { ident, number, punct, eof };

struct Token {
    TokKind kind = TokKind::eof;
    std::string text;
    double number = 0.0;
    int line = 1;
    int col = 1;

    bool is(std::string_view p) const { return kind == TokKind::punct && text == p; }
    bool is_ident(std::string_view s) const { return kind == TokKind::ident && text == s; }
};

std::vector<Token> tokenize(std::string_view src);

// Cursor over a token vector with convenience accessors used by the parsers.
class TokenStream {
public:
    explicit TokenStream(std::vector<Token> toks) : toks_(std::move(toks)) {}

    const Token& peek(int ahead = 0) const {
        size_t i = pos_ + static_cast<size_t>(ahead);
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    const Token& next() {
        const Token& t = peek();
        if (pos_ < toks_.size() - 1) ++pos_;
        return t;
    }
    bool accept(std::string_view punct) {
        if (peek().is(punct)) { next(); return true; }
        return false;
    }
    const Token& expect(std::string_view punct) {
        if (!peek().is(punct)) fail("expected '" + std::string(punct) + "'");
        return next();
    }
    std::string expect_ident() {
        if (peek().kind != TokKind::ident) fail("expected identifier");
        return next().text;
    }
    double expect_number() {
        if (peek().kind != TokKind::number) fail("expected number");
        return next().number;
    }
    bool at_end() const { return peek().kind == TokKind::eof; }

    [[noreturn]] void fail(const std::string& msg) const {
        const Token& t = peek();
        std::string got = t.kind == TokKind::eof ? "end of input" : "'" + t.text + "'";
        throw ParseError(msg + ", got " + got, t.line, t.col);
    }

private:
    std::vector<Token> toks_;
    size_t pos_ = 0;
};

}  // namespace stochrobust

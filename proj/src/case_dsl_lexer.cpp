#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>

#include "qsafe/case_dsl.hpp"

namespace qsafe::dsl {

std::string_view to_string(TokenKind kind) noexcept {
    switch (kind) {
    case TokenKind::Ident: return "Ident";
    case TokenKind::Keyword: return "Keyword";
    case TokenKind::Number: return "Number";
    case TokenKind::Integer: return "Integer";
    case TokenKind::String: return "String";
    case TokenKind::LBrace: return "LBrace";
    case TokenKind::RBrace: return "RBrace";
    case TokenKind::Equals: return "Equals";
    case TokenKind::Of: return "Of";
    case TokenKind::Arrow: return "Arrow";
    case TokenKind::Eof: return "Eof";
    case TokenKind::Invalid: return "Invalid";
    }
    return "Invalid";
}

std::string format_error(const ParseError& error) {
    std::string text = "line " + std::to_string(error.line) + ", col " + std::to_string(error.col) + ": [" +
                       error.code + "] " + error.message;
    if (!error.expected.empty()) {
        text += " (expected ";
        for (std::size_t i = 0; i < error.expected.size(); ++i) {
            if (i > 0) text += " | ";
            text += to_string(error.expected[i]);
        }
        text += ", found " + std::string(to_string(error.found)) + ")";
    }
    return text;
}

namespace {

constexpr std::array<std::string_view, 14> kKeywords = {
    "case",    "target",  "scope",    "testing", "detection", "labels", "assume",
    "profile", "observed", "audit", "srf",     "oos",       "expert", "data",
};

bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    LexResult run() {
        LexResult result;
        while (true) {
            skip_trivia();
            Token token;
            token.line = line_;
            token.col = col_;
            if (pos_ >= text_.size()) {
                token.kind = TokenKind::Eof;
                result.tokens.push_back(std::move(token));
                return result;
            }
            if (auto error = next(token)) {
                result.error = std::move(error);
                return result;
            }
            result.tokens.push_back(std::move(token));
        }
    }

private:
    [[nodiscard]] char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
    }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_trivia() {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else {
                break;
            }
        }
    }

    ParseError error_at(const Token& token, std::string message) const {
        ParseError error;
        error.line = token.line;
        error.col = token.col;
        error.message = std::move(message);
        error.found = TokenKind::Invalid;
        error.code = "E_LEX";
        return error;
    }

    std::optional<ParseError> next(Token& token) {
        const char c = peek();
        switch (c) {
        case '{': token.kind = TokenKind::LBrace; token.lexeme = "{"; advance(); return std::nullopt;
        case '}': token.kind = TokenKind::RBrace; token.lexeme = "}"; advance(); return std::nullopt;
        case '=': token.kind = TokenKind::Equals; token.lexeme = "="; advance(); return std::nullopt;
        case '"': return string_literal(token);
        default: break;
        }
        if (c == '-' && peek(1) == '>') {
            token.kind = TokenKind::Arrow;
            token.lexeme = "->";
            advance();
            advance();
            return std::nullopt;
        }
        if (is_digit(c) || ((c == '-' || c == '.') && (is_digit(peek(1)) || (peek(1) == '.' && is_digit(peek(2)))))) {
            return number(token);
        }
        if (is_ident_start(c)) {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && is_ident_char(text_[pos_])) advance();
            token.lexeme = std::string(text_.substr(start, pos_ - start));
            if (token.lexeme == "of") {
                token.kind = TokenKind::Of;
            } else if (std::find(kKeywords.begin(), kKeywords.end(), token.lexeme) != kKeywords.end()) {
                token.kind = TokenKind::Keyword;
            } else {
                token.kind = TokenKind::Ident;
            }
            return std::nullopt;
        }
        const auto byte = static_cast<unsigned char>(c);
        std::string shown = (byte >= 0x20 && byte < 0x7f) ? std::string("'") + c + "'" : "byte " + std::to_string(byte);
        return error_at(token, "unexpected character " + shown);
    }

    std::optional<ParseError> string_literal(Token& token) {
        advance(); // opening quote
        std::string value;
        while (true) {
            if (pos_ >= text_.size() || peek() == '\n') return error_at(token, "unterminated string");
            const char c = peek();
            if (c == '"') {
                advance();
                break;
            }
            if (c == '\\') {
                const char escaped = peek(1);
                if (escaped != '"' && escaped != '\\') {
                    Token at;
                    at.line = line_;
                    at.col = col_;
                    return error_at(at, "invalid escape sequence in string");
                }
                value += escaped;
                advance();
                advance();
                continue;
            }
            value += c;
            advance();
        }
        token.kind = TokenKind::String;
        token.lexeme = std::move(value);
        return std::nullopt;
    }

    std::optional<ParseError> number(Token& token) {
        const std::size_t start = pos_;
        bool integral = true;
        if (peek() == '-') {
            integral = false;
            advance();
        }
        while (is_digit(peek())) advance();
        if (peek() == '.') {
            integral = false;
            advance();
            while (is_digit(peek())) advance();
        }
        if (peek() == 'e' || peek() == 'E') {
            const bool has_exponent =
                is_digit(peek(1)) || ((peek(1) == '+' || peek(1) == '-') && is_digit(peek(2)));
            if (has_exponent) {
                integral = false;
                advance();
                if (peek() == '+' || peek() == '-') advance();
                while (is_digit(peek())) advance();
            }
        }
        token.lexeme = std::string(text_.substr(start, pos_ - start));
        if (is_ident_char(peek()) || peek() == '.') {
            return error_at(token, "malformed number '" + token.lexeme + std::string(1, peek()) + "'");
        }
        const char* first = token.lexeme.data();
        const char* last = first + token.lexeme.size();
        if (integral) {
            const auto [ptr, ec] = std::from_chars(first, last, token.integer);
            if (ec != std::errc() || ptr != last) return error_at(token, "integer out of range '" + token.lexeme + "'");
            token.kind = TokenKind::Integer;
            token.number = static_cast<double>(token.integer);
            return std::nullopt;
        }
        const auto [ptr, ec] = std::from_chars(first, last, token.number);
        if (ec != std::errc() || ptr != last || !std::isfinite(token.number)) {
            return error_at(token, "number out of range '" + token.lexeme + "'");
        }
        token.kind = TokenKind::Number;
        return std::nullopt;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

} // namespace

LexResult lex(std::string_view text) { return Lexer(text).run(); }

} // namespace qsafe::dsl

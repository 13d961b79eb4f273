#pragma once

// Reader and canonical writer for `.qcase` files.
//
//   case "stop-sign" {
//     target { p_target = 0.002  confidence = 0.9999 }
//     scope { p_oos = 0.0005  source = expert "fleet data" }
//     testing { samples = 100000  failures = 130 }
//     detection srf { observed = 85 of 200 }
//     detection oos { p_detect = 0.495  source = expert "GPS geofence" }
//     labels { rate = 0.001 }
//     assume "dataset-unseen"
//   }
//
// Grammar (one-token lookahead; `#` comments run to end of line):
//
//   file      := case EOF
//   case      := "case" STRING "{" (block | "mission_time" "=" NUMBER)* "}"
//   block     := target | scope | testing | detection | labels | assume
//   target    := "target" "{" kv* "}"
//   scope     := "scope" "{" (kv | profile)* "}"
//   profile   := "profile" "{" (NUMBER "->" NUMBER)+ "}"
//   testing   := "testing" "{" kv* "}"
//   detection := "detection" ("srf" | "oos") "{" (kv | observed)* "}"
//   observed  := "observed" "=" INTEGER "of" INTEGER
//   labels    := "labels" "{" (kv | audit)* "}"
//   audit     := "audit" "=" INTEGER "of" INTEGER
//   assume    := "assume" STRING
//   kv        := IDENT "=" (NUMBER | INTEGER | ("expert" | "data") STRING)

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qsafe/evidence.hpp"

namespace qsafe::dsl {

enum class TokenKind { Ident, Keyword, Number, Integer, String, LBrace, RBrace, Equals, Of, Arrow, Eof, Invalid };

[[nodiscard]] std::string_view to_string(TokenKind kind) noexcept;

struct Token {
    TokenKind kind = TokenKind::Eof;
    /// Raw text for identifiers, keywords and numbers; decoded contents for strings.
    std::string lexeme;
    std::size_t line = 1;
    std::size_t col = 1;
    double number = 0.0;
    Count integer = 0;
};

struct ParseError {
    std::size_t line = 1;
    std::size_t col = 1;
    std::string message;
    std::vector<TokenKind> expected;
    TokenKind found = TokenKind::Eof;
    /// "E_LEX", "E_SYNTAX", or a semantic code such as "E_COUNT_ORDER".
    std::string code = "E_SYNTAX";
};

/// "line 3, col 14: [E_SYNTAX] ... (expected Integer, found Number)"
[[nodiscard]] std::string format_error(const ParseError& error);

struct LexResult {
    std::vector<Token> tokens; // always ends with Eof unless `error` is set
    std::optional<ParseError> error;
};

[[nodiscard]] LexResult lex(std::string_view text);

struct ParseOptions {
    /// Replaces the declared mission_time when the scope is a profile.
    std::optional<double> mission_time;
    /// A profile without a mission_time is evaluated at its first point.
    bool default_mission_time = false;
};

struct ParseResult {
    std::optional<CaseBundle> bundle;
    std::vector<ParseError> errors;
    /// Notes about applied options, e.g. a defaulted mission time.
    std::vector<std::string> warnings;

    [[nodiscard]] bool ok() const noexcept { return bundle.has_value(); }
};

/// Parses and validates. On success the bundle has passed validate_bundle.
/// Lexical and syntactic errors stop at the first; semantic errors are all
/// reported, each at the latest source position among the declarations
/// involved (closing brace of the enclosing block for missing ones).
[[nodiscard]] ParseResult parse(std::string_view text, const ParseOptions& options = {});

/// Canonical text: fixed block order, 2-space indent, one entry per line,
/// shortest round-trip numbers.
[[nodiscard]] std::string serialize(const CaseBundle& bundle);

/// Shortest decimal text that reads back to exactly `value`; fixed notation
/// for magnitudes in [1e-7, 1e16).
[[nodiscard]] std::string format_number(double value);

/// Double-quoted with `"` and `\` escaped.
[[nodiscard]] std::string quote(std::string_view text);

} // namespace qsafe::dsl

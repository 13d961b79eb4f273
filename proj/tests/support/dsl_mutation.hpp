#pragma once

// Single-token edits of a lexed file. Tokens are rendered one per line so a
// mutation at token i first changes line i + 1.

#include <algorithm>
#include <array>
#include <random>
#include <string>
#include <vector>

#include "qsafe/case_dsl.hpp"

namespace mutation {

struct Mutant {
    std::string text;
    std::size_t site_line = 1;
};

inline const std::array<std::string, 14> kReplacements = {
    "{", "}", "=", "->", "of", "7", "0.5", "-1", "1e400x", "\"s\"", "case", "samples", "bogus", "@"};

/// Source text of every token except Eof.
inline std::vector<std::string> tokens_of(std::string_view text) {
    using qsafe::dsl::TokenKind;
    const auto lexed = qsafe::dsl::lex(text);
    std::vector<std::string> out;
    for (const auto& t : lexed.tokens) {
        switch (t.kind) {
        case TokenKind::Eof: break;
        case TokenKind::String: out.push_back(qsafe::dsl::quote(t.lexeme)); break;
        case TokenKind::LBrace: out.emplace_back("{"); break;
        case TokenKind::RBrace: out.emplace_back("}"); break;
        case TokenKind::Equals: out.emplace_back("="); break;
        case TokenKind::Arrow: out.emplace_back("->"); break;
        case TokenKind::Of: out.emplace_back("of"); break;
        default: out.push_back(t.lexeme); break;
        }
    }
    return out;
}

inline std::string join(const std::vector<std::string>& tokens) {
    std::string out;
    for (const auto& t : tokens) out += t + "\n";
    return out;
}

inline Mutant replace(std::vector<std::string> tokens, std::size_t i, const std::string& with) {
    tokens[i] = with;
    return {join(tokens), i + 1};
}

inline Mutant remove(std::vector<std::string> tokens, std::size_t i) {
    tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(i));
    return {join(tokens), i + 1};
}

inline Mutant insert(std::vector<std::string> tokens, std::size_t i, const std::string& with) {
    tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(i), with);
    return {join(tokens), i + 1};
}

template <class Rng>
std::string random_bytes(Rng& rng, std::size_t max_length) {
    const auto length = std::uniform_int_distribution<std::size_t>(0, max_length)(rng);
    std::string out(length, '\0');
    for (auto& c : out) c = static_cast<char>(std::uniform_int_distribution<int>(0, 255)(rng));
    return out;
}

template <class Rng>
std::string shuffled(Rng& rng, std::vector<std::string> tokens) {
    const auto swaps = std::uniform_int_distribution<int>(1, 4)(rng);
    std::uniform_int_distribution<std::size_t> pick(0, tokens.size() - 1);
    for (int s = 0; s < swaps; ++s) std::swap(tokens[pick(rng)], tokens[pick(rng)]);
    return join(tokens);
}

} // namespace mutation

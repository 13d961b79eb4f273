#include <algorithm>
#include <map>
#include <set>

#include "qsafe/case_dsl.hpp"

namespace qsafe::dsl {

namespace {

struct Position {
    std::size_t line = 1;
    std::size_t col = 1;

    friend auto operator<=>(const Position&, const Position&) = default;
};

Position position_of(const Token& token) { return {token.line, token.col}; }

// Thrown to abandon the parse at the first lexical or syntactic error.
struct Abort {
    ParseError error;
};

struct SiteKey {
    SiteKind kind;
    std::size_t index;

    friend auto operator<=>(const SiteKey&, const SiteKey&) = default;
};

enum class ValueKind { Number, Integer, Source };

struct Value {
    ValueKind kind = ValueKind::Number;
    double number = 0.0;
    Count integer = 0;
    Provenance provenance = Provenance::Expert;
    std::string text;
    const Token* first = nullptr;
    const Token* last = nullptr;
};

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    ParseResult run(const ParseOptions& options) {
        ParseResult result;
        try {
            parse_case();
        } catch (const Abort& abort) {
            result.errors.push_back(abort.error);
            return result;
        }
        apply(options, result.warnings);
        for (const auto& error : validate_bundle(bundle_)) {
            result.errors.push_back(semantic(error));
        }
        if (result.errors.empty()) result.bundle = std::move(bundle_);
        return result;
    }

private:
    void apply(const ParseOptions& options, std::vector<std::string>& warnings) {
        const ScopeProfile* profile =
            bundle_.scope ? std::get_if<ScopeProfile>(&bundle_.scope->form) : nullptr;
        if (options.mission_time) {
            if (profile == nullptr) {
                warnings.push_back("mission time ignored: scope is not a profile");
                return;
            }
            if (*options.mission_time < 0.0) {
                warnings.push_back("mission time ignored: must be non-negative");
                return;
            }
            bundle_.mission_time = options.mission_time;
            return;
        }
        if (options.default_mission_time && profile != nullptr && !profile->empty() && !bundle_.mission_time) {
            bundle_.mission_time = profile->front().hours;
            warnings.push_back("no mission time given; evaluating the scope profile at its first point (" +
                               format_number(profile->front().hours) + " h)");
        }
    }

    // --- token helpers -----------------------------------------------------

    [[nodiscard]] const Token& peek() const { return tokens_[index_]; }

    const Token& take() {
        const Token& token = tokens_[index_];
        if (token.kind != TokenKind::Eof) ++index_;
        return token;
    }

    [[nodiscard]] bool at_keyword(std::string_view word) const {
        return peek().kind == TokenKind::Keyword && peek().lexeme == word;
    }

    [[noreturn]] void fail(const Token& at, std::string message, std::vector<TokenKind> expected = {},
                           std::string code = "E_SYNTAX") const {
        ParseError error;
        error.line = at.line;
        error.col = at.col;
        error.message = std::move(message);
        error.expected = std::move(expected);
        error.found = at.kind;
        error.code = std::move(code);
        throw Abort{std::move(error)};
    }

    static std::string describe(const Token& token) {
        switch (token.kind) {
        case TokenKind::Eof: return "end of input";
        case TokenKind::String: return "string \"" + token.lexeme + "\"";
        default: return "'" + token.lexeme + "'";
        }
    }

    const Token& expect(TokenKind kind, std::string_view what) {
        if (peek().kind != kind) {
            fail(peek(), "expected " + std::string(what) + ", found " + describe(peek()), {kind});
        }
        return take();
    }

    const Token& expect_keyword(std::string_view word) {
        if (!at_keyword(word)) {
            fail(peek(), "expected keyword '" + std::string(word) + "', found " + describe(peek()),
                 {TokenKind::Keyword});
        }
        return take();
    }

    double expect_number(std::string_view what) {
        const Token& token = peek();
        if (token.kind != TokenKind::Number && token.kind != TokenKind::Integer) {
            fail(token, "expected number for " + std::string(what) + ", found " + describe(token),
                 {TokenKind::Number, TokenKind::Integer});
        }
        return take().number;
    }

    const Token& expect_integer(std::string_view what) {
        const Token& token = peek();
        if (token.kind != TokenKind::Integer) {
            fail(token, "expected non-negative integer for " + std::string(what) + ", found " + describe(token),
                 {TokenKind::Integer});
        }
        return take();
    }

    // --- values -------------------------------------------------------------

    Value parse_value() {
        Value value;
        const Token& token = peek();
        value.first = &token;
        if (token.kind == TokenKind::Number || token.kind == TokenKind::Integer) {
            value.kind = token.kind == TokenKind::Integer ? ValueKind::Integer : ValueKind::Number;
            value.number = token.number;
            value.integer = token.integer;
            value.last = &take();
            return value;
        }
        if (at_keyword("expert") || at_keyword("data")) {
            value.kind = ValueKind::Source;
            value.provenance = take().lexeme == "expert" ? Provenance::Expert : Provenance::Data;
            const Token& text = expect(TokenKind::String, "justification string");
            value.text = text.lexeme;
            value.last = &text;
            return value;
        }
        fail(token, "expected a value, found " + describe(token),
             {TokenKind::Number, TokenKind::Integer, TokenKind::Keyword});
    }

    double number_value(const Value& value, std::string_view key) const {
        if (value.kind == ValueKind::Source) {
            fail(*value.first, "'" + std::string(key) + "' takes a number", {TokenKind::Number, TokenKind::Integer});
        }
        return value.number;
    }

    Count integer_value(const Value& value, std::string_view key) const {
        if (value.kind != ValueKind::Integer) {
            fail(*value.first, "'" + std::string(key) + "' takes a non-negative integer", {TokenKind::Integer});
        }
        return value.integer;
    }

    Probability probability_value(const Value& value, std::string_view key) const {
        const double p = number_value(value, key);
        if (!(p >= 0.0 && p <= 1.0)) {
            fail(*value.first, "'" + std::string(key) + "' must be a probability in [0, 1]", {},
                 "E_PROBABILITY_RANGE");
        }
        return Probability(p);
    }

    void source_value(const Value& value, std::string_view key, Provenance& provenance, std::string& text) const {
        if (value.kind != ValueKind::Source) {
            fail(*value.first, "'" + std::string(key) + "' takes expert \"...\" or data \"...\"",
                 {TokenKind::Keyword});
        }
        provenance = value.provenance;
        text = value.text;
    }

    // --- bookkeeping --------------------------------------------------------

    void mark(SiteKind kind, const Token& token, std::size_t index = 0) {
        sites_[{kind, index}] = position_of(token);
    }

    // Registers a key within a block, rejecting duplicates.
    void claim_key(std::set<std::string>& seen, const Token& key, std::string_view block) {
        if (!seen.insert(key.lexeme).second) {
            fail(key, "duplicate key '" + key.lexeme + "' in " + std::string(block) + " block", {},
                 "E_DUPLICATE_KEY");
        }
    }

    [[noreturn]] void unknown_key(const Token& key, std::string_view block) const {
        fail(key, "unknown key '" + key.lexeme + "' in " + std::string(block) + " block", {}, "E_UNKNOWN_KEY");
    }

    void missing(const Token& close, std::string message) const {
        fail(close, std::move(message), {}, "E_MISSING_KEY");
    }

    ParseError semantic(const SemanticError& error) const {
        Position where = case_end_;
        bool first = true;
        for (const auto& site : error.sites) {
            const auto found = sites_.find({site.kind, site.index});
            const Position pos = found == sites_.end() ? case_end_ : found->second;
            if (first || pos > where) where = pos;
            first = false;
        }
        ParseError out;
        out.line = where.line;
        out.col = where.col;
        out.message = error.message;
        out.code = std::string(to_string(error.code));
        out.found = TokenKind::Invalid;
        return out;
    }

    // --- grammar ------------------------------------------------------------

    void parse_case() {
        expect_keyword("case");
        bundle_.id = expect(TokenKind::String, "case name string").lexeme;
        expect(TokenKind::LBrace, "'{'");
        std::set<std::string> blocks;
        while (peek().kind != TokenKind::RBrace) {
            const Token& head = peek();
            if (head.kind == TokenKind::Ident && head.lexeme == "mission_time") {
                take();
                if (bundle_.mission_time) {
                    fail(head, "duplicate key 'mission_time'", {}, "E_DUPLICATE_KEY");
                }
                expect(TokenKind::Equals, "'='");
                const Token& value = peek();
                const double hours = expect_number("mission_time");
                if (hours < 0.0) fail(value, "mission_time must be non-negative", {}, "E_TIME_RANGE");
                bundle_.mission_time = hours;
                mark(SiteKind::MissionTime, value);
                continue;
            }
            if (head.kind != TokenKind::Keyword) {
                fail(head, "expected a block keyword or '}', found " + describe(head),
                     {TokenKind::Keyword, TokenKind::Ident, TokenKind::RBrace});
            }
            if (head.lexeme == "assume") {
                take();
                bundle_.assumptions.push_back(expect(TokenKind::String, "assumption string").lexeme);
                continue;
            }
            if (head.lexeme == "detection") {
                take();
                parse_detection(blocks);
                continue;
            }
            if (head.lexeme != "target" && head.lexeme != "scope" && head.lexeme != "testing" &&
                head.lexeme != "labels") {
                fail(head, "unexpected keyword '" + head.lexeme + "' in case body",
                     {TokenKind::Keyword, TokenKind::Ident, TokenKind::RBrace});
            }
            if (!blocks.insert(head.lexeme).second) {
                fail(head, "duplicate " + head.lexeme + " block", {}, "E_DUPLICATE_BLOCK");
            }
            take();
            if (head.lexeme == "target") parse_target();
            else if (head.lexeme == "scope") parse_scope();
            else if (head.lexeme == "testing") parse_testing();
            else parse_labels();
        }
        case_end_ = position_of(take());
        if (peek().kind != TokenKind::Eof) {
            fail(peek(), "expected end of input after the case block (one case per file)", {TokenKind::Eof});
        }
    }

    void parse_target() {
        expect(TokenKind::LBrace, "'{'");
        std::set<std::string> seen;
        std::optional<Probability> p_target;
        std::optional<double> confidence;
        while (peek().kind != TokenKind::RBrace) {
            const Token& key = expect(TokenKind::Ident, "key or '}'");
            claim_key(seen, key, "target");
            expect(TokenKind::Equals, "'='");
            const Value value = parse_value();
            if (key.lexeme == "p_target") {
                p_target = probability_value(value, key.lexeme);
                mark(SiteKind::TargetPTarget, *value.last);
            } else if (key.lexeme == "confidence") {
                const double cl = number_value(value, key.lexeme);
                if (!(cl > 0.0 && cl < 1.0)) {
                    fail(*value.first, "'confidence' must lie strictly between 0 and 1", {},
                         "E_CONFIDENCE_RANGE");
                }
                confidence = cl;
                mark(SiteKind::TargetConfidence, *value.last);
            } else {
                unknown_key(key, "target");
            }
        }
        const Token& close = take();
        mark(SiteKind::Target, close);
        if (!p_target) missing(close, "target block is missing 'p_target'");
        if (!confidence) missing(close, "target block is missing 'confidence'");
        bundle_.target = SafetyTarget{*p_target, ConfidenceLevel(*confidence)};
    }

    void parse_scope() {
        expect(TokenKind::LBrace, "'{'");
        std::set<std::string> seen;
        ScopeEvidence scope;
        bool has_form = false;
        while (peek().kind != TokenKind::RBrace) {
            if (at_keyword("profile")) {
                const Token& head = take();
                if (has_form) fail(head, "scope takes either p_oos or a profile, not both", {}, "E_SCOPE_FORM");
                has_form = true;
                scope.form = parse_profile();
                continue;
            }
            const Token& key = expect(TokenKind::Ident, "key, 'profile' or '}'");
            claim_key(seen, key, "scope");
            expect(TokenKind::Equals, "'='");
            const Value value = parse_value();
            if (key.lexeme == "p_oos") {
                if (has_form) fail(key, "scope takes either p_oos or a profile, not both", {}, "E_SCOPE_FORM");
                has_form = true;
                scope.form = probability_value(value, key.lexeme);
                mark(SiteKind::ScopePoint, *value.last);
            } else if (key.lexeme == "source") {
                source_value(value, key.lexeme, scope.provenance, scope.justification);
            } else {
                unknown_key(key, "scope");
            }
        }
        const Token& close = take();
        mark(SiteKind::Scope, close);
        if (!has_form) missing(close, "scope block needs 'p_oos' or a 'profile'");
        bundle_.scope = std::move(scope);
    }

    ScopeProfile parse_profile() {
        expect(TokenKind::LBrace, "'{'");
        ScopeProfile profile;
        do {
            const Token& time_token = peek();
            const double hours = expect_number("profile time");
            if (hours < 0.0) fail(time_token, "profile times must be non-negative", {}, "E_TIME_RANGE");
            expect(TokenKind::Arrow, "'->'");
            const Token& p_token = peek();
            const double p = expect_number("profile probability");
            if (!(p >= 0.0 && p <= 1.0)) {
                fail(p_token, "profile probability must lie in [0, 1]", {}, "E_PROBABILITY_RANGE");
            }
            mark(SiteKind::ScopeProfilePoint, p_token, profile.size());
            profile.push_back({hours, Probability(p)});
        } while (peek().kind != TokenKind::RBrace);
        take();
        return profile;
    }

    void parse_testing() {
        expect(TokenKind::LBrace, "'{'");
        std::set<std::string> seen;
        std::optional<Count> samples;
        std::optional<Count> failures;
        while (peek().kind != TokenKind::RBrace) {
            const Token& key = expect(TokenKind::Ident, "key or '}'");
            claim_key(seen, key, "testing");
            expect(TokenKind::Equals, "'='");
            const Value value = parse_value();
            if (key.lexeme == "samples") {
                samples = integer_value(value, key.lexeme);
                mark(SiteKind::TestingSamples, *value.last);
            } else if (key.lexeme == "failures") {
                failures = integer_value(value, key.lexeme);
                mark(SiteKind::TestingFailures, *value.last);
            } else {
                unknown_key(key, "testing");
            }
        }
        const Token& close = take();
        mark(SiteKind::Testing, close);
        if (!samples) missing(close, "testing block is missing 'samples'");
        if (!failures) missing(close, "testing block is missing 'failures'");
        bundle_.test = TestEvidence{*samples, *failures};
    }

    // Parses "INTEGER of INTEGER" after "observed =" / "audit =".
    std::pair<Count, Count> parse_ratio(std::string_view what, const Token*& last) {
        const Count numerator = expect_integer(what).integer;
        expect(TokenKind::Of, "'of'");
        const Token& total = expect_integer(what);
        last = &total;
        return {numerator, total.integer};
    }

    void parse_detection(std::set<std::string>& blocks) {
        const Token& kind_token = peek();
        if (!at_keyword("srf") && !at_keyword("oos")) {
            fail(kind_token, "expected 'srf' or 'oos' after 'detection', found " + describe(kind_token),
                 {TokenKind::Keyword});
        }
        take();
        const bool srf = kind_token.lexeme == "srf";
        if (!blocks.insert("detection " + kind_token.lexeme).second) {
            fail(kind_token, "duplicate detection " + kind_token.lexeme + " block", {}, "E_DUPLICATE_BLOCK");
        }
        const SiteKind value_site = srf ? SiteKind::DetectSrfValue : SiteKind::DetectOosValue;
        mark(srf ? SiteKind::DetectSrfKind : SiteKind::DetectOosKind, kind_token);

        expect(TokenKind::LBrace, "'{'");
        std::set<std::string> seen;
        DetectionEvidence det;
        det.kind = srf ? DetectionKind::Srf : DetectionKind::Oos;
        bool has_form = false;
        bool has_source = false;
        const auto claim_form = [&](const Token& at) {
            if (has_form) fail(at, "detection takes either p_detect or observed, not both", {}, "E_DETECTION_FORM");
            has_form = true;
        };
        while (peek().kind != TokenKind::RBrace) {
            if (at_keyword("observed")) {
                const Token& head = take();
                claim_form(head);
                expect(TokenKind::Equals, "'='");
                const Token* last = nullptr;
                const auto [detected, total] = parse_ratio("observed", last);
                det.form = DetectionCampaign{detected, total};
                mark(value_site, *last);
                continue;
            }
            const Token& key = expect(TokenKind::Ident, "key, 'observed' or '}'");
            claim_key(seen, key, "detection");
            expect(TokenKind::Equals, "'='");
            const Value value = parse_value();
            if (key.lexeme == "p_detect") {
                claim_form(key);
                det.form = probability_value(value, key.lexeme);
                mark(value_site, *value.last);
            } else if (key.lexeme == "source") {
                source_value(value, key.lexeme, det.provenance, det.justification);
                has_source = true;
            } else {
                unknown_key(key, "detection");
            }
        }
        const Token& close = take();
        mark(srf ? SiteKind::DetectSrf : SiteKind::DetectOos, close);
        if (!has_form) missing(close, "detection block needs 'p_detect' or 'observed'");
        if (!has_source) det.provenance = det.is_campaign() ? Provenance::Data : Provenance::Expert;
        (srf ? bundle_.detect_srf : bundle_.detect_oos) = std::move(det);
    }

    void parse_labels() {
        expect(TokenKind::LBrace, "'{'");
        std::set<std::string> seen;
        std::optional<LabelQuality> labels;
        const auto claim_form = [&](const Token& at) {
            if (labels) fail(at, "labels take either rate or audit, not both", {}, "E_LABELS_FORM");
        };
        while (peek().kind != TokenKind::RBrace) {
            if (at_keyword("audit")) {
                const Token& head = take();
                claim_form(head);
                expect(TokenKind::Equals, "'='");
                const Token* last = nullptr;
                const auto [disagreements, audited] = parse_ratio("audit", last);
                labels = LabelQuality{LabelAudit{disagreements, audited}};
                mark(SiteKind::LabelsValue, *last);
                continue;
            }
            const Token& key = expect(TokenKind::Ident, "key, 'audit' or '}'");
            claim_key(seen, key, "labels");
            expect(TokenKind::Equals, "'='");
            const Value value = parse_value();
            if (key.lexeme == "rate") {
                claim_form(key);
                labels = LabelQuality{probability_value(value, key.lexeme)};
                mark(SiteKind::LabelsValue, *value.last);
            } else {
                unknown_key(key, "labels");
            }
        }
        const Token& close = take();
        mark(SiteKind::Labels, close);
        if (!labels) missing(close, "labels block needs 'rate' or 'audit'");
        bundle_.labels = std::move(labels);
    }

    std::vector<Token> tokens_;
    std::size_t index_ = 0;
    CaseBundle bundle_;
    std::map<SiteKey, Position> sites_;
    Position case_end_;
};

} // namespace

ParseResult parse(std::string_view text, const ParseOptions& options) {
    LexResult lexed = lex(text);
    if (lexed.error) {
        ParseResult result;
        result.errors.push_back(std::move(*lexed.error));
        return result;
    }
    return Parser(std::move(lexed.tokens)).run(options);
}

} // namespace qsafe::dsl

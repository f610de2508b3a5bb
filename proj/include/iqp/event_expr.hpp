#pragma once

// Event expressions over s-set atoms:
//
//   expr := term (('&' | '|') term)*      '&' binds tighter than '|'
//   term := '!' term | '(' expr ')' | atom
//   atom := '(' 't=' INT ',' '{' INT (',' INT)* '}' ')'
//
// Whitespace is insignificant. There is no implicit conjunction.

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "iqp/error.hpp"
#include "iqp/trajectory.hpp"

namespace iqp {

struct EventExpr {
    enum class Kind { Atom, Not, And, Or };

    Kind kind = Kind::Atom;
    // Atom payload. `position` is the offset of the atom in the source text, kept
    // for range diagnostics.
    std::size_t time = 0;
    std::vector<std::size_t> labels;
    std::size_t position = 0;
    std::size_t time_position = 0;
    std::vector<std::size_t> label_positions;
    std::vector<EventExpr> children;

    static EventExpr atom(std::size_t time, std::vector<std::size_t> labels) {
        EventExpr e;
        e.time = time;
        e.labels = std::move(labels);
        e.label_positions.assign(e.labels.size(), 0);
        return e;
    }
    static EventExpr negate(EventExpr operand) {
        EventExpr e;
        e.kind = Kind::Not;
        e.children.push_back(std::move(operand));
        return e;
    }
    static EventExpr binary(Kind kind, EventExpr lhs, EventExpr rhs) {
        EventExpr e;
        e.kind = kind;
        e.children.push_back(std::move(lhs));
        e.children.push_back(std::move(rhs));
        return e;
    }
};

namespace detail {

class ExprParser {
public:
    explicit ExprParser(std::string_view src) : src_(src) {}

    EventExpr parse() {
        EventExpr e = parse_or();
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
        return e;
    }

    EventExpr parse_atom_only() {
        skip_ws();
        const std::size_t start = pos_;
        expect('(');
        EventExpr e = parse_atom_body(start);
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
        return e;
    }

private:
    EventExpr parse_or() {
        EventExpr lhs = parse_and();
        while (peek() == '|') {
            ++pos_;
            lhs = EventExpr::binary(EventExpr::Kind::Or, std::move(lhs), parse_and());
        }
        return lhs;
    }

    EventExpr parse_and() {
        EventExpr lhs = parse_term();
        while (peek() == '&') {
            ++pos_;
            lhs = EventExpr::binary(EventExpr::Kind::And, std::move(lhs), parse_term());
        }
        return lhs;
    }

    EventExpr parse_term() {
        const char c = peek();
        if (c == '!') {
            ++pos_;
            return EventExpr::negate(parse_term());
        }
        if (c == '(') {
            const std::size_t start = pos_;
            ++pos_;
            if (peek() == 't') return parse_atom_body(start);
            EventExpr inner = parse_or();
            expect(')');
            return inner;
        }
        if (c == '\0') fail("unexpected end of expression");
        fail("expected '!', '(' or an s-set atom, found '" + std::string(1, c) + "'");
    }

    // Called with the opening '(' already consumed.
    EventExpr parse_atom_body(std::size_t start) {
        EventExpr e;
        e.position = start;
        expect('t');
        expect('=');
        skip_ws();
        e.time_position = pos_;
        e.time = parse_int();
        expect(',');
        expect('{');
        skip_ws();
        e.label_positions.push_back(pos_);
        e.labels.push_back(parse_int());
        while (peek() == ',') {
            ++pos_;
            skip_ws();
            e.label_positions.push_back(pos_);
            e.labels.push_back(parse_int());
        }
        expect('}');
        expect(')');
        return e;
    }

    std::size_t parse_int() {
        skip_ws();
        const std::size_t start = pos_;
        std::size_t value = 0;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
            value = value * 10 + static_cast<std::size_t>(src_[pos_] - '0');
            if (value > 1'000'000'000) fail("integer too large");
            ++pos_;
        }
        if (pos_ == start) fail("expected an integer");
        return value;
    }

    void expect(char c) {
        if (peek() != c) {
            if (pos_ >= src_.size()) fail(std::string("expected '") + c + "', found end of expression");
            fail(std::string("expected '") + c + "', found '" + src_[pos_] + "'");
        }
        ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError("syntax error: " + msg, pos_); }

    std::string_view src_;
    std::size_t pos_ = 0;
};

inline void print_into(const EventExpr& e, std::string& out, bool parenthesize_or) {
    switch (e.kind) {
        case EventExpr::Kind::Atom: {
            std::vector<std::size_t> labels = e.labels;
            std::sort(labels.begin(), labels.end());
            labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
            out += "(t=" + std::to_string(e.time) + ",{";
            for (std::size_t i = 0; i < labels.size(); ++i) {
                if (i > 0) out += ',';
                out += std::to_string(labels[i]);
            }
            out += "})";
            return;
        }
        case EventExpr::Kind::Not: {
            out += '!';
            const bool wrap = e.children[0].kind == EventExpr::Kind::And || e.children[0].kind == EventExpr::Kind::Or;
            if (wrap) out += '(';
            print_into(e.children[0], out, false);
            if (wrap) out += ')';
            return;
        }
        case EventExpr::Kind::And:
            print_into(e.children[0], out, true);
            out += " & ";
            print_into(e.children[1], out, true);
            return;
        case EventExpr::Kind::Or:
            if (parenthesize_or) out += '(';
            print_into(e.children[0], out, false);
            out += " | ";
            print_into(e.children[1], out, false);
            if (parenthesize_or) out += ')';
            return;
    }
}

inline std::string token_at(std::string_view src, std::size_t pos) {
    std::size_t end = pos;
    while (end < src.size() && std::isdigit(static_cast<unsigned char>(src[end]))) ++end;
    return std::string(src.substr(pos, end - pos));
}

}  // namespace detail

inline EventExpr parse_event_expr(std::string_view src) { return detail::ExprParser(src).parse(); }

inline std::string to_string(const EventExpr& e) {
    std::string out;
    detail::print_into(e, out, false);
    return out;
}

// Checks every atom against the space; `src` (when given) supplies the offending
// token for the message.
inline void validate(const EventExpr& e, const TrajectorySpace& space, std::string_view src = {}) {
    if (e.kind != EventExpr::Kind::Atom) {
        for (const auto& c : e.children) validate(c, space, src);
        return;
    }
    if (e.time >= space.num_times()) {
        const std::string token = src.empty() ? std::to_string(e.time) : detail::token_at(src, e.time_position);
        throw ParseError("time index '" + token + "' out of range 0.." + std::to_string(space.num_times() - 1),
                         e.time_position);
    }
    for (std::size_t i = 0; i < e.labels.size(); ++i) {
        if (e.labels[i] >= space.num_labels()) {
            const std::string token =
                src.empty() ? std::to_string(e.labels[i]) : detail::token_at(src, e.label_positions[i]);
            throw ParseError("label '" + token + "' out of range 0.." + std::to_string(space.num_labels() - 1),
                             e.label_positions[i]);
        }
    }
}

inline Event evaluate(const EventExpr& e, const TrajectorySpace& space) {
    switch (e.kind) {
        case EventExpr::Kind::Atom:
            return sset_event(space, SSet{e.time, Region::of(space.num_labels(), e.labels)});
        case EventExpr::Kind::Not: return !evaluate(e.children[0], space);
        case EventExpr::Kind::And: return evaluate(e.children[0], space) & evaluate(e.children[1], space);
        case EventExpr::Kind::Or: return evaluate(e.children[0], space) | evaluate(e.children[1], space);
    }
    throw InvalidArgument("trajectory-events", "corrupt expression tree");
}

inline Event parse_event(std::string_view src, const TrajectorySpace& space) {
    const EventExpr e = parse_event_expr(src);
    validate(e, space, src);
    return evaluate(e, space);
}

// Parses a lone atom "(t=<idx>,{<labels>})" into an s-set.
inline SSet parse_sset(std::string_view src, std::size_t num_labels, std::size_t num_times) {
    const EventExpr e = detail::ExprParser(src).parse_atom_only();
    validate(e, TrajectorySpace(num_labels, num_times, ~std::size_t{0}), src);
    return SSet{e.time, Region::of(num_labels, e.labels)};
}

// Expression text denoting the s-set's event. An empty region has no atom form,
// so it is written as a contradiction.
inline std::string sset_text(const SSet& s) {
    if (s.region.empty()) {
        const std::string a = "(t=" + std::to_string(s.time) + ",{0})";
        return a + " & !" + a;
    }
    return to_string(EventExpr::atom(s.time, s.region.labels()));
}

}  // namespace iqp

#pragma once

// Small TOML reader covering the subset used by run configs: comments,
// [tables], [[arrays of tables]], bare keys, strings, numbers, booleans,
// arrays, and inline tables. Dates, dotted keys, and multi-line strings are
// out of scope; configs needing them should use JSON instead.

#include <cctype>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace vortexlab {
namespace toml {

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

struct Cursor {
    const std::string& s;
    std::size_t pos = 0;
    int line = 1;

    bool done() const { return pos >= s.size(); }
    char peek() const { return done() ? '\0' : s[pos]; }
    char get() {
        const char c = s[pos++];
        if (c == '\n') ++line;
        return c;
    }
    void skip_ws() {
        while (!done() && (peek() == ' ' || peek() == '\t')) ++pos;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("toml line " + std::to_string(line) + ": " + msg);
    }
};

inline bool bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

inline std::string parse_key(Cursor& c) {
    c.skip_ws();
    if (c.peek() == '"') {
        c.get();
        std::string k;
        while (!c.done() && c.peek() != '"') k.push_back(c.get());
        if (c.done()) c.fail("unterminated quoted key");
        c.get();
        return k;
    }
    std::string k;
    while (!c.done() && bare_key_char(c.peek())) k.push_back(c.get());
    if (k.empty()) c.fail("expected a key");
    return k;
}

inline nlohmann::json parse_value(Cursor& c);

inline nlohmann::json parse_string(Cursor& c) {
    c.get();  // opening quote
    std::string out;
    while (true) {
        if (c.done()) c.fail("unterminated string");
        char ch = c.get();
        if (ch == '"') break;
        if (ch == '\\') {
            if (c.done()) c.fail("dangling escape");
            const char e = c.get();
            switch (e) {
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case 'r': out.push_back('\r'); break;
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                default: c.fail(std::string("unsupported escape \\") + e);
            }
        } else {
            out.push_back(ch);
        }
    }
    return out;
}

inline nlohmann::json parse_number_or_bool(Cursor& c) {
    std::string tok;
    while (!c.done()) {
        const char ch = c.peek();
        if (ch == ',' || ch == ']' || ch == '}' || ch == '#' || ch == '\n' || ch == ' ' ||
            ch == '\t' || ch == '\r')
            break;
        tok.push_back(c.get());
    }
    if (tok == "true") return true;
    if (tok == "false") return false;
    if (tok.empty()) c.fail("expected a value");
    // TOML allows underscores in numbers
    std::string num;
    for (char ch : tok)
        if (ch != '_') num.push_back(ch);
    const bool is_float = num.find_first_of(".eE") != std::string::npos || num == "inf" ||
                          num == "-inf" || num == "+inf";
    try {
        std::size_t used = 0;
        if (is_float) {
            const double v = std::stod(num, &used);
            if (used != num.size()) throw std::invalid_argument(num);
            return v;
        }
        const long long v = std::stoll(num, &used);
        if (used != num.size()) throw std::invalid_argument(num);
        return v;
    } catch (const std::exception&) {
        c.fail("cannot parse value '" + tok + "'");
    }
}

inline nlohmann::json parse_array(Cursor& c) {
    c.get();  // '['
    nlohmann::json arr = nlohmann::json::array();
    while (true) {
        c.skip_ws();
        while (c.peek() == '\n' || c.peek() == '\r' || c.peek() == '#') {
            if (c.peek() == '#')
                while (!c.done() && c.peek() != '\n') c.get();
            else
                c.get();
            c.skip_ws();
        }
        if (c.done()) c.fail("unterminated array");
        if (c.peek() == ']') {
            c.get();
            return arr;
        }
        arr.push_back(parse_value(c));
        c.skip_ws();
        if (c.peek() == ',') {
            c.get();
            continue;
        }
    }
}

inline nlohmann::json parse_inline_table(Cursor& c) {
    c.get();  // '{'
    nlohmann::json obj = nlohmann::json::object();
    c.skip_ws();
    if (c.peek() == '}') {
        c.get();
        return obj;
    }
    while (true) {
        const std::string key = parse_key(c);
        c.skip_ws();
        if (c.peek() != '=') c.fail("expected '=' in inline table");
        c.get();
        c.skip_ws();
        obj[key] = parse_value(c);
        c.skip_ws();
        if (c.peek() == ',') {
            c.get();
            continue;
        }
        if (c.peek() == '}') {
            c.get();
            return obj;
        }
        c.fail("expected ',' or '}' in inline table");
    }
}

inline nlohmann::json parse_value(Cursor& c) {
    c.skip_ws();
    const char ch = c.peek();
    if (ch == '"') return parse_string(c);
    if (ch == '[') return parse_array(c);
    if (ch == '{') return parse_inline_table(c);
    return parse_number_or_bool(c);
}

inline void expect_line_end(Cursor& c) {
    c.skip_ws();
    if (c.peek() == '#')
        while (!c.done() && c.peek() != '\n') c.get();
    if (!c.done() && c.peek() == '\r') c.get();
    if (!c.done() && c.peek() != '\n') c.fail("trailing characters after value");
    if (!c.done()) c.get();
}

}  // namespace detail

inline nlohmann::json parse(const std::string& text) {
    detail::Cursor c{text};
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* target = &root;

    while (!c.done()) {
        c.skip_ws();
        if (c.done()) break;
        const char ch = c.peek();
        if (ch == '\n' || ch == '\r') {
            c.get();
            continue;
        }
        if (ch == '#') {
            while (!c.done() && c.peek() != '\n') c.get();
            continue;
        }
        if (ch == '[') {
            c.get();
            const bool array_table = c.peek() == '[';
            if (array_table) c.get();
            const std::string name = detail::parse_key(c);
            c.skip_ws();
            if (c.peek() != ']') c.fail("expected ']' closing table header");
            c.get();
            if (array_table) {
                if (c.peek() != ']') c.fail("expected ']]' closing array table header");
                c.get();
                if (!root.contains(name)) root[name] = nlohmann::json::array();
                root[name].push_back(nlohmann::json::object());
                target = &root[name].back();
            } else {
                if (!root.contains(name)) root[name] = nlohmann::json::object();
                target = &root[name];
            }
            detail::expect_line_end(c);
            continue;
        }
        const std::string key = detail::parse_key(c);
        c.skip_ws();
        if (c.peek() != '=') c.fail("expected '=' after key '" + key + "'");
        c.get();
        c.skip_ws();
        (*target)[key] = detail::parse_value(c);
        detail::expect_line_end(c);
    }
    return root;
}

}  // namespace toml
}  // namespace vortexlab

#include "blendforge/config.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

#include "blendforge/errors.hpp"
#include "blendforge/util.hpp"

namespace blendforge {

namespace {

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
    throw ParseError(origin + ":" + std::to_string(line) + ": " + msg);
}

// Cuts a trailing comment, respecting quoted strings.
std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

std::string parse_string_literal(const std::string& raw, const std::string& origin, int line_no) {
    if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"')
        fail(origin, line_no, "expected a quoted string: " + raw);
    std::string out;
    for (size_t i = 1; i + 1 < raw.size(); ++i) {
        if (raw[i] == '\\' && i + 2 < raw.size()) {
            ++i;
            switch (raw[i]) {
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                default: fail(origin, line_no, "unsupported escape in string");
            }
        } else {
            out.push_back(raw[i]);
        }
    }
    return out;
}

bool looks_like_integer(const std::string& s) {
    size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

ConfigFile::Value parse_scalar(const std::string& raw, const std::string& origin, int line_no) {
    if (raw == "true") return true;
    if (raw == "false") return false;
    if (!raw.empty() && raw.front() == '"') return parse_string_literal(raw, origin, line_no);
    if (looks_like_integer(raw)) {
        std::int64_t v = 0;
        const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
        if (ec == std::errc{} && ptr == raw.data() + raw.size()) return v;
    }
    try {
        size_t consumed = 0;
        const double v = std::stod(raw, &consumed);
        if (consumed == raw.size()) return v;
    } catch (...) {
    }
    fail(origin, line_no, "cannot parse value: " + raw);
}

ConfigFile::Value parse_array(const std::string& raw, const std::string& origin, int line_no) {
    // Split on commas outside strings.
    std::vector<std::string> items;
    std::string current;
    bool in_string = false;
    for (size_t i = 1; i + 1 < raw.size(); ++i) {
        const char c = raw[i];
        if (c == '"' && raw[i - 1] != '\\') in_string = !in_string;
        if (c == ',' && !in_string) {
            items.push_back(trim(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!trim(current).empty()) items.push_back(trim(current));

    if (items.empty()) return std::vector<double>{};
    if (items[0].front() == '"') {
        std::vector<std::string> out;
        for (const auto& item : items) out.push_back(parse_string_literal(item, origin, line_no));
        return out;
    }
    std::vector<double> out;
    for (const auto& item : items) {
        const auto v = parse_scalar(item, origin, line_no);
        if (const auto* d = std::get_if<double>(&v))
            out.push_back(*d);
        else if (const auto* i = std::get_if<std::int64_t>(&v))
            out.push_back(static_cast<double>(*i));
        else
            fail(origin, line_no, "arrays must hold numbers or strings");
    }
    return out;
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text, const std::string& origin) {
    ConfigFile config;
    std::istringstream stream(text);
    std::string raw_line;
    std::string prefix;
    int line_no = 0;
    while (std::getline(stream, raw_line)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw_line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(origin, line_no, "unterminated table header");
            prefix = trim(line.substr(1, line.size() - 2));
            if (prefix.empty()) fail(origin, line_no, "empty table header");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(origin, line_no, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) fail(origin, line_no, "expected key = value");
        const std::string full_key = prefix.empty() ? key : prefix + "." + key;
        if (value.front() == '[')
            config.values_[full_key] = parse_array(value, origin, line_no);
        else
            config.values_[full_key] = parse_scalar(value, origin, line_no);
    }
    return config;
}

ConfigFile ConfigFile::load(const std::string& path) {
    return parse(read_text_file(path), path);
}

std::optional<std::string> ConfigFile::get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
    throw ParseError("config key '" + key + "' is not a string");
}

std::optional<double> ConfigFile::get_number(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (const auto* d = std::get_if<double>(&it->second)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&it->second)) return static_cast<double>(*i);
    throw ParseError("config key '" + key + "' is not a number");
}

std::optional<std::int64_t> ConfigFile::get_integer(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (const auto* i = std::get_if<std::int64_t>(&it->second)) return *i;
    throw ParseError("config key '" + key + "' is not an integer");
}

std::optional<bool> ConfigFile::get_bool(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (const auto* b = std::get_if<bool>(&it->second)) return *b;
    throw ParseError("config key '" + key + "' is not a boolean");
}

std::optional<std::vector<double>> ConfigFile::get_number_list(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (const auto* v = std::get_if<std::vector<double>>(&it->second)) return *v;
    throw ParseError("config key '" + key + "' is not a number array");
}

}  // namespace blendforge

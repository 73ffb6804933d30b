#include "sentinel/config_file.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "sentinel/errors.hpp"

namespace sentinel::config {

const std::vector<Table> Table::kEmptyArray{};

Value Value::string(std::string v) {
    Value out;
    out.kind_ = Kind::String;
    out.str_ = std::move(v);
    return out;
}

Value Value::integer(std::int64_t v) {
    Value out;
    out.kind_ = Kind::Integer;
    out.int_ = v;
    return out;
}

Value Value::floating(double v) {
    Value out;
    out.kind_ = Kind::Float;
    out.float_ = v;
    return out;
}

Value Value::boolean(bool v) {
    Value out;
    out.kind_ = Kind::Boolean;
    out.bool_ = v;
    return out;
}

Value Value::array(std::vector<Value> v) {
    Value out;
    out.kind_ = Kind::Array;
    out.array_ = std::move(v);
    return out;
}

namespace {

const char* kind_name(Value::Kind kind) {
    switch (kind) {
        case Value::Kind::String: return "string";
        case Value::Kind::Integer: return "integer";
        case Value::Kind::Float: return "float";
        case Value::Kind::Boolean: return "boolean";
        case Value::Kind::Array: return "array";
    }
    return "?";
}

[[noreturn]] void kind_error(Value::Kind actual, const char* wanted) {
    throw ConfigError(std::string("value is a ") + kind_name(actual) +
                      ", expected " + wanted);
}

} // namespace

const std::string& Value::as_string() const {
    if (kind_ != Kind::String) kind_error(kind_, "string");
    return str_;
}

std::int64_t Value::as_i64() const {
    if (kind_ != Kind::Integer) kind_error(kind_, "integer");
    return int_;
}

std::uint64_t Value::as_u64() const {
    const std::int64_t v = as_i64();
    if (v < 0) throw ConfigError("value must be non-negative");
    return static_cast<std::uint64_t>(v);
}

double Value::as_f64() const {
    if (kind_ == Kind::Integer) return static_cast<double>(int_);
    if (kind_ != Kind::Float) kind_error(kind_, "number");
    return float_;
}

bool Value::as_bool() const {
    if (kind_ != Kind::Boolean) kind_error(kind_, "boolean");
    return bool_;
}

const std::vector<Value>& Value::as_array() const {
    if (kind_ != Kind::Array) kind_error(kind_, "array");
    return array_;
}

bool Table::has(const std::string& key) const { return values_.count(key) != 0; }

const Value& Table::at(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) {
        throw ConfigError("missing key '" + key + "' in " + path_);
    }
    return it->second;
}

namespace {

// Re-wraps type errors so they carry the key and table they came from.
template <typename Fn>
auto keyed(const Table& table, const std::string& key, Fn fn)
    -> decltype(fn()) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError("key '" + key + "' in " + table.path() + ": " +
                          e.what());
    }
}

} // namespace

std::string Table::get_string(const std::string& key) const {
    const Value& v = at(key);
    return keyed(*this, key, [&] { return v.as_string(); });
}

std::int64_t Table::get_i64(const std::string& key) const {
    const Value& v = at(key);
    return keyed(*this, key, [&] { return v.as_i64(); });
}

std::uint64_t Table::get_u64(const std::string& key) const {
    const Value& v = at(key);
    return keyed(*this, key, [&] { return v.as_u64(); });
}

double Table::get_f64(const std::string& key) const {
    const Value& v = at(key);
    return keyed(*this, key, [&] { return v.as_f64(); });
}

bool Table::get_bool(const std::string& key) const {
    const Value& v = at(key);
    return keyed(*this, key, [&] { return v.as_bool(); });
}

std::string Table::get_string_or(const std::string& key,
                                 std::string fallback) const {
    return has(key) ? get_string(key) : std::move(fallback);
}

std::int64_t Table::get_i64_or(const std::string& key,
                               std::int64_t fallback) const {
    return has(key) ? get_i64(key) : fallback;
}

std::uint64_t Table::get_u64_or(const std::string& key,
                                std::uint64_t fallback) const {
    return has(key) ? get_u64(key) : fallback;
}

double Table::get_f64_or(const std::string& key, double fallback) const {
    return has(key) ? get_f64(key) : fallback;
}

bool Table::get_bool_or(const std::string& key, bool fallback) const {
    return has(key) ? get_bool(key) : fallback;
}

std::vector<std::string> Table::get_string_array_or(
    const std::string& key) const {
    std::vector<std::string> out;
    if (!has(key)) return out;
    const Value& v = at(key);
    return keyed(*this, key, [&] {
        std::vector<std::string> items;
        for (const Value& item : v.as_array()) {
            items.push_back(item.as_string());
        }
        return items;
    });
}

bool Table::has_table(const std::string& name) const {
    return tables_.count(name) != 0;
}

const Table& Table::table(const std::string& name) const {
    auto it = tables_.find(name);
    if (it == tables_.end()) {
        throw ConfigError("missing table [" + name + "] in " + path_);
    }
    return it->second;
}

const std::vector<Table>& Table::table_array(const std::string& name) const {
    auto it = table_arrays_.find(name);
    return it == table_arrays_.end() ? kEmptyArray : it->second;
}

void Table::set(const std::string& key, Value value) {
    values_.insert_or_assign(key, std::move(value));
}

Table& Table::open_table(const std::string& name) {
    auto it = tables_.find(name);
    if (it != tables_.end()) return it->second;
    std::string child_path = path_ == "(root)" ? "[" + name + "]"
                                               : path_ + "." + name;
    return tables_.emplace(name, Table(std::move(child_path))).first->second;
}

Table& Table::append_table(const std::string& name) {
    auto& arr = table_arrays_[name];
    std::string child_path = "[[" + name + "]][" + std::to_string(arr.size()) +
                             "]";
    arr.emplace_back(std::move(child_path));
    return arr.back();
}

namespace {

struct Parser {
    const std::string& source;
    std::size_t line_no = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError(source + ":" + std::to_string(line_no) + ": " + msg);
    }

    static bool is_key_char(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
               (c >= '0' && c <= '9') || c == '_' || c == '-';
    }

    std::string_view strip(std::string_view s) const {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
            s.remove_prefix(1);
        }
        while (!s.empty() &&
               (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
            s.remove_suffix(1);
        }
        return s;
    }

    // Removes a trailing comment, respecting string quoting.
    std::string_view strip_comment(std::string_view s) const {
        bool in_string = false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (in_string) {
                if (s[i] == '\\') {
                    ++i;
                } else if (s[i] == '"') {
                    in_string = false;
                }
            } else if (s[i] == '"') {
                in_string = true;
            } else if (s[i] == '#') {
                return s.substr(0, i);
            }
        }
        if (in_string) fail("unterminated string");
        return s;
    }

    std::vector<std::string> parse_table_path(std::string_view inner) const {
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (true) {
            std::size_t dot = inner.find('.', start);
            std::string_view part = strip(
                dot == std::string_view::npos ? inner.substr(start)
                                              : inner.substr(start, dot - start));
            if (part.empty()) fail("empty table name component");
            for (char c : part) {
                if (!is_key_char(c)) {
                    fail(std::string("invalid character '") + c +
                         "' in table name");
                }
            }
            parts.emplace_back(part);
            if (dot == std::string_view::npos) break;
            start = dot + 1;
        }
        return parts;
    }

    std::string parse_basic_string(std::string_view text,
                                   std::size_t& pos) const {
        // text[pos] == '"'
        std::string out;
        for (++pos; pos < text.size(); ++pos) {
            const char c = text[pos];
            if (c == '"') {
                ++pos;
                return out;
            }
            if (c == '\\') {
                ++pos;
                if (pos >= text.size()) fail("dangling escape");
                switch (text[pos]) {
                    case '"': out.push_back('"'); break;
                    case '\\': out.push_back('\\'); break;
                    case 'n': out.push_back('\n'); break;
                    case 't': out.push_back('\t'); break;
                    default: fail(std::string("unsupported escape '\\") +
                                  text[pos] + "'");
                }
            } else {
                out.push_back(c);
            }
        }
        fail("unterminated string");
    }

    Value parse_scalar(std::string_view text) const {
        if (text == "true") return Value::boolean(true);
        if (text == "false") return Value::boolean(false);
        const bool looks_float =
            text.find('.') != std::string_view::npos ||
            text.find('e') != std::string_view::npos ||
            text.find('E') != std::string_view::npos ||
            text == "inf" || text == "-inf" || text == "nan";
        if (!looks_float) {
            std::int64_t iv = 0;
            auto [ptr, ec] =
                std::from_chars(text.data(), text.data() + text.size(), iv);
            if (ec == std::errc{} && ptr == text.data() + text.size()) {
                return Value::integer(iv);
            }
        }
        double fv = 0.0;
        auto [ptr, ec] =
            std::from_chars(text.data(), text.data() + text.size(), fv);
        if (ec == std::errc{} && ptr == text.data() + text.size()) {
            return Value::floating(fv);
        }
        fail("cannot parse value '" + std::string(text) + "'");
    }

    Value parse_value(std::string_view text, std::size_t& pos) const {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) {
            ++pos;
        }
        if (pos >= text.size()) fail("missing value");
        if (text[pos] == '"') {
            return Value::string(parse_basic_string(text, pos));
        }
        if (text[pos] == '[') {
            ++pos;
            std::vector<Value> items;
            while (true) {
                while (pos < text.size() &&
                       (text[pos] == ' ' || text[pos] == '\t')) {
                    ++pos;
                }
                if (pos >= text.size()) fail("unterminated array");
                if (text[pos] == ']') {
                    ++pos;
                    return Value::array(std::move(items));
                }
                items.push_back(parse_value(text, pos));
                while (pos < text.size() &&
                       (text[pos] == ' ' || text[pos] == '\t')) {
                    ++pos;
                }
                if (pos < text.size() && text[pos] == ',') {
                    ++pos;
                } else if (pos >= text.size() || text[pos] != ']') {
                    fail("expected ',' or ']' in array");
                }
            }
        }
        std::size_t end = pos;
        while (end < text.size() && text[end] != ',' && text[end] != ']') {
            ++end;
        }
        std::string_view token = strip(text.substr(pos, end - pos));
        pos = end;
        return parse_scalar(token);
    }
};

} // namespace

Table parse_string(const std::string& text, const std::string& source_name) {
    Table root;
    Table* current = &root;
    Parser parser{source_name};

    std::istringstream stream(text);
    std::string raw_line;
    while (std::getline(stream, raw_line)) {
        ++parser.line_no;
        std::string_view line =
            parser.strip(parser.strip_comment(parser.strip(raw_line)));
        if (line.empty()) continue;

        if (line.front() == '[') {
            const bool is_array = line.size() > 1 && line[1] == '[';
            const std::string_view closer = is_array ? "]]" : "]";
            if (!line.ends_with(closer)) {
                parser.fail("malformed table header");
            }
            std::string_view inner = line.substr(
                is_array ? 2 : 1, line.size() - 2 * (is_array ? 2 : 1));
            std::vector<std::string> parts = parser.parse_table_path(inner);
            Table* cursor = &root;
            for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
                cursor = &cursor->open_table(parts[i]);
            }
            current = is_array ? &cursor->append_table(parts.back())
                               : &cursor->open_table(parts.back());
            continue;
        }

        std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            parser.fail("expected 'key = value'");
        }
        std::string_view key = parser.strip(line.substr(0, eq));
        if (key.empty()) parser.fail("empty key");
        for (char c : key) {
            if (!Parser::is_key_char(c)) {
                parser.fail(std::string("invalid character '") + c + "' in key");
            }
        }
        if (current->has(std::string(key))) {
            parser.fail("duplicate key '" + std::string(key) + "'");
        }
        std::string_view rest = line.substr(eq + 1);
        std::size_t pos = 0;
        Value value = parser.parse_value(rest, pos);
        std::string_view tail = parser.strip(rest.substr(pos));
        if (!tail.empty()) {
            parser.fail("trailing content '" + std::string(tail) + "'");
        }
        current->set(std::string(key), std::move(value));
    }
    return root;
}

Table parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_string(buffer.str(), path.string());
}

} // namespace sentinel::config

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace sentinel::config {

// TOML-subset document tree: tables, arrays of tables, and scalar or array
// values. Supported value syntax: "strings" (with \\ \" \n \t escapes),
// integers, floats, true/false, and flat [a, b, c] arrays. No inline
// tables, no multiline strings, no dates.
class Value {
public:
    enum class Kind { String, Integer, Float, Boolean, Array };

    static Value string(std::string v);
    static Value integer(std::int64_t v);
    static Value floating(double v);
    static Value boolean(bool v);
    static Value array(std::vector<Value> v);

    Kind kind() const { return kind_; }

    // Typed extraction; wrong kind throws ConfigError naming the key the
    // table accessor looked up.
    const std::string& as_string() const;
    std::int64_t as_i64() const;
    std::uint64_t as_u64() const;
    double as_f64() const;  // accepts Integer and Float
    bool as_bool() const;
    const std::vector<Value>& as_array() const;

private:
    Kind kind_ = Kind::Integer;
    std::string str_;
    std::int64_t int_ = 0;
    double float_ = 0.0;
    bool bool_ = false;
    std::vector<Value> array_;
};

class Table {
public:
    explicit Table(std::string path = "(root)") : path_(std::move(path)) {}

    const std::string& path() const { return path_; }

    bool has(const std::string& key) const;
    const Value& at(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    std::int64_t get_i64(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    double get_f64(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    std::string get_string_or(const std::string& key, std::string fallback) const;
    std::int64_t get_i64_or(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_u64_or(const std::string& key, std::uint64_t fallback) const;
    double get_f64_or(const std::string& key, double fallback) const;
    bool get_bool_or(const std::string& key, bool fallback) const;
    std::vector<std::string> get_string_array_or(const std::string& key) const;

    bool has_table(const std::string& name) const;
    const Table& table(const std::string& name) const;

    // Empty when the array was never declared.
    const std::vector<Table>& table_array(const std::string& name) const;

    // Mutation, used by the parser and by tests building configs in code.
    void set(const std::string& key, Value value);
    Table& open_table(const std::string& name);
    Table& append_table(const std::string& name);

private:
    std::string path_;
    std::map<std::string, Value> values_;
    std::map<std::string, Table> tables_;
    std::map<std::string, std::vector<Table>> table_arrays_;
    static const std::vector<Table> kEmptyArray;
};

// Errors carry "<source>:<line>: message".
Table parse_string(const std::string& text, const std::string& source_name);
Table parse_file(const std::filesystem::path& path);

} // namespace sentinel::config

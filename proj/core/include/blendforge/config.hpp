#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace blendforge {

/// Minimal TOML reader covering what pipeline configs use: [table.sub]
/// headers, key = value with strings, integers, floats, booleans, and
/// single-line arrays of those, plus # comments. Keys are exposed flattened
/// ("stage.poses.fov_y_deg").
class ConfigFile {
  public:
    using Value = std::variant<std::string, double, std::int64_t, bool, std::vector<double>,
                               std::vector<std::string>>;

    static ConfigFile parse(const std::string& text, const std::string& origin = "<config>");
    static ConfigFile load(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::optional<std::string> get_string(const std::string& key) const;
    std::optional<double> get_number(const std::string& key) const;
    std::optional<std::int64_t> get_integer(const std::string& key) const;
    std::optional<bool> get_bool(const std::string& key) const;
    std::optional<std::vector<double>> get_number_list(const std::string& key) const;

    const std::map<std::string, Value>& values() const { return values_; }

  private:
    std::map<std::string, Value> values_;
};

}  // namespace blendforge

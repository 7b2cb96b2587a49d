#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "lcf2pa/error.hpp"
#include "lcf2pa/table.hpp"

// Strict reading of JSON sections whose numeric keys carry a unit suffix.
namespace lcf2pa::jsonio {

using json = nlohmann::json;

inline json load(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open JSON file: " + path);
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": invalid JSON: " + e.what());
    }
}

/// A field name together with its unit suffix; the JSON key is `name_unit`, or `name`
/// for dimensionless and textual fields.
struct Field {
    std::string name;
    std::string unit;

    [[nodiscard]] std::string key() const { return unit.empty() ? name : name + "_" + unit; }
};

class Section {
public:
    /// Rejects any key that is not a declared field; a key that extends a declared
    /// stem with a different suffix is reported as a unit mismatch.
    Section(const json& obj, std::string path, std::initializer_list<Field> fields)
        : obj_(obj), path_(std::move(path)), fields_(fields)
    {
        if (!obj_.is_object())
            throw ConfigError(path_ + ": expected an object");
        for (const auto& [k, v] : obj_.items()) {
            bool ok = false;
            for (const auto& f : fields_)
                ok = ok || k == f.key();
            if (ok)
                continue;
            for (const auto& f : fields_)
                if (!f.unit.empty() && k.rfind(f.name + "_", 0) == 0)
                    throw ConfigError(where(k) + ": unit suffix does not match; expected '" + f.key() + "'");
            throw ConfigError(where(k) + ": unknown field");
        }
    }

    [[nodiscard]] const std::string& path() const { return path_; }
    [[nodiscard]] std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    [[nodiscard]] bool has(const std::string& key) const { return obj_.contains(key); }

    [[nodiscard]] const json& raw(const std::string& key) const
    {
        if (!obj_.contains(key))
            throw ConfigError(where(key) + ": required field is missing");
        return obj_.at(key);
    }

    [[nodiscard]] double number(const std::string& key) const
    {
        const auto& v = raw(key);
        if (!v.is_number())
            throw ConfigError(where(key) + ": expected a number");
        return v.get<double>();
    }

    [[nodiscard]] double number(const std::string& key, double fallback) const
    {
        return has(key) ? number(key) : fallback;
    }

    [[nodiscard]] std::optional<double> optional_number(const std::string& key) const
    {
        return has(key) ? std::optional<double>(number(key)) : std::nullopt;
    }

    [[nodiscard]] std::string text(const std::string& key) const
    {
        const auto& v = raw(key);
        if (!v.is_string())
            throw ConfigError(where(key) + ": expected a string");
        return v.get<std::string>();
    }

    [[nodiscard]] std::string text(const std::string& key, const std::string& fallback) const
    {
        return has(key) ? text(key) : fallback;
    }

    [[nodiscard]] bool flag(const std::string& key, bool fallback) const
    {
        if (!has(key))
            return fallback;
        const auto& v = raw(key);
        if (!v.is_boolean())
            throw ConfigError(where(key) + ": expected true or false");
        return v.get<bool>();
    }

    /// A number gives a constant; an array of [wavelength_nm, value] pairs gives a table.
    [[nodiscard]] Table table(const std::string& key) const
    {
        const auto& v = raw(key);
        if (v.is_number())
            return Table::constant(v.get<double>());
        if (!v.is_array() || v.empty())
            throw ConfigError(where(key) + ": expected a number or a non-empty list of [wavelength_nm, value] pairs");
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : v) {
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                throw ConfigError(where(key) + ": each entry must be [wavelength_nm, value]");
            pts.emplace_back(p[0].get<double>(), p[1].get<double>());
        }
        try {
            return Table::from_pairs(pts);
        } catch (const Error& e) {
            throw ConfigError(where(key) + ": " + e.what());
        }
    }

    [[nodiscard]] Table table(const std::string& key, const Table& fallback) const
    {
        return has(key) ? table(key) : fallback;
    }

    /// Child section; missing children are reported with their full path.
    [[nodiscard]] Section child(const std::string& key, std::initializer_list<Field> fields) const
    {
        return Section(raw(key), where(key), fields);
    }

    /// Resolves a path field relative to `base` and checks that it exists.
    [[nodiscard]] std::string file(const std::string& key, const std::filesystem::path& base) const
    {
        std::filesystem::path p = text(key);
        if (p.is_relative())
            p = base / p;
        if (!std::filesystem::exists(p))
            throw ConfigError(where(key) + ": file does not exist: " + p.string());
        return p.string();
    }

private:
    const json& obj_;
    std::string path_;
    std::vector<Field> fields_;
};

/// [[x, y], ...] for echoing a table.
inline json table_json(const Table& t)
{
    if (t.is_constant())
        return t.y().front();
    json arr = json::array();
    for (std::size_t i = 0; i < t.size(); ++i)
        arr.push_back({t.x()[i], t.y()[i]});
    return arr;
}

} // namespace lcf2pa::jsonio

#pragma once

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lcf2pa/error.hpp"
#include "lcf2pa/table.hpp"

namespace lcf2pa::csv {

struct Document {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view line)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

inline double to_number(const std::string& field, const std::string& where)
{
    if (field.empty())
        throw DataError(where + ": empty numeric field");
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (end != field.c_str() + field.size())
        throw DataError(where + ": not a number: '" + field + "'");
    return v;
}

/// Lines starting with '#' and blank lines are skipped. When `has_header` is set the
/// first remaining line becomes the header.
inline Document read(const std::string& path, bool has_header = true)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open CSV file: " + path);
    Document doc;
    std::string line;
    bool header_done = !has_header;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#')
            continue;
        if (!header_done) {
            doc.header = split(t);
            header_done = true;
            continue;
        }
        doc.rows.push_back(split(t));
    }
    return doc;
}

/// Reads a two-column numeric table (x, y) with a header row.
inline Table read_table(const std::string& path)
{
    const Document doc = read(path);
    std::vector<double> x, y;
    for (std::size_t r = 0; r < doc.rows.size(); ++r) {
        const auto& row = doc.rows[r];
        const std::string where = path + ":" + std::to_string(r + 2);
        if (row.size() < 2)
            throw DataError(where + ": expected two columns");
        x.push_back(to_number(row[0], where));
        y.push_back(to_number(row[1], where));
    }
    try {
        return Table(std::move(x), std::move(y));
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

/// Writes rows of numbers with full round-trip precision.
class Writer {
public:
    Writer(const std::string& path, const std::vector<std::string>& header) : out_(path), path_(path)
    {
        if (!out_)
            throw DataError("cannot write CSV file: " + path);
        out_.precision(17);
        row_strings(header);
    }

    void row(const std::vector<double>& values)
    {
        for (std::size_t i = 0; i < values.size(); ++i)
            out_ << (i ? "," : "") << values[i];
        out_ << '\n';
    }

    void row_strings(const std::vector<std::string>& values)
    {
        for (std::size_t i = 0; i < values.size(); ++i)
            out_ << (i ? "," : "") << values[i];
        out_ << '\n';
    }

    void close()
    {
        out_.close();
        if (!out_)
            throw DataError("failed writing CSV file: " + path_);
    }

private:
    std::ofstream out_;
    std::string path_;
};

} // namespace lcf2pa::csv

#pragma once

#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "lcf2pa/csv.hpp"
#include "lcf2pa/error.hpp"
#include "lcf2pa/frames.hpp"
#include "lcf2pa/jsonio.hpp"

// Frame series on disk: manifest.json plus one image file per signal/background.
namespace lcf2pa::frames {

namespace fs = std::filesystem;
using jsonio::json;

inline CameraConfig read_camera(const json& obj, const std::string& path)
{
    const jsonio::Section s(obj, path,
                            {{"sensitivity", "e_per_ADU"},
                             {"em_gain", ""},
                             {"integration", "s"},
                             {"superpixel_bin", "px"},
                             {"image_rows", "superpx"},
                             {"image_cols", "superpx"},
                             {"roi", ""},
                             {"baseline", "ADU_per_px"},
                             {"baseline_sigma", "ADU_per_px"},
                             {"dark_rate", "e_per_s_per_px"},
                             {"dark_rate_sigma", "e_per_s_per_px"},
                             {"read_noise", "ADU"}});
    CameraConfig c;
    auto count = [&](const jsonio::Section& sec, const std::string& key, std::size_t fallback) {
        if (!sec.has(key))
            return fallback;
        const double v = sec.number(key);
        if (!(v >= 0.0) || v != std::floor(v))
            throw ConfigError(sec.where(key) + ": expected a non-negative integer");
        return static_cast<std::size_t>(v);
    };
    c.sensitivity_e_per_adu = s.number("sensitivity_e_per_ADU", c.sensitivity_e_per_adu);
    c.em_gain = s.number("em_gain", c.em_gain);
    c.integration_s = s.number("integration_s", c.integration_s);
    c.superpixel_bin = count(s, "superpixel_bin_px", c.superpixel_bin);
    c.image_rows = count(s, "image_rows_superpx", c.image_rows);
    c.image_cols = count(s, "image_cols_superpx", c.image_cols);
    if (s.has("roi")) {
        const auto r = s.child("roi", {{"row0", "superpx"}, {"col0", "superpx"}, {"rows", "superpx"}, {"cols", "superpx"}});
        c.roi.row0 = count(r, "row0_superpx", c.roi.row0);
        c.roi.col0 = count(r, "col0_superpx", c.roi.col0);
        c.roi.rows = count(r, "rows_superpx", c.roi.rows);
        c.roi.cols = count(r, "cols_superpx", c.roi.cols);
    }
    c.baseline_adu_per_pixel = {s.number("baseline_ADU_per_px", c.baseline_adu_per_pixel.value),
                                s.number("baseline_sigma_ADU_per_px", c.baseline_adu_per_pixel.sigma)};
    c.dark_e_per_s_per_pixel = {s.number("dark_rate_e_per_s_per_px", c.dark_e_per_s_per_pixel.value),
                                s.number("dark_rate_sigma_e_per_s_per_px", c.dark_e_per_s_per_pixel.sigma)};
    c.read_noise_adu = s.number("read_noise_ADU", c.read_noise_adu);
    try {
        validate(c);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return c;
}

inline json camera_json(const CameraConfig& c)
{
    return {{"sensitivity_e_per_ADU", c.sensitivity_e_per_adu},
            {"em_gain", c.em_gain},
            {"integration_s", c.integration_s},
            {"superpixel_bin_px", c.superpixel_bin},
            {"image_rows_superpx", c.image_rows},
            {"image_cols_superpx", c.image_cols},
            {"roi",
             {{"row0_superpx", c.roi.row0},
              {"col0_superpx", c.roi.col0},
              {"rows_superpx", c.roi.rows},
              {"cols_superpx", c.roi.cols}}},
            {"baseline_ADU_per_px", c.baseline_adu_per_pixel.value},
            {"baseline_sigma_ADU_per_px", c.baseline_adu_per_pixel.sigma},
            {"dark_rate_e_per_s_per_px", c.dark_e_per_s_per_pixel.value},
            {"dark_rate_sigma_e_per_s_per_px", c.dark_e_per_s_per_pixel.sigma},
            {"read_noise_ADU", c.read_noise_adu}};
}

enum class ImageEncoding { f64, csv };

/// Row-major little-endian float64.
inline void write_image_f64(const Image& img, const fs::path& path)
{
    static_assert(std::endian::native == std::endian::little, "binary images are stored little-endian");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write image: " + path.string());
    out.write(reinterpret_cast<const char*>(img.adu.data()), static_cast<std::streamsize>(img.adu.size() * sizeof(double)));
    if (!out)
        throw DataError("failed writing image: " + path.string());
}

inline Image read_image_f64(const fs::path& path, std::size_t rows, std::size_t cols)
{
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in)
        throw DataError("cannot open image: " + path.string());
    const auto bytes = static_cast<std::size_t>(in.tellg());
    if (bytes != rows * cols * sizeof(double)) {
        std::ostringstream msg;
        msg << path.string() << ": " << bytes << " bytes, expected " << rows * cols * sizeof(double) << " for a " << rows
            << " x " << cols << " float64 image";
        throw DataError(msg.str());
    }
    in.seekg(0);
    Image img(rows, cols);
    in.read(reinterpret_cast<char*>(img.adu.data()), static_cast<std::streamsize>(bytes));
    return img;
}

inline void write_image_csv(const Image& img, const fs::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write image: " + path.string());
    out << std::setprecision(17);
    for (std::size_t r = 0; r < img.rows; ++r) {
        for (std::size_t c = 0; c < img.cols; ++c)
            out << (c ? "," : "") << img.at(r, c);
        out << '\n';
    }
}

inline Image read_image_csv(const fs::path& path, std::size_t rows, std::size_t cols)
{
    const auto doc = csv::read(path.string(), false);
    if (doc.rows.size() != rows)
        throw DataError(path.string() + ": expected " + std::to_string(rows) + " rows");
    Image img(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (doc.rows[r].size() != cols)
            throw DataError(path.string() + ": row " + std::to_string(r + 1) + " does not have " + std::to_string(cols) +
                            " columns");
        for (std::size_t c = 0; c < cols; ++c)
            img.at(r, c) = csv::to_number(doc.rows[r][c], path.string());
    }
    return img;
}

inline Image read_image(const fs::path& path, std::size_t rows, std::size_t cols)
{
    return path.extension() == ".csv" ? read_image_csv(path, rows, cols) : read_image_f64(path, rows, cols);
}

/// Writes images and manifest.json into `dir` (created if needed).
inline void write_series(const FrameSeries& series, const CameraConfig& cam, const fs::path& dir,
                         ImageEncoding enc = ImageEncoding::f64)
{
    fs::create_directories(dir);
    json frames = json::array();
    const char* ext = enc == ImageEncoding::f64 ? ".f64" : ".csv";
    for (std::size_t k = 0; k < series.frames.size(); ++k) {
        const auto& f = series.frames[k];
        char stem[32];
        std::snprintf(stem, sizeof stem, "frame_%06zu", k);
        const std::string sig = std::string(stem) + "_signal" + ext;
        const std::string bg = std::string(stem) + "_background" + ext;
        if (enc == ImageEncoding::f64) {
            write_image_f64(f.signal, dir / sig);
            write_image_f64(f.background, dir / bg);
        } else {
            write_image_csv(f.signal, dir / sig);
            write_image_csv(f.background, dir / bg);
        }
        json entry = {{"signal", sig}, {"background", bg}, {"w_out_W", f.w_out_W}, {"timestamp_s", f.timestamp_s}};
        if (f.cic_injected)
            entry["cic_injected"] = *f.cic_injected;
        frames.push_back(entry);
    }
    json manifest = {{"format", "lcf2pa-frames"},
                     {"version", 1},
                     {"source_kind", propagation::to_string(series.source_kind)},
                     {"camera", camera_json(cam)},
                     {"frames", frames}};
    std::ofstream out(dir / "manifest.json");
    if (!out)
        throw DataError("cannot write manifest in " + dir.string());
    out << manifest.dump(1) << '\n';
}

struct LoadedSeries {
    FrameSeries series;
    CameraConfig camera;
};

inline LoadedSeries read_series(const fs::path& manifest_path)
{
    json m;
    try {
        m = jsonio::load(manifest_path.string());
    } catch (const ConfigError& e) {
        throw DataError(e.what());
    }
    const std::string where = manifest_path.string();
    if (!m.is_object() || !m.contains("frames") || !m["frames"].is_array() || !m.contains("camera"))
        throw DataError(where + ": manifest needs 'camera' and a 'frames' array");
    LoadedSeries out;
    out.camera = read_camera(m["camera"], "camera");
    const std::string kind = m.value("source_kind", "laser");
    if (kind == "laser")
        out.series.source_kind = propagation::SourceKind::laser;
    else if (kind == "spdc")
        out.series.source_kind = propagation::SourceKind::spdc;
    else
        throw DataError(where + ": source_kind must be 'laser' or 'spdc'");
    const fs::path base = manifest_path.parent_path();
    std::size_t k = 0;
    for (const auto& e : m["frames"]) {
        const std::string at = where + ": frames[" + std::to_string(k++) + "]";
        if (!e.is_object() || !e.contains("signal") || !e.contains("background") || !e.contains("w_out_W"))
            throw DataError(at + ": needs 'signal', 'background' and 'w_out_W'");
        Frame f;
        f.signal = read_image(base / e["signal"].get<std::string>(), out.camera.image_rows, out.camera.image_cols);
        f.background = read_image(base / e["background"].get<std::string>(), out.camera.image_rows, out.camera.image_cols);
        if (!e["w_out_W"].is_number())
            throw DataError(at + ".w_out_W: expected a number");
        f.w_out_W = e["w_out_W"].get<double>();
        if (f.w_out_W < 0.0)
            throw DataError(at + ".w_out_W: must be non-negative");
        f.timestamp_s = e.value("timestamp_s", 0.0);
        if (e.contains("cic_injected"))
            f.cic_injected = e["cic_injected"].get<bool>();
        out.series.frames.push_back(std::move(f));
    }
    if (out.series.frames.empty())
        throw DataError(where + ": manifest lists no frames");
    return out;
}

} // namespace lcf2pa::frames

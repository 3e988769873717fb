#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "kpplab/common.hpp"
#include "kpplab/context.hpp"

namespace kpplab {

/// Fixed 17-significant-digit float formatting; identical inputs give
/// byte-identical output.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct CsvWriter {
    std::vector<std::string> header_lines; // reproducibility header
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::string str() const {
        std::ostringstream os;
        for (const auto& h : header_lines) os << "# " << h << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i)
            os << (i ? "," : "") << columns[i];
        os << "\n";
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i)
                os << (i ? "," : "") << format_double(r[i]);
            os << "\n";
        }
        return os.str();
    }
};

/// Write via a temp file then rename, so partially written artifacts are
/// never observed.
inline void atomic_write(const std::filesystem::path& path,
                         const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + tmp.string());
        os << content;
    }
    std::filesystem::rename(tmp, path);
}

/// Plain key = value configuration. Unknown keys are rejected.
/// Keys: nonlinearity, beta, alpha, domain_left, domain_right, grid_step.
inline ModelConfig parse_config_text(const std::string& text) {
    ModelConfig cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
            if (blank) continue;
            throw std::invalid_argument("config line " +
                                        std::to_string(lineno) +
                                        ": expected key = value");
        }
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{}
                                          : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key == "nonlinearity") cfg.nonlinearity = val;
        else if (key == "beta") cfg.beta = std::stod(val);
        else if (key == "alpha") cfg.alpha = std::stod(val);
        else if (key == "domain_left") cfg.domain_left = std::stod(val);
        else if (key == "domain_right") cfg.domain_right = std::stod(val);
        else if (key == "grid_step") cfg.grid_step = std::stod(val);
        else
            throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    return cfg;
}

inline ModelConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("config file not found: " +
                                         path.string());
    std::ostringstream os;
    os << is.rdbuf();
    return parse_config_text(os.str());
}

inline std::vector<std::string> config_echo(const ModelConfig& cfg,
                                            unsigned long seed) {
    return {
        "nonlinearity = " + cfg.nonlinearity,
        "beta = " + format_double(cfg.beta),
        "alpha = " + format_double(cfg.alpha),
        "domain_left = " + format_double(cfg.domain_left),
        "domain_right = " + format_double(cfg.domain_right),
        "grid_step = " + format_double(cfg.grid_step),
        "seed = " + std::to_string(seed),
    };
}

/// Minimal polyline SVG plot; optionally log-log axes. Enough for decay
/// curves and complex-plane scans, no external tooling.
inline std::string render_svg_lines(
    const std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>& series,
    const std::string& xlabel, const std::string& ylabel, bool loglog) {
    const double W = 720, H = 480, ml = 70, mr = 20, mt = 20, mb = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    auto tx = [&](double v) { return loglog ? std::log10(std::max(v, 1e-300)) : v; };
    for (const auto& s : series) {
        for (auto [x, y] : s.second) {
            xmin = std::min(xmin, tx(x));
            xmax = std::max(xmax, tx(x));
            ymin = std::min(ymin, tx(y));
            ymax = std::max(ymax, tx(y));
        }
    }
    if (xmax <= xmin) xmax = xmin + 1;
    if (ymax <= ymin) ymax = ymin + 1;
    auto px = [&](double x) {
        return ml + (W - ml - mr) * (tx(x) - xmin) / (xmax - xmin);
    };
    auto py = [&](double y) {
        return H - mb - (H - mt - mb) * (tx(y) - ymin) / (ymax - ymin);
    };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                   "#9467bd", "#ff7f0e"};
    std::ostringstream os;
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W
       << "' height='" << H << "'>\n";
    os << "<rect width='100%' height='100%' fill='white'/>\n";
    os << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr
       << "' y2='" << H - mb << "' stroke='black'/>\n";
    os << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='"
       << H - mb << "' stroke='black'/>\n";
    os << "<text x='" << (W / 2) << "' y='" << (H - 12)
       << "' text-anchor='middle' font-size='14'>" << xlabel
       << (loglog ? " (log10)" : "") << "</text>\n";
    os << "<text x='16' y='" << (H / 2)
       << "' text-anchor='middle' font-size='14' transform='rotate(-90 16 "
       << (H / 2) << ")'>" << ylabel << (loglog ? " (log10)" : "")
       << "</text>\n";
    int ci = 0;
    for (const auto& s : series) {
        os << "<polyline fill='none' stroke='" << colors[ci % 5]
           << "' stroke-width='1.5' points='";
        for (auto [x, y] : s.second) os << px(x) << "," << py(y) << " ";
        os << "'/>\n";
        os << "<text x='" << (W - mr - 150) << "' y='" << (mt + 18 + 16 * ci)
           << "' font-size='12' fill='" << colors[ci % 5] << "'>" << s.first
           << "</text>\n";
        ++ci;
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace kpplab

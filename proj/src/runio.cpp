#include "delamfem/runio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace delamfem {

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string curve_csv(const LoadDispCurve& curve) {
    std::string out = "disp_mm,load_N_per_mm\n";
    for (const auto& p : curve.points)
        out += format_full(p.disp) + "," + format_full(p.load) + "\n";
    return out;
}

namespace {
std::vector<double> split_doubles(const std::string& line, size_t expected) {
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() != expected)
        throw IOError("csv row has " + std::to_string(vals.size()) + " fields, expected " +
                      std::to_string(expected));
    return vals;
}
} // namespace

LoadDispCurve parse_curve_csv(const std::string& text) {
    LoadDispCurve curve;
    std::stringstream ss(text);
    std::string line;
    if (!std::getline(ss, line) || line != "disp_mm,load_N_per_mm")
        throw IOError("bad curve csv header");
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        const auto v = split_doubles(line, 2);
        curve.points.push_back({v[0], v[1]});
    }
    return curve;
}

std::string profile_csv(const TractionProfile& profile) {
    std::string out = "x1_mm,t_n,t_t,d_s\n";
    for (const auto& s : profile.samples)
        out += format_full(s.x1) + "," + format_full(s.t_n) + "," + format_full(s.t_t) + "," +
               format_full(s.d_s) + "\n";
    return out;
}

TractionProfile parse_profile_csv(const std::string& text) {
    TractionProfile profile;
    std::stringstream ss(text);
    std::string line;
    if (!std::getline(ss, line) || line != "x1_mm,t_n,t_t,d_s")
        throw IOError("bad profile csv header");
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        const auto v = split_doubles(line, 4);
        profile.samples.push_back({v[0], v[1], v[2], v[3]});
    }
    return profile;
}

namespace {

struct PlotSeries {
    std::vector<std::pair<double, double>> xy;
};

std::string svg_plot(const PlotSeries& series, const std::string& title, const std::string& xlab,
                     const std::string& ylab) {
    const int W = 640, H = 480, M = 60;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (!series.xy.empty()) {
        xmin = xmax = series.xy[0].first;
        ymin = ymax = series.xy[0].second;
        for (const auto& [x, y] : series.xy) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (xmax - xmin < 1e-300) xmax = xmin + 1;
    if (ymax - ymin < 1e-300) ymax = ymin + 1;
    auto px = [&](double x) { return M + (x - xmin) / (xmax - xmin) * (W - 2 * M); };
    auto py = [&](double y) { return H - M - (y - ymin) / (ymax - ymin) * (H - 2 * M); };

    char buf[256];
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n", M, H - M,
                  W - M, H - M);
    os << buf;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n", M, M, M,
                  H - M);
    os << buf;
    os << "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : series.xy) {
        std::snprintf(buf, sizeof(buf), "%.6g,%.6g ", px(x), py(y));
        os << buf;
    }
    os << "\"/>\n";
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">%s</text>\n",
                  M, title.c_str());
    os << buf;
    std::snprintf(
        buf, sizeof(buf),
        "<text x=\"%d\" y=\"%d\" font-family=\"sans-serif\" font-size=\"12\">%s  [%.6g, %.6g]</text>\n",
        M, H - 16, xlab.c_str(), xmin, xmax);
    os << buf;
    std::snprintf(
        buf, sizeof(buf),
        "<text x=\"8\" y=\"%d\" font-family=\"sans-serif\" font-size=\"12\">%s  [%.6g, %.6g]</text>\n",
        M - 20, ylab.c_str(), ymin, ymax);
    os << buf;
    os << "</svg>\n";
    return os.str();
}

} // namespace

std::string curve_svg(const LoadDispCurve& curve, const std::string& title) {
    PlotSeries s;
    for (const auto& p : curve.points) s.xy.emplace_back(p.disp, p.load);
    return svg_plot(s, title, "disp_mm", "load_N_per_mm");
}

std::string profile_svg(const TractionProfile& profile, ProfileField field,
                        const std::string& title) {
    PlotSeries s;
    for (const auto& p : profile.samples)
        s.xy.emplace_back(p.x1, field == ProfileField::t_n ? p.t_n : p.t_t);
    return svg_plot(s, title, "x1_mm", field == ProfileField::t_n ? "t_n" : "t_t");
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IOError("cannot open for writing: " + path.string());
    f << content;
    if (!f) throw IOError("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IOError("cannot open: " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace delamfem

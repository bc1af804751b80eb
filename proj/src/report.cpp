#include "savwave/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

namespace savwave::cli {

std::string format_number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw std::out_of_range("CSV has no column '" + std::string(name) + "'");
}

double CsvTable::number(std::size_t row, std::string_view name) const {
    return std::stod(rows.at(row).at(column(name)));
}

CsvTable parse_csv(std::string_view text) {
    CsvTable table;
    std::size_t start = 0;
    while (start < text.size()) {
        const auto end = text.find('\n', start);
        std::string_view line = text.substr(start, end == std::string_view::npos ? text.npos : end - start);
        start = end == std::string_view::npos ? text.size() : end + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (line.front() == '#') {
            table.comments.emplace_back(line);
            continue;
        }
        std::vector<std::string> cells;
        std::size_t s = 0;
        while (true) {
            const auto comma = line.find(',', s);
            cells.emplace_back(line.substr(s, comma == std::string_view::npos ? line.npos : comma - s));
            if (comma == std::string_view::npos) break;
            s = comma + 1;
        }
        if (table.header.empty()) {
            table.header = std::move(cells);
        } else {
            table.rows.push_back(std::move(cells));
        }
    }
    return table;
}

std::string simulate_csv(const std::vector<RunRecord>& records) {
    std::ostringstream out;
    out << "step,time,V,V1,q,aux_gap,energy_residual\n";
    for (const auto& r : records) {
        out << r.step << ',' << format_number(r.time) << ',' << format_number(r.diag.V) << ','
            << format_number(r.diag.V1) << ',' << format_number(r.q) << ',' << format_number(r.diag.aux_gap) << ','
            << format_number(r.diag.energy_residual) << '\n';
    }
    return out.str();
}

std::string converge_csv(const ConvergenceResult& result) {
    std::ostringstream out;
    out << "scheme,tau,rms_error,stderr,excluded_paths\n";
    for (const auto& r : result.rows) {
        out << name(r.scheme) << ',' << format_number(r.tau) << ',' << format_number(r.rms_error) << ','
            << format_number(r.stderr_rms) << ',' << r.excluded_paths << '\n';
    }
    std::vector<Scheme> order;
    for (const auto& r : result.rows) {
        if (std::find(order.begin(), order.end(), r.scheme) == order.end()) order.push_back(r.scheme);
    }
    for (std::size_t i = 0; i < order.size() && i < result.fits.size(); ++i) {
        out << "# scheme=" << name(order[i]) << " slope=" << format_number(result.fits[i].slope)
            << " intercept=" << format_number(result.fits[i].intercept) << " seed=" << result.seed << '\n';
    }
    return out.str();
}

std::string energy_csv(const std::vector<EnergyRow>& rows) {
    std::ostringstream out;
    out << "step,time,mean_V,stderr_V,predicted_V\n";
    for (const auto& r : rows) {
        out << r.step << ',' << format_number(r.time) << ',' << format_number(r.mean_V) << ','
            << format_number(r.stderr_V) << ',' << format_number(r.predicted_V) << '\n';
    }
    return out.str();
}

std::string check_csv(const std::vector<CheckResult>& checks) {
    std::ostringstream out;
    out << "check,module,measured,threshold,passed,seed\n";
    for (const auto& c : checks) {
        out << c.name << ',' << c.module << ',' << format_number(c.measured) << ',' << format_number(c.threshold)
            << ',' << (c.passed ? 1 : 0) << ',' << c.seed << '\n';
    }
    return out.str();
}

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 170.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 60.0;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

struct Axis {
    double lo, hi;
    double map(double x, double a, double b) const { return a + (x - lo) / (hi - lo) * (b - a); }
};

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

std::string fmt_label(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

void open_svg(std::ostringstream& out, const std::string& title) {
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<defs><clipPath id=\"plot\"><rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\""
        << fmt(kWidth - kLeft - kRight) << "\" height=\"" << fmt(kHeight - kTop - kBottom)
        << "\"/></clipPath></defs>\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << fmt(kLeft) << "\" y=\"18\" font-size=\"14\">" << title << "</text>\n"
        << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\"" << fmt(kWidth - kLeft - kRight)
        << "\" height=\"" << fmt(kHeight - kTop - kBottom) << "\" fill=\"none\" stroke=\"black\"/>\n";
}

void x_tick(std::ostringstream& out, double px, const std::string& label) {
    const double y = kHeight - kBottom;
    out << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(px) << "\" y2=\"" << fmt(y + 5)
        << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(y + 20) << "\" text-anchor=\"middle\">" << label << "</text>\n";
}

void y_tick(std::ostringstream& out, double py, const std::string& label) {
    out << "<line x1=\"" << fmt(kLeft - 5) << "\" y1=\"" << fmt(py) << "\" x2=\"" << fmt(kLeft) << "\" y2=\""
        << fmt(py) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(py + 4) << "\" text-anchor=\"end\">" << label
        << "</text>\n";
}

void axis_labels(std::ostringstream& out, const std::string& x, const std::string& y) {
    const double cx = kLeft + 0.5 * (kWidth - kLeft - kRight);
    const double cy = kTop + 0.5 * (kHeight - kTop - kBottom);
    out << "<text x=\"" << fmt(cx) << "\" y=\"" << fmt(kHeight - 15) << "\" text-anchor=\"middle\">" << x
        << "</text>\n"
        << "<text x=\"18\" y=\"" << fmt(cy) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << fmt(cy)
        << ")\">" << y << "</text>\n";
}

void legend(std::ostringstream& out, std::size_t index, const std::string& color, const std::string& label,
            bool dashed = false) {
    const double x = kWidth - kRight + 12;
    const double y = kTop + 16 + 20.0 * static_cast<double>(index);
    out << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(x + 22) << "\" y2=\"" << fmt(y)
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"" << (dashed ? " stroke-dasharray=\"6 4\"" : "")
        << "/>\n"
        << "<text x=\"" << fmt(x + 28) << "\" y=\"" << fmt(y + 4) << "\">" << label << "</text>\n";
}

/// Value of `key=` inside a footer comment, if present.
std::string footer_field(const std::string& comment, const std::string& key) {
    const std::string needle = key + "=";
    const auto pos = comment.find(needle);
    if (pos == std::string::npos) return {};
    const auto end = comment.find(' ', pos);
    return comment.substr(pos + needle.size(), end == std::string::npos ? std::string::npos : end - pos - needle.size());
}

}  // namespace

std::string converge_svg(const CsvTable& table) {
    std::vector<std::string> schemes;
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::string& s = table.rows[r].at(table.column("scheme"));
        const double tau = table.number(r, "tau");
        const double err = table.number(r, "rms_error");
        if (!(tau > 0.0) || !(err > 0.0)) continue;
        if (std::find(schemes.begin(), schemes.end(), s) == schemes.end()) schemes.push_back(s);
        const double lx = std::log2(tau), ly = std::log2(err);
        series[s].emplace_back(lx, ly);
        xmin = std::min(xmin, lx);
        xmax = std::max(xmax, lx);
        ymin = std::min(ymin, ly);
        ymax = std::max(ymax, ly);
    }
    std::ostringstream out;
    open_svg(out, "strong error at T");
    if (schemes.empty()) {
        out << "</svg>\n";
        return out.str();
    }
    if (xmax - xmin < 1.0) { xmin -= 0.5; xmax += 0.5; }
    ymin = std::floor(ymin - 0.25);
    ymax = std::ceil(ymax + 0.25);
    const Axis ax{xmin - 0.25, xmax + 0.25};
    const Axis ay{ymin, ymax};
    const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
    for (int e = static_cast<int>(std::ceil(ax.lo)); e <= static_cast<int>(std::floor(ax.hi)); ++e) {
        x_tick(out, ax.map(e, x0, x1), "2^" + std::to_string(e));
    }
    const int ystep = std::max(1, static_cast<int>(std::ceil((ay.hi - ay.lo) / 8.0)));
    for (int e = static_cast<int>(ay.lo); e <= static_cast<int>(ay.hi); e += ystep) {
        y_tick(out, ay.map(e, y0, y1), "2^" + std::to_string(e));
    }
    axis_labels(out, "tau", "RMS L2 error");

    // Order-one guide through the first point of the first series.
    const auto& first = series[schemes.front()].front();
    const double gx0 = ax.lo, gx1 = ax.hi;
    out << "<line x1=\"" << fmt(ax.map(gx0, x0, x1)) << "\" y1=\"" << fmt(ay.map(first.second + gx0 - first.first, y0, y1))
        << "\" x2=\"" << fmt(ax.map(gx1, x0, x1)) << "\" y2=\"" << fmt(ay.map(first.second + gx1 - first.first, y0, y1))
        << "\" stroke=\"gray\" stroke-dasharray=\"6 4\" clip-path=\"url(#plot)\"/>\n";

    for (std::size_t i = 0; i < schemes.size(); ++i) {
        const std::string color = kPalette[i % 5];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const auto& [lx, ly] : series[schemes[i]]) {
            out << fmt(ax.map(lx, x0, x1)) << ',' << fmt(ay.map(ly, y0, y1)) << ' ';
        }
        out << "\"/>\n";
        for (const auto& [lx, ly] : series[schemes[i]]) {
            out << "<circle cx=\"" << fmt(ax.map(lx, x0, x1)) << "\" cy=\"" << fmt(ay.map(ly, y0, y1))
                << "\" r=\"3.5\" fill=\"" << color << "\"/>\n";
        }
        std::string label = schemes[i];
        for (const auto& c : table.comments) {
            if (footer_field(c, "scheme") == schemes[i]) {
                const std::string slope = footer_field(c, "slope");
                if (!slope.empty()) label += " (slope " + fmt_label(std::stod(slope)) + ")";
            }
        }
        legend(out, i, color, label);
    }
    legend(out, schemes.size(), "gray", "order 1", true);
    out << "</svg>\n";
    return out.str();
}

std::string energy_svg(const CsvTable& table) {
    const std::size_t n = table.rows.size();
    std::vector<double> t(n), mean(n), se(n), pred(n);
    double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
    for (std::size_t r = 0; r < n; ++r) {
        t[r] = table.number(r, "time");
        mean[r] = table.number(r, "mean_V");
        se[r] = table.number(r, "stderr_V");
        pred[r] = table.number(r, "predicted_V");
        ymin = std::min({ymin, mean[r] - 3.0 * se[r], pred[r]});
        ymax = std::max({ymax, mean[r] + 3.0 * se[r], pred[r]});
    }
    std::ostringstream out;
    open_svg(out, "mean modified energy");
    if (n == 0) {
        out << "</svg>\n";
        return out.str();
    }
    const double pad = ymax > ymin ? 0.05 * (ymax - ymin) : std::max(1e-3, 0.05 * std::abs(ymax));
    const Axis ax{t.front(), t.back() > t.front() ? t.back() : t.front() + 1.0};
    const Axis ay{ymin - pad, ymax + pad};
    const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
    for (int i = 0; i <= 5; ++i) {
        const double x = ax.lo + (ax.hi - ax.lo) * i / 5.0;
        x_tick(out, ax.map(x, x0, x1), fmt_label(x));
        const double y = ay.lo + (ay.hi - ay.lo) * i / 5.0;
        y_tick(out, ay.map(y, y0, y1), fmt_label(y));
    }
    axis_labels(out, "t", "V");

    out << "<polygon fill=\"#1f77b4\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (std::size_t r = 0; r < n; ++r) out << fmt(ax.map(t[r], x0, x1)) << ',' << fmt(ay.map(mean[r] + 3 * se[r], y0, y1)) << ' ';
    for (std::size_t r = n; r-- > 0;) out << fmt(ax.map(t[r], x0, x1)) << ',' << fmt(ay.map(mean[r] - 3 * se[r], y0, y1)) << ' ';
    out << "\"/>\n";
    auto line = [&](const std::vector<double>& y, const char* color, bool dashed) {
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\""
            << (dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
        for (std::size_t r = 0; r < n; ++r) out << fmt(ax.map(t[r], x0, x1)) << ',' << fmt(ay.map(y[r], y0, y1)) << ' ';
        out << "\"/>\n";
    };
    line(mean, "#1f77b4", false);
    line(pred, "#d62728", true);
    legend(out, 0, "#1f77b4", "mean V (3 s.e. band)");
    legend(out, 1, "#d62728", "predicted", true);
    out << "</svg>\n";
    return out.str();
}

}  // namespace savwave::cli

#include "carl/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

namespace carl::svg {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 72, kRight = 20, kTop = 36, kBottom = 52;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finish() {
        if (!std::isfinite(lo)) lo = 0, hi = 1;
        if (hi - lo <= 0) {
            const double pad = lo == 0 ? 1.0 : std::abs(lo) * 0.05;
            lo -= pad;
            hi += pad;
        }
    }
};

// Roughly five ticks at 1, 2 or 5 times a power of ten.
std::vector<double> ticks(double lo, double hi) {
    const double raw = (hi - lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {2.0, 5.0, 10.0})
        if (raw > step) step = m * mag;
    std::vector<double> out;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step)
        out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    return out;
}

class Canvas {
public:
    Canvas(const Axes& axes, std::span<const double> x, std::span<const double> y)
        : axes_(axes) {
        for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
            const auto v = value(y[i]);
            if (!std::isfinite(x[i]) || !v) continue;
            xr_.add(x[i]);
            yr_.add(*v);
        }
        xr_.finish();
        yr_.finish();
    }

    std::optional<double> value(double y) const {
        if (!std::isfinite(y)) return std::nullopt;
        if (axes_.log_y) {
            if (y <= 0) return std::nullopt;
            return std::log10(y);
        }
        return y;
    }

    double px(double x) const {
        return kLeft + (x - xr_.lo) / (xr_.hi - xr_.lo) * (kWidth - kLeft - kRight);
    }
    double py(double y) const {
        return kHeight - kBottom - (y - yr_.lo) / (yr_.hi - yr_.lo) * (kHeight - kTop - kBottom);
    }

    void frame(std::ostringstream& out) const {
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
            << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
            << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
            << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
            << escape(axes_.title) << "</text>\n"
            << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\""
            << kWidth - kLeft - kRight << "\" height=\"" << kHeight - kTop - kBottom
            << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (double t : ticks(xr_.lo, xr_.hi)) {
            out << "<line x1=\"" << num(px(t)) << "\" y1=\"" << kHeight - kBottom << "\" x2=\""
                << num(px(t)) << "\" y2=\"" << kHeight - kBottom + 5 << "\" stroke=\"black\"/>"
                << "<text x=\"" << num(px(t)) << "\" y=\"" << kHeight - kBottom + 18
                << "\" text-anchor=\"middle\">" << num(t) << "</text>\n";
        }
        for (double t : ticks(yr_.lo, yr_.hi)) {
            const std::string label = axes_.log_y ? "1e" + num(t) : num(t);
            out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(py(t)) << "\" x2=\"" << kLeft
                << "\" y2=\"" << num(py(t)) << "\" stroke=\"black\"/>"
                << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(py(t) + 4)
                << "\" text-anchor=\"end\">" << escape(label) << "</text>\n";
        }
        out << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 12
            << "\" text-anchor=\"middle\">" << escape(axes_.x_label) << "</text>\n"
            << "<text transform=\"translate(16," << (kTop + kHeight - kBottom) / 2
            << ") rotate(-90)\" text-anchor=\"middle\">" << escape(axes_.y_label)
            << "</text>\n";
    }

private:
    Axes axes_;
    Range xr_, yr_;
};

} // namespace

std::string line_plot(const Axes& axes, std::span<const double> x, std::span<const double> y) {
    Canvas c(axes, x, y);
    std::ostringstream out;
    c.frame(out);
    bool open = false;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        const auto v = c.value(y[i]);
        if (!std::isfinite(x[i]) || !v) {
            if (open) out << "\"/>\n";
            open = false;
            continue;
        }
        if (!open) {
            out << "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.2\" points=\"";
            open = true;
        }
        out << num(c.px(x[i])) << ',' << num(c.py(*v)) << ' ';
    }
    if (open) out << "\"/>\n";
    out << "</svg>\n";
    return out.str();
}

std::string scatter_plot(const Axes& axes, std::span<const double> x,
                         std::span<const double> y) {
    Canvas c(axes, x, y);
    std::ostringstream out;
    c.frame(out);
    out << "<g fill=\"#b0302a\" fill-opacity=\"0.6\">\n";
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        const auto v = c.value(y[i]);
        if (!std::isfinite(x[i]) || !v) continue;
        out << "<circle cx=\"" << num(c.px(x[i])) << "\" cy=\"" << num(c.py(*v))
            << "\" r=\"1.6\"/>\n";
    }
    out << "</g>\n</svg>\n";
    return out.str();
}

} // namespace carl::svg

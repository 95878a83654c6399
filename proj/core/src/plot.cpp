#include "ccbf/plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <fmt/format.h>

namespace ccbf {

namespace {

constexpr double kWidth = 960.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 130.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

const char* color(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Round step for about `target` ticks across [lo, hi].
double tick_step(double lo, double hi, int target) {
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

struct Panel {
  double y_offset;
  double t0, t1, v0, v1;

  double px(double t) const { return kLeft + (t - t0) / (t1 - t0) * (kWidth - kLeft - kRight); }
  double py(double v) const {
    return y_offset + kTop + (v1 - v) / (v1 - v0) * (kHeight - kTop - kBottom);
  }
};

void widen(double& lo, double& hi) {
  if (!(hi > lo)) {
    const double pad = std::max(std::abs(lo) * 0.1, 0.5);
    lo -= pad;
    hi += pad;
  }
}

std::string axes(const Panel& p, const std::string& title, const std::string& ylabel) {
  std::string s;
  const double x0 = kLeft;
  const double x1 = kWidth - kRight;
  const double y0 = p.y_offset + kTop;
  const double y1 = p.y_offset + kHeight - kBottom;
  s += fmt::format(R"(<rect x="{:.2f}" y="{:.2f}" width="{:.2f}" height="{:.2f}" fill="none" stroke="#000"/>)",
                   x0, y0, x1 - x0, y1 - y0);
  s += '\n';
  s += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="16" text-anchor="middle">{}</text>)",
                   0.5 * (x0 + x1), p.y_offset + 24, esc(title));
  s += '\n';
  s += fmt::format(
      R"svg(<text x="{:.2f}" y="{:.2f}" font-size="13" text-anchor="middle" transform="rotate(-90 {:.2f} {:.2f})">{}</text>)svg",
      18.0, 0.5 * (y0 + y1), 18.0, 0.5 * (y0 + y1), esc(ylabel));
  s += '\n';
  s += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="13" text-anchor="middle">t</text>)",
                   0.5 * (x0 + x1), y1 + 40);
  s += '\n';

  const double ts = tick_step(p.t0, p.t1, 8);
  for (double t = std::ceil(p.t0 / ts) * ts; t <= p.t1 + 1e-9 * ts; t += ts) {
    s += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="11" text-anchor="middle">{:g}</text>)",
                     p.px(t), y1 + 18, t);
    s += '\n';
  }
  const double vs = tick_step(p.v0, p.v1, 6);
  for (double v = std::ceil(p.v0 / vs) * vs; v <= p.v1 + 1e-9 * vs; v += vs) {
    const double y = p.py(v);
    s += fmt::format(R"(<line x1="{:.2f}" y1="{:.2f}" x2="{:.2f}" y2="{:.2f}" stroke="#ddd"/>)", x0, y, x1, y);
    s += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="11" text-anchor="end">{:g}</text>)",
                     x0 - 6, y + 4, std::abs(v) < 1e-12 * vs ? 0.0 : v);
    s += '\n';
  }
  return s;
}

std::string traces(const Panel& p, const std::vector<double>& t,
                   const std::vector<std::vector<double>>& series, const char* prefix) {
  std::string s;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (t.size() == 1) {
      s += fmt::format(R"(<circle class="trace" cx="{:.2f}" cy="{:.2f}" r="3" fill="{}"/>)",
                       p.px(t[0]), p.py(series[i][0]), color(i));
    } else {
      s += fmt::format(R"(<polyline class="trace" fill="none" stroke="{}" stroke-width="1.5" points=")",
                       color(i));
      for (std::size_t k = 0; k < t.size(); ++k) {
        if (k) s += ' ';
        s += fmt::format("{:.2f},{:.2f}", p.px(t[k]), p.py(series[i][k]));
      }
      s += "\"/>";
    }
    s += '\n';
    const double ly = p.y_offset + kTop + 10 + 20.0 * static_cast<double>(i);
    const double lx = kWidth - kRight + 12;
    s += fmt::format(R"(<rect x="{:.2f}" y="{:.2f}" width="14" height="3" fill="{}"/>)", lx, ly - 4, color(i));
    s += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="12">{}_{}</text>)", lx + 20, ly, prefix, i + 1);
    s += '\n';
  }
  return s;
}

std::string hline(const Panel& p, double v, const char* cls, const char* stroke, const char* dash) {
  return fmt::format(
      R"(<line class="{}" x1="{:.2f}" y1="{:.2f}" x2="{:.2f}" y2="{:.2f}" stroke="{}" stroke-width="1.2" stroke-dasharray="{}"/>)",
      cls, kLeft, p.py(v), kWidth - kRight, p.py(v), stroke, dash) + "\n";
}

}  // namespace

std::string plot_svg(const ResultTable& table, const PlotOptions& opts) {
  if (table.rows.empty()) throw ResultFormatError("no rows");
  const std::size_t n = table.nodes;
  const auto t = table.values("t");
  std::vector<std::vector<double>> xs(n);
  std::vector<std::vector<double>> us(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = table.values(fmt::format("x_{}", i + 1));
    us[i] = table.values(fmt::format("u_{}", i + 1));
  }

  double t0 = t.front();
  double t1 = t.back();
  widen(t0, t1);

  auto range = [](const std::vector<std::vector<double>>& series, const std::vector<double>& extra) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& s : series) {
      for (double v : s) {
        if (std::isfinite(v)) {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
    }
    for (double v : extra) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!std::isfinite(lo)) lo = hi = 0.0;
    lo = std::min(lo, 0.0);
    const double pad = 0.05 * (hi - lo);
    hi += pad;
    widen(lo, hi);
    return std::pair{lo, hi};
  };

  std::set<double> limits(opts.control_limits.begin(), opts.control_limits.end());
  const auto [xlo, xhi] = range(xs, opts.thresholds);
  const auto [ulo, uhi] = range(us, {limits.begin(), limits.end()});
  const Panel states{0.0, t0, t1, xlo, xhi};
  const Panel controls{kHeight, t0, t1, ulo, uhi};

  std::string s = fmt::format(
      R"(<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{1}" viewBox="0 0 {0} {1}" font-family="sans-serif">)",
      kWidth, 2 * kHeight);
  s += '\n';
  s += fmt::format(R"(<rect width="{}" height="{}" fill="#fff"/>)", kWidth, 2 * kHeight) + "\n";
  const std::string prefix = opts.title.empty() ? "" : opts.title + ": ";
  s += "<g class=\"panel\" id=\"states\">\n";
  s += axes(states, prefix + "states", "x");
  for (std::size_t i = 0; i < opts.thresholds.size(); ++i) {
    s += hline(states, opts.thresholds[i], "threshold", color(i), "2,4");
  }
  s += traces(states, t, xs, "x");
  s += "</g>\n<g class=\"panel\" id=\"controls\">\n";
  s += axes(controls, prefix + "controls", "u");
  for (double v : limits) s += hline(controls, v, "limit", "#000", "8,6");
  s += traces(controls, t, us, "u");
  s += "</g>\n</svg>\n";
  return s;
}

}  // namespace ccbf

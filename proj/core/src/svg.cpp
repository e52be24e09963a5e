#include "subq/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace subq {

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

void open_svg(std::ostringstream& out, double w, double h,
              const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<!-- generator: subq -->\n"
      << "<text x=\"" << w / 2 << "\" y=\"18\" text-anchor=\"middle\" "
         "font-size=\"14\">"
      << escape(title) << "</text>\n";
}

}  // namespace

std::string bar_chart_svg(const std::vector<std::string>& labels,
                          const std::vector<double>& values,
                          const std::string& title) {
  const double row_h = 28.0, left = 180.0, top = 32.0, plot_w = 380.0;
  const double width = left + plot_w + 60.0;
  const double height = top + row_h * static_cast<double>(values.size()) + 16.0;
  const double max_v =
      values.empty() ? 1.0
                     : std::max(1e-300, *std::max_element(values.begin(), values.end()));

  std::ostringstream out;
  open_svg(out, width, height, title);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double y = top + row_h * static_cast<double>(i);
    const double w = plot_w * std::max(0.0, values[i]) / max_v;
    out << "<text x=\"" << left - 8 << "\" y=\"" << fmt(y + 17)
        << "\" text-anchor=\"end\">" << escape(labels[i]) << "</text>\n"
        << "<rect x=\"" << left << "\" y=\"" << fmt(y + 5) << "\" width=\""
        << fmt(w) << "\" height=\"18\" fill=\"#4878a8\"/>\n"
        << "<text x=\"" << fmt(left + w + 6) << "\" y=\"" << fmt(y + 17)
        << "\">" << fmt(values[i]) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string epoch_whisker_svg(const std::vector<EpochSummary>& epochs,
                              const std::string& title) {
  const double left = 60.0, top = 40.0, plot_w = 640.0, plot_h = 300.0;
  const double width = left + plot_w + 30.0;
  const double height = top + plot_h + 50.0;

  double lo = 0.0, hi = 1.0;
  if (!epochs.empty()) {
    lo = epochs[0].su_ci.lower;
    hi = epochs[0].su_ci.upper;
    for (const auto& e : epochs) {
      lo = std::min({lo, e.su_ci.lower, e.nosu_ci.lower, e.observed, e.truth_mean});
      hi = std::max({hi, e.su_ci.upper, e.nosu_ci.upper, e.observed, e.truth_mean});
    }
  }
  if (hi - lo < 1e-12) hi = lo + 1.0;
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  const auto x_of = [&](std::size_t i) {
    return left + plot_w * (static_cast<double>(i) + 0.5) /
                      static_cast<double>(std::max<std::size_t>(epochs.size(), 1));
  };
  const auto y_of = [&](double v) {
    return top + plot_h * (hi - v) / (hi - lo);
  };

  std::ostringstream out;
  open_svg(out, width, height, title);
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"#888\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = lo + (hi - lo) * tick / 4.0;
    out << "<text x=\"" << left - 6 << "\" y=\"" << fmt(y_of(v) + 4)
        << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(v) << "</text>\n";
  }
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    const auto& e = epochs[i];
    const double x = x_of(i);
    // SU quantile interval (wide, blue) and no-SU t-interval (narrow, orange)
    out << "<line x1=\"" << fmt(x - 4) << "\" x2=\"" << fmt(x - 4) << "\" y1=\""
        << fmt(y_of(e.su_ci.lower)) << "\" y2=\"" << fmt(y_of(e.su_ci.upper))
        << "\" stroke=\"#4878a8\" stroke-width=\"3\"/>\n"
        << "<line x1=\"" << fmt(x + 4) << "\" x2=\"" << fmt(x + 4) << "\" y1=\""
        << fmt(y_of(e.nosu_ci.lower)) << "\" y2=\""
        << fmt(y_of(e.nosu_ci.upper))
        << "\" stroke=\"#e08830\" stroke-width=\"3\"/>\n"
        << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y_of(e.truth_mean))
        << "\" r=\"3\" fill=\"#333\"/>\n"
        << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y_of(e.observed))
        << "\" r=\"3\" fill=\"none\" stroke=\"#c03030\"/>\n"
        << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(top + plot_h + 16)
        << "\" text-anchor=\"middle\" font-size=\"10\">" << e.epoch
        << "</text>\n";
  }
  out << "<text x=\"" << left << "\" y=\"" << fmt(height - 10)
      << "\" font-size=\"10\">blue: with submodel uncertainty; orange: "
         "replication noise only; dot: ground truth; circle: observed"
      << "</text>\n</svg>\n";
  return out.str();
}

}  // namespace subq

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "phonsub/errors.hpp"

namespace phonsub::cli {

struct EmittedArtifact {
  std::string path;
  std::string kind;  // csv | json | svg
  std::string checksum;
};

namespace emit_detail {

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (const unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

inline std::string hex64(std::uint64_t value) {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(value));
  return buffer;
}

}  // namespace emit_detail

/// Full-precision decimal rendering of a double (17 significant digits
/// round-trips exactly through strtod).
inline std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

inline std::string format_double_short(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6g", value);
  return buffer;
}

/// Writes content atomically: temp file in the target directory, then
/// rename over the final path.
inline EmittedArtifact write_artifact(const std::filesystem::path& path,
                                      const std::string& kind,
                                      const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) {
      throw Error("cannot create output directory '" +
                  path.parent_path().string() + "': " + ec.message());
    }
  }
  const fs::path temp = path.string() + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + temp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw Error("failed writing '" + temp.string() + "'");
  }
  std::error_code ec;
  fs::rename(temp, path, ec);
  if (ec) {
    throw Error("cannot rename '" + temp.string() + "' to '" + path.string() +
                "': " + ec.message());
  }
  return {path.string(), kind,
          "fnv1a:" + emit_detail::hex64(emit_detail::fnv1a64(content))};
}

// ---------------------------------------------------------------------------
// CSV

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string quoted = "\"";
  for (const char c : field) {
    if (c == '"') quoted += "\"\"";
    else quoted += c;
  }
  quoted += "\"";
  return quoted;
}

inline std::string render_csv(const std::string& header,
                              const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream os;
  os << header << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ",";
      os << csv_escape(row[i]);
    }
    os << "\n";
  }
  return os.str();
}

/// Minimal CSV reader matching render_csv's quoting; used for round-trip
/// verification of emitted artifacts.
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(field);
      field.clear();
    } else if (c == '\n') {
      row.push_back(field);
      field.clear();
      rows.push_back(row);
      row.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  if (!field.empty() || !row.empty()) {
    row.push_back(field);
    rows.push_back(row);
  }
  return rows;
}

inline std::vector<std::vector<std::string>> read_csv_file(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open CSV file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str());
}

// ---------------------------------------------------------------------------
// SVG: small self-contained plots, no external renderer dependencies and no
// timestamps so repeated runs are byte-identical.

namespace emit_detail {

struct Frame {
  double width = 640.0, height = 420.0;
  double left = 70.0, right = 20.0, top = 20.0, bottom = 50.0;

  double plot_width() const { return width - left - right; }
  double plot_height() const { return height - top - bottom; }

  double map_x(double t) const { return left + t * plot_width(); }
  double map_y(double t) const { return top + (1.0 - t) * plot_height(); }
};

inline void svg_open(std::ostringstream& os, const Frame& frame) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << frame.width
     << "\" height=\"" << frame.height << "\" viewBox=\"0 0 " << frame.width
     << " " << frame.height << "\">\n"
     << "<rect width=\"" << frame.width << "\" height=\"" << frame.height
     << "\" fill=\"white\"/>\n";
}

inline void svg_axes(std::ostringstream& os, const Frame& frame,
                     const std::string& x_label, const std::string& y_label,
                     double x_min, double x_max, double y_min, double y_max) {
  os << "<rect x=\"" << frame.left << "\" y=\"" << frame.top << "\" width=\""
     << frame.plot_width() << "\" height=\"" << frame.plot_height()
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << frame.map_x(0.5) << "\" y=\"" << frame.height - 10.0
     << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label
     << "</text>\n";
  os << "<text x=\"16\" y=\"" << frame.map_y(0.5)
     << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
     << frame.map_y(0.5) << ")\">" << y_label << "</text>\n";
  os << "<text x=\"" << frame.left << "\" y=\"" << frame.height - 28.0
     << "\" text-anchor=\"middle\" font-size=\"11\">"
     << format_double_short(x_min) << "</text>\n";
  os << "<text x=\"" << frame.left + frame.plot_width() << "\" y=\""
     << frame.height - 28.0 << "\" text-anchor=\"middle\" font-size=\"11\">"
     << format_double_short(x_max) << "</text>\n";
  os << "<text x=\"" << frame.left - 6.0 << "\" y=\""
     << frame.map_y(0.0) + 4.0 << "\" text-anchor=\"end\" font-size=\"11\">"
     << format_double_short(y_min) << "</text>\n";
  os << "<text x=\"" << frame.left - 6.0 << "\" y=\"" << frame.map_y(1.0) + 4.0
     << "\" text-anchor=\"end\" font-size=\"11\">" << format_double_short(y_max)
     << "</text>\n";
}

inline std::string diverging_color(double t) {
  // t in [0, 1]; 0.5 maps to white, low to blue, high to red.
  auto channel = [](double x) {
    const int v = int(x * 255.0 + 0.5);
    return std::max(0, std::min(255, v));
  };
  double r, g, b;
  if (t < 0.5) {
    const double u = t / 0.5;
    r = 0.13 + u * (1.0 - 0.13);
    g = 0.40 + u * (1.0 - 0.40);
    b = 0.67 + u * (1.0 - 0.67);
  } else {
    const double u = (t - 0.5) / 0.5;
    r = 1.0 + u * (0.70 - 1.0);
    g = 1.0 + u * (0.09 - 1.0);
    b = 1.0 + u * (0.17 - 1.0);
  }
  char buffer[8];
  std::snprintf(buffer, sizeof(buffer), "#%02x%02x%02x", channel(r),
                channel(g), channel(b));
  return buffer;
}

}  // namespace emit_detail

inline std::string render_svg_line_plot(const std::string& x_label,
                                        const std::string& y_label,
                                        const std::vector<double>& xs,
                                        const std::vector<double>& ys) {
  emit_detail::Frame frame;
  std::ostringstream os;
  emit_detail::svg_open(os, frame);
  if (!xs.empty()) {
    double x_min = xs.front(), x_max = xs.front();
    double y_min = ys.front(), y_max = ys.front();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      x_min = std::min(x_min, xs[i]); x_max = std::max(x_max, xs[i]);
      y_min = std::min(y_min, ys[i]); y_max = std::max(y_max, ys[i]);
    }
    if (x_max == x_min) x_max = x_min + 1.0;
    if (y_max == y_min) y_max = y_min + 1.0;
    emit_detail::svg_axes(os, frame, x_label, y_label, x_min, x_max, y_min, y_max);
    os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) os << " ";
      os << format_double_short(frame.map_x((xs[i] - x_min) / (x_max - x_min)))
         << ","
         << format_double_short(frame.map_y((ys[i] - y_min) / (y_max - y_min)));
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

inline std::string render_svg_bar_chart(const std::string& x_label,
                                        const std::string& y_label,
                                        const std::vector<double>& heights) {
  emit_detail::Frame frame;
  std::ostringstream os;
  emit_detail::svg_open(os, frame);
  double y_max = 1e-12;
  for (const double h : heights) y_max = std::max(y_max, h);
  emit_detail::svg_axes(os, frame, x_label, y_label, 0.0,
                        double(heights.empty() ? 0 : heights.size() - 1), 0.0,
                        y_max);
  const double slot = frame.plot_width() / std::max<std::size_t>(heights.size(), 1);
  for (std::size_t n = 0; n < heights.size(); ++n) {
    const double h = std::max(heights[n], 0.0) / y_max * frame.plot_height();
    os << "<rect x=\"" << format_double_short(frame.left + slot * n + 0.15 * slot)
       << "\" y=\"" << format_double_short(frame.top + frame.plot_height() - h)
       << "\" width=\"" << format_double_short(0.7 * slot) << "\" height=\""
       << format_double_short(h) << "\" fill=\"#1f77b4\"/>\n";
    os << "<text x=\"" << format_double_short(frame.left + slot * (n + 0.5))
       << "\" y=\"" << frame.height - 28.0
       << "\" text-anchor=\"middle\" font-size=\"11\">" << n << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

/// Heat map over a rectangular grid of values, column index = x, row index
/// = y. An optional contour level is marked by stroking cell edges where
/// the value crosses the level between neighbouring cells.
inline std::string render_svg_heatmap(const std::string& x_label,
                                      const std::string& y_label,
                                      int columns, int rows,
                                      const std::vector<double>& values,
                                      double x_min, double x_max, double y_min,
                                      double y_max,
                                      std::optional<double> contour_level = {}) {
  emit_detail::Frame frame;
  std::ostringstream os;
  emit_detail::svg_open(os, frame);
  emit_detail::svg_axes(os, frame, x_label, y_label, x_min, x_max, y_min, y_max);
  double lo = values.empty() ? 0.0 : values.front();
  double hi = lo;
  for (const double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi == lo) hi = lo + 1.0;
  // Symmetric range when the data straddles zero, so zero renders white.
  if (lo < 0.0 && hi > 0.0) {
    const double a = std::max(-lo, hi);
    lo = -a;
    hi = a;
  }
  const double cell_w = frame.plot_width() / columns;
  const double cell_h = frame.plot_height() / rows;
  auto cell_x = [&](int col) { return frame.left + cell_w * col; };
  auto cell_y = [&](int row) {
    return frame.top + frame.plot_height() - cell_h * (row + 1);
  };
  for (int row = 0; row < rows; ++row) {
    for (int col = 0; col < columns; ++col) {
      const double v = values[std::size_t(row) * columns + col];
      const double t = (v - lo) / (hi - lo);
      os << "<rect x=\"" << format_double_short(cell_x(col)) << "\" y=\""
         << format_double_short(cell_y(row)) << "\" width=\""
         << format_double_short(cell_w + 0.5) << "\" height=\""
         << format_double_short(cell_h + 0.5) << "\" fill=\""
         << emit_detail::diverging_color(t) << "\"/>\n";
    }
  }
  if (contour_level) {
    const double level = *contour_level;
    auto value_at = [&](int row, int col) {
      return values[std::size_t(row) * columns + col];
    };
    for (int row = 0; row < rows; ++row) {
      for (int col = 0; col + 1 < columns; ++col) {
        if ((value_at(row, col) - level) * (value_at(row, col + 1) - level) < 0.0) {
          os << "<line x1=\"" << format_double_short(cell_x(col + 1)) << "\" y1=\""
             << format_double_short(cell_y(row)) << "\" x2=\""
             << format_double_short(cell_x(col + 1)) << "\" y2=\""
             << format_double_short(cell_y(row) + cell_h) << "\" stroke=\"black\""
             << " stroke-width=\"1.5\"/>\n";
        }
      }
    }
    for (int row = 0; row + 1 < rows; ++row) {
      for (int col = 0; col < columns; ++col) {
        if ((value_at(row, col) - level) * (value_at(row + 1, col) - level) < 0.0) {
          os << "<line x1=\"" << format_double_short(cell_x(col)) << "\" y1=\""
             << format_double_short(cell_y(row)) << "\" x2=\""
             << format_double_short(cell_x(col) + cell_w) << "\" y2=\""
             << format_double_short(cell_y(row)) << "\" stroke=\"black\""
             << " stroke-width=\"1.5\"/>\n";
        }
      }
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace phonsub::cli

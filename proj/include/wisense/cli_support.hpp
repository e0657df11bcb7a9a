#ifndef WISENSE_CLI_SUPPORT_HPP
#define WISENSE_CLI_SUPPORT_HPP

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

// Flat key=value run configuration, deterministic CSV/SVG artifact emission,
// and output-directory bookkeeping shared by the command-line tool.

namespace wisense {
namespace cli {

inline constexpr const char* kToolVersion = "0.1.0";

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

// Flat key=value configuration with '#' comments. Typed getters materialize
// their defaults, so after a subcommand has pulled everything it needs the
// config holds the fully resolved settings; reject_unknown() then flags any
// key the subcommand never asked for.
struct RunConfig {
  std::map<std::string, std::string> values;
  mutable std::set<std::string> accessed;

  static RunConfig parse_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw config_error("config line " + std::to_string(line_no) +
                           ": expected key=value, got '" + line + "'");
      const std::string key = detail::trim(line.substr(0, eq));
      const std::string val = detail::trim(line.substr(eq + 1));
      if (key.empty())
        throw config_error("config line " + std::to_string(line_no) +
                           ": empty key");
      if (!cfg.values.emplace(key, val).second)
        throw config_error("config line " + std::to_string(line_no) +
                           ": duplicate key '" + key + "'");
    }
    return cfg;
  }

  static RunConfig parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot open config file " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_text(ss.str());
  }

  const std::string& raw(const std::string& key,
                         const std::string& fallback) const {
    accessed.insert(key);
    auto it = values.find(key);
    if (it == values.end())
      it = const_cast<std::map<std::string, std::string>&>(values)
               .emplace(key, fallback)
               .first;
    return it->second;
  }

  std::string get_string(const std::string& key,
                         const std::string& fallback) const {
    return raw(key, fallback);
  }

  double get_double(const std::string& key, double fallback) const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", fallback);
    const std::string& s = raw(key, buf);
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw config_error("config key '" + key + "': not a number: '" + s +
                         "'");
    }
  }

  long long get_int(const std::string& key, long long fallback) const {
    const std::string& s = raw(key, std::to_string(fallback));
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw config_error("config key '" + key + "': not an integer: '" + s +
                         "'");
    }
  }

  bool get_bool(const std::string& key, bool fallback) const {
    const std::string& s = raw(key, fallback ? "true" : "false");
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw config_error("config key '" + key + "': expected true/false: '" + s +
                       "'");
  }

  // Every present key must have been requested by the active subcommand.
  void reject_unknown() const {
    std::vector<std::string> unknown;
    for (const auto& [k, v] : values)
      if (!accessed.count(k)) unknown.push_back(k);
    if (unknown.empty()) return;
    std::string msg = "unknown config key(s):";
    for (const auto& k : unknown) msg += " '" + k + "'";
    throw config_error(msg);
  }

  std::string dump() const {
    std::string out = "# wisense ";
    out += kToolVersion;
    out += "\n";
    for (const auto& [k, v] : values) out += k + "=" + v + "\n";
    return out;
  }
};

// ---- output directory bookkeeping ----

// Creates the output directory, drops a run.incomplete marker, and removes
// the marker plus writes the resolved config on commit(). A run that aborts
// leaves the marker behind.
class OutputDir {
 public:
  explicit OutputDir(const std::string& path) : dir_(path) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec)
      throw std::runtime_error("cannot create output directory " + path +
                               ": " + ec.message());
    std::ofstream marker(marker_path());
    if (!marker)
      throw std::runtime_error("output directory not writable: " + path);
    marker << "run in progress\n";
  }

  const std::filesystem::path& path() const { return dir_; }

  std::string file(const std::string& name) const {
    return (dir_ / name).string();
  }

  void commit(const RunConfig& cfg) {
    std::ofstream os(file("config.resolved"));
    if (!os) throw std::runtime_error("cannot write resolved config");
    os << cfg.dump();
    os.close();
    std::filesystem::remove(marker_path());
  }

 private:
  std::filesystem::path marker_path() const { return dir_ / "run.incomplete"; }
  std::filesystem::path dir_;
};

// ---- deterministic CSV ----

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(const std::string& path,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::ofstream os(path, std::ios::binary);  // binary: byte-stable newlines
  if (!os) throw std::runtime_error("cannot write " + path);
  for (std::size_t i = 0; i < header.size(); ++i)
    os << (i ? "," : "") << header[i];
  os << "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::invalid_argument("write_csv: ragged row in " + path);
    for (std::size_t i = 0; i < row.size(); ++i)
      os << (i ? "," : "") << row[i];
    os << "\n";
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
      if (ch == ',') {
        out.push_back(cur);
        cur.clear();
      } else if (ch != '\r') {
        cur += ch;
      }
    }
    out.push_back(cur);
    return out;
  };
  if (!std::getline(is, line)) throw std::runtime_error("empty CSV: " + path);
  t.header = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split(line));
    if (t.rows.back().size() != t.header.size())
      throw std::runtime_error("ragged CSV row in " + path);
  }
  return t;
}

// ---- SVG line plots ----

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

namespace detail {

inline std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace detail

// Self-contained deterministic SVG line plot; fixed palette and layout so
// identical inputs produce identical bytes.
inline void svg_line_plot(const std::string& path, const std::string& title,
                          const std::string& x_label,
                          const std::string& y_label,
                          const std::vector<PlotSeries>& series) {
  if (series.empty())
    throw std::invalid_argument("svg_line_plot: no series");
  for (const auto& s : series)
    if (s.points.empty())
      throw std::invalid_argument("svg_line_plot: empty series '" + s.label +
                                  "'");
  const int W = 720, H = 440;
  const int ml = 70, mr = 160, mt = 40, mb = 50;  // margins, legend at right
  double xmin = series[0].points[0].first, xmax = xmin;
  double ymin = series[0].points[0].second, ymax = ymin;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (xmax == xmin) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax == ymin) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double pw = W - ml - mr, ph = H - mt - mb;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                   "#9467bd", "#ff7f0e", "#8c564b"};
  const int n_colors = 6;

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
     << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H
     << "\">\n";
  os << "<rect width=\"" << W << "\" height=\"" << H
     << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << ml + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"15\">"
     << title << "</text>\n";

  // frame + ticks (5 per axis)
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\""
     << detail::fmt2(pw) << "\" height=\"" << detail::fmt2(ph)
     << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = xmin + (xmax - xmin) * i / 4.0;
    const double fy = ymin + (ymax - ymin) * i / 4.0;
    os << "<line x1=\"" << detail::fmt2(px(fx)) << "\" y1=\"" << mt + ph
       << "\" x2=\"" << detail::fmt2(px(fx)) << "\" y2=\"" << mt + ph + 5
       << "\" stroke=\"#333333\"/>\n";
    os << "<text x=\"" << detail::fmt2(px(fx)) << "\" y=\"" << mt + ph + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"11\">"
       << detail::fmt_tick(fx) << "</text>\n";
    os << "<line x1=\"" << ml - 5 << "\" y1=\"" << detail::fmt2(py(fy))
       << "\" x2=\"" << ml << "\" y2=\"" << detail::fmt2(py(fy))
       << "\" stroke=\"#333333\"/>\n";
    os << "<text x=\"" << ml - 8 << "\" y=\"" << detail::fmt2(py(fy) + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
          "font-size=\"11\">"
       << detail::fmt_tick(fy) << "</text>\n";
  }
  os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 12
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"12\">"
     << x_label << "</text>\n";
  os << "<text x=\"18\" y=\"" << mt + ph / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"12\" transform=\"rotate(-90 18 "
     << mt + ph / 2 << ")\">" << y_label << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const char* color = kPalette[si % n_colors];
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : series[si].points)
      os << detail::fmt2(px(x)) << "," << detail::fmt2(py(y)) << " ";
    os << "\"/>\n";
    const int ly = mt + 14 + static_cast<int>(si) * 18;
    os << "<line x1=\"" << W - mr + 12 << "\" y1=\"" << ly << "\" x2=\""
       << W - mr + 36 << "\" y2=\"" << ly << "\" stroke=\"" << color
       << "\" stroke-width=\"1.5\"/>\n";
    os << "<text x=\"" << W - mr + 42 << "\" y=\"" << ly + 4
       << "\" font-family=\"sans-serif\" font-size=\"12\">"
       << series[si].label << "</text>\n";
  }
  os << "</svg>\n";
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace cli
}  // namespace wisense

#endif  // WISENSE_CLI_SUPPORT_HPP

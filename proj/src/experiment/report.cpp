#include "rlab/experiment/report.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "rlab/common/error.hpp"

namespace rlab::experiment {

namespace {

// Shortest representation that round-trips.
std::string num(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string fixed(double x, int digits) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, digits);
  return std::string(buf, res.ptr);
}

std::string xml_escape(const std::string& s) {
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

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

ReportFormat parse_report_format(const std::string& name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  if (name == "svg") return ReportFormat::Svg;
  throw ConfigError("unknown report format '" + name + "' (expected csv, json or svg)");
}

std::string report_csv(const RunReport& report) {
  std::string out = "arm,batch,bleu,seconds\n";
  for (const auto& arm : report.arms) {
    for (const auto& p : arm.points) {
      out += arm.label + "," + std::to_string(p.batch) + "," + num(p.bleu) + "," + num(p.seconds) + "\n";
    }
  }
  return out;
}

std::string report_json(const RunReport& report) { return to_json(report).dump(2) + "\n"; }

std::string report_svg(const RunReport& report) {
  const double width = 640, height = 400, left = 60, right = 150, top = 30, bottom = 50;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  std::size_t max_batch = 1;
  for (const auto& a : report.arms) {
    for (const auto& p : a.points) max_batch = std::max(max_batch, p.batch);
  }
  auto sx = [&](double b) { return left + plot_w * b / static_cast<double>(max_batch); };
  auto sy = [&](double v) { return top + plot_h * (1.0 - std::clamp(v, 0.0, 1.0)); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  os << "<title>BLEU by batch</title>\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  os << "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
     << top + plot_h << "\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h << "\"/>\n";
  os << "</g>\n<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i <= 5; ++i) {
    const double v = i / 5.0;
    os << "<text x=\"" << left - 8 << "\" y=\"" << fixed(sy(v) + 4, 2) << "\" text-anchor=\"end\">" << fixed(v, 1)
       << "</text>\n";
  }
  for (std::size_t b = 0; b <= max_batch; ++b) {
    os << "<text x=\"" << fixed(sx(static_cast<double>(b)), 2) << "\" y=\"" << top + plot_h + 16
       << "\" text-anchor=\"middle\">" << b << "</text>\n";
  }
  os << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">batch</text>\n";
  os << "<text x=\"16\" y=\"" << top + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << top + plot_h / 2 << ")\">BLEU</text>\n";
  os << "</g>\n";
  for (std::size_t i = 0; i < report.arms.size(); ++i) {
    const auto& arm = report.arms[i];
    const char* color = kPalette[i % std::size(kPalette)];
    os << "<polyline class=\"arm\" data-arm=\"" << xml_escape(arm.label) << "\" fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < arm.points.size(); ++k) {
      if (k) os << ' ';
      os << fixed(sx(static_cast<double>(arm.points[k].batch)), 2) << ',' << fixed(sy(arm.points[k].bleu), 2);
    }
    os << "\"/>\n";
    const double ly = top + 14.0 + 18.0 * static_cast<double>(i);
    os << "<text x=\"" << left + plot_w + 12 << "\" y=\"" << ly << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\""
       << color << "\">" << xml_escape(arm.label) << "</text>\n";
  }
  if (report.partial) {
    os << "<text x=\"" << left + 8 << "\" y=\"" << top + 14
       << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#d62728\">partial run</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<std::filesystem::path> emit_report(const RunReport& report, const std::filesystem::path& dir,
                                               const std::set<ReportFormat>& formats) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  for (auto f : formats) {
    std::filesystem::path path;
    switch (f) {
      case ReportFormat::Csv:
        path = dir / "report.csv";
        write_file(path, report_csv(report));
        break;
      case ReportFormat::Json:
        path = dir / "report.json";
        write_file(path, report_json(report));
        break;
      case ReportFormat::Svg:
        path = dir / "report.svg";
        write_file(path, report_svg(report));
        break;
    }
    written.push_back(path);
  }
  return written;
}

RunReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return report_from_json(j);
}

}  // namespace rlab::experiment

#include "coloc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "coloc/calib.hpp"
#include "coloc/error.hpp"
#include "coloc/kernels/kernels.hpp"

namespace coloc::eval {

namespace fs = std::filesystem;

AteResult ate(const Trajectory& est, const Trajectory& ref, double max_dt) {
  if (est.empty() || ref.empty()) {
    throw Error(ErrorCode::kInsufficientData, "ate: empty trajectory");
  }
  const auto pairs = calib::associate(est, ref, max_dt);
  if (pairs.size() < 2) {
    throw Error(ErrorCode::kInsufficientData,
                "ate: " + std::to_string(pairs.size()) + " associated pairs, need 2");
  }
  const std::size_t n = pairs.size();
  std::vector<double> ex(n), ey(n), ez(n), rx(n), ry(n), rz(n);
  AteResult out;
  out.series.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& e = est[pairs[i].index_a].pose.translation;
    const Vec3& r = ref[pairs[i].index_b].pose.translation;
    ex[i] = e.x(), ey[i] = e.y(), ez[i] = e.z();
    rx[i] = r.x(), ry[i] = r.y(), rz[i] = r.z();
    out.series.push_back({est[pairs[i].index_a].t, e - r});
  }
  out.sample_count = n;
  out.sum_squared = kernels::sum_squared_distance(ex, ey, ez, rx, ry, rz);
  out.rmse = std::sqrt(out.sum_squared / static_cast<double>(n));
  return out;
}

double ate_rmse(const Trajectory& est, const Trajectory& ref, double max_dt) {
  return ate(est, ref, max_dt).rmse;
}

double ate_rmse_aligned(const Trajectory& est, const Trajectory& ref, double max_dt) {
  const auto pairs = calib::associate(est, ref, max_dt);
  std::vector<Vec3> a, b;
  for (const auto& p : pairs) {
    a.push_back(est[p.index_a].pose.translation);
    b.push_back(ref[p.index_b].pose.translation);
  }
  const Pose align = calib::umeyama_align(a, b);
  Trajectory moved = est;
  for (auto& s : moved.samples) s.pose = compose(align, s.pose);
  return ate_rmse(moved, ref, max_dt);
}

std::vector<double> speed_signal(const Trajectory& traj, double t0, std::size_t n, double rate) {
  std::vector<double> x(n), y(n), z(n);
  const auto& s = traj.samples;
  std::size_t j = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = t0 + static_cast<double>(k) / rate;
    while (j + 1 < s.size() && s[j + 1].t <= t) ++j;
    Vec3 p;
    if (t <= s.front().t) {
      p = s.front().pose.translation;
    } else if (j + 1 >= s.size()) {
      p = s.back().pose.translation;
    } else {
      const double u = (t - s[j].t) / (s[j + 1].t - s[j].t);
      p = s[j].pose.translation + u * (s[j + 1].pose.translation - s[j].pose.translation);
    }
    x[k] = p.x(), y[k] = p.y(), z[k] = p.z();
  }
  return kernels::step_lengths(x, y, z);
}

LatencyEstimate estimate_latency(const Trajectory& sig_a, const Trajectory& sig_b, double rate,
                                 int max_lag_frames) {
  if (!(rate > 0.0) || max_lag_frames < 0) {
    throw Error(ErrorCode::kInvalidArgument, "estimate_latency: rate must be > 0, max_lag >= 0");
  }
  if (sig_a.size() < 2 || sig_b.size() < 2) {
    throw Error(ErrorCode::kInsufficientData, "estimate_latency: need at least two samples per signal");
  }
  const double t0 = std::max(sig_a.samples.front().t, sig_b.samples.front().t);
  const double t1 = std::min(sig_a.samples.back().t, sig_b.samples.back().t);
  if (!(t1 > t0)) throw Error(ErrorCode::kInsufficientData, "estimate_latency: signals do not overlap");
  const auto n = static_cast<std::size_t>(std::floor((t1 - t0) * rate + 1e-9)) + 1;

  const auto speed_a = speed_signal(sig_a, t0, n, rate);
  const auto speed_b = speed_signal(sig_b, t0, n, rate);
  const std::size_t m = speed_a.size();
  const auto max_lag = static_cast<std::size_t>(max_lag_frames);
  if (m < max_lag + 10) {
    throw Error(ErrorCode::kInsufficientData, "estimate_latency: overlap too short for max_lag");
  }

  for (const auto* sig : {&speed_a, &speed_b}) {
    const double mean = kernels::sum(*sig) / static_cast<double>(m);
    const auto mom = kernels::centered_moments(*sig, *sig, mean, mean);
    if (mom.var_a / static_cast<double>(m) < 1e-12) {
      throw Error(ErrorCode::kUndefinedCorrelation, "estimate_latency: speed signal is near-constant");
    }
  }

  constexpr double kTieTolerance = 1e-12;
  LatencyEstimate best;
  best.rate = rate;
  best.peak_correlation = -std::numeric_limits<double>::infinity();
  for (int lag = -max_lag_frames; lag <= max_lag_frames; ++lag) {
    const std::size_t shift = static_cast<std::size_t>(std::abs(lag));
    const std::size_t len = m - shift;
    std::span<const double> a(speed_a.data() + (lag < 0 ? shift : 0), len);
    std::span<const double> b(speed_b.data() + (lag > 0 ? shift : 0), len);
    const double mean_a = kernels::sum(a) / static_cast<double>(len);
    const double mean_b = kernels::sum(b) / static_cast<double>(len);
    const auto mom = kernels::centered_moments(a, b, mean_a, mean_b);
    if (!(mom.var_a > 0.0 && mom.var_b > 0.0)) continue;
    const double c = mom.cross / std::sqrt(mom.var_a * mom.var_b);
    if (c > best.peak_correlation + kTieTolerance) {
      best.peak_correlation = c;
      best.lag_frames = lag;
      best.tie = false;
    } else if (std::abs(c - best.peak_correlation) <= kTieTolerance) {
      best.tie = true;
      if (std::abs(lag) < std::abs(best.lag_frames)) {
        best.lag_frames = lag;
        best.peak_correlation = std::max(best.peak_correlation, c);
      }
    }
  }
  if (!std::isfinite(best.peak_correlation)) {
    throw Error(ErrorCode::kUndefinedCorrelation, "estimate_latency: no lag with defined correlation");
  }
  best.latency = best.lag_frames / rate;
  return best;
}

namespace {

nlohmann::json latency_json(const LatencyEstimate& l) {
  return {{"lag_frames", l.lag_frames},
          {"seconds", l.latency},
          {"rate_hz", l.rate},
          {"peak_correlation", l.peak_correlation},
          {"tie", l.tie}};
}

template <typename T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string stem(const MetricsReport& r) { return r.scenario + "_" + std::to_string(r.seed); }

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  }
  return s;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open for writing: " + path.string());
  return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

// Minimal SVG polyline canvas with a fixed 640 x 640 viewport.
class SvgCanvas {
 public:
  struct Line {
    std::string color;
    std::string label;
    std::vector<std::pair<double, double>> points;
    bool dashed = false;
  };
  struct Marker {
    double x, y;
    std::string label;
  };

  void add_line(Line line) { lines_.push_back(std::move(line)); }
  void add_marker(Marker m) { markers_.push_back(std::move(m)); }

  void write(const fs::path& path, const std::string& title, const std::string& x_label,
             const std::string& y_label) const {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    auto extend = [&](double x, double y) {
      x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
    };
    for (const auto& l : lines_) {
      for (const auto& [x, y] : l.points) extend(x, y);
    }
    for (const auto& m : markers_) extend(m.x, m.y);
    if (!std::isfinite(x0)) x0 = y0 = -1.0, x1 = y1 = 1.0;
    const double span = std::max({x1 - x0, y1 - y0, 1e-3}) * 1.1;
    const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
    constexpr double kSize = 640.0, kMargin = 48.0;
    const double scale = (kSize - 2 * kMargin) / span;
    auto sx = [&](double x) { return kSize / 2 + (x - cx) * scale; };
    auto sy = [&](double y) { return kSize / 2 - (y - cy) * scale; };

    auto out = open_out(path);
    char buf[256];
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" viewBox=\"0 0 640 640\">\n";
    out << "<rect width=\"640\" height=\"640\" fill=\"white\"/>\n";
    out << "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
        << title << "</text>\n";
    out << "<text x=\"320\" y=\"630\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << x_label << "</text>\n";
    out << "<text x=\"14\" y=\"320\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
           "transform=\"rotate(-90 14 320)\">"
        << y_label << "</text>\n";
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" stroke=\"#ccc\"/>\n",
                  kMargin, kMargin, kSize - 2 * kMargin, kSize - 2 * kMargin);
    out << buf;
    int legend_y = 44;
    for (const auto& l : lines_) {
      out << "<polyline class=\"" << sanitize(l.label) << "\" fill=\"none\" stroke=\"" << l.color
          << "\" stroke-width=\"1.5\"" << (l.dashed ? " stroke-dasharray=\"6 3\"" : "") << " points=\"";
      for (std::size_t i = 0; i < l.points.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%s%.2f,%.2f", i ? " " : "", sx(l.points[i].first),
                      sy(l.points[i].second));
        out << buf;
      }
      out << "\"/>\n";
      std::snprintf(buf, sizeof(buf),
                    "<text x=\"56\" y=\"%d\" font-family=\"sans-serif\" font-size=\"11\" fill=\"%s\">%s</text>\n",
                    legend_y, l.color.c_str(), l.label.c_str());
      out << buf;
      legend_y += 14;
    }
    for (const auto& m : markers_) {
      std::snprintf(buf, sizeof(buf),
                    "<circle class=\"contact\" cx=\"%.2f\" cy=\"%.2f\" r=\"5\" fill=\"none\" stroke=\"green\"/>"
                    "<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"11\">%s</text>\n",
                    sx(m.x), sy(m.y), sx(m.x) + 7, sy(m.y) - 7, m.label.c_str());
      out << buf;
    }
    out << "</svg>\n";
    close_out(out, path);
  }

 private:
  std::vector<Line> lines_;
  std::vector<Marker> markers_;
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string color_for(std::size_t index, const std::string& role) {
  if (role == "ref") return index % 2 ? "#555555" : "#000000";
  return kPalette[index % std::size(kPalette)];
}

// Plot downsampling keeps files small; every 5th sample at 100 Hz.
constexpr std::size_t kPlotStride = 5;

std::pair<double, double> top_down(const Vec3& p) { return {p.x(), p.z()}; }

std::pair<double, double> oblique(const Vec3& p) {
  // Cabinet-style projection: x right, y up, z receding at 30 degrees.
  return {p.x() + 0.5 * 0.8660254037844386 * p.z(), p.y() + 0.5 * 0.5 * p.z()};
}

template <typename Project>
SvgCanvas::Line to_line(const PlotSeries& s, std::size_t index, double t_begin, double t_end,
                        Project project) {
  SvgCanvas::Line line{color_for(index, s.role), s.name + " (" + s.role + ")", {}, s.role == "ref"};
  std::size_t count = 0;
  for (const auto& sample : s.trajectory.samples) {
    if (sample.t < t_begin || sample.t > t_end) continue;
    if (count++ % kPlotStride == 0) line.points.push_back(project(sample.pose.translation));
  }
  return line;
}

}  // namespace

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json j;
  j["schema_version"] = kMetricsSchemaVersion;
  j["scenario"] = scenario;
  j["seed"] = seed;
  j["ate_rmse_m"] = ate_rmse;
  j["sample_count"] = sample_count;
  j["ate_rmse_latency_compensated_m"] = optional_json(ate_rmse_latency_compensated);
  j["latency"] = latency ? latency_json(*latency) : nlohmann::json(nullptr);
  auto& list = j["trajectories"] = nlohmann::json::array();
  for (const auto& e : entries) {
    list.push_back({{"name", e.name},
                    {"ate_rmse_m", e.ate.rmse},
                    {"sample_count", e.ate.sample_count},
                    {"ate_rmse_latency_compensated_m", optional_json(e.ate_latency_compensated)},
                    {"ate_rmse_aligned_m", optional_json(e.ate_aligned)},
                    {"error_series_csv", stem(*this) + "_" + sanitize(e.name) + "_errors.csv"}});
  }
  auto& contact_list = j["contacts"] = nlohmann::json::array();
  for (const auto& c : contacts) {
    contact_list.push_back({{"t", c.t}, {"point", {c.point.x(), c.point.y(), c.point.z()}}});
  }
  j["config"] = config;
  j["extra"] = extra;
  return j;
}

std::vector<fs::path> export_report(const MetricsReport& report, std::span<const PlotSeries> series,
                                    const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<fs::path> written;
  const std::string base = stem(report);

  const fs::path json_path = out_dir / (base + ".json");
  {
    auto out = open_out(json_path);
    out << report.to_json().dump(2) << '\n';
    close_out(out, json_path);
  }
  written.push_back(json_path);

  for (const auto& e : report.entries) {
    const fs::path path = out_dir / (base + "_" + sanitize(e.name) + "_errors.csv");
    auto out = open_out(path);
    out << "t,ex,ey,ez\n";
    char line[160];
    for (const auto& s : e.ate.series) {
      std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g\n", s.t, s.error.x(), s.error.y(), s.error.z());
      out << line;
    }
    close_out(out, path);
    written.push_back(path);
  }

  if (series.empty()) return written;

  for (const auto& s : series) {
    const fs::path path = out_dir / (base + "_" + sanitize(s.name) + "_" + sanitize(s.role) + ".csv");
    write_trajectory_csv(path, s.trajectory);
    written.push_back(path);
  }

  constexpr double kAll = std::numeric_limits<double>::infinity();
  if (report.contacts.empty()) {
    SvgCanvas canvas;
    for (std::size_t i = 0; i < series.size(); ++i) canvas.add_line(to_line(series[i], i, -kAll, kAll, top_down));
    const fs::path path = out_dir / (base + "_topdown.svg");
    canvas.write(path, report.scenario + " seed " + std::to_string(report.seed) + " (top-down)", "x [m]", "z [m]");
    written.push_back(path);
    return written;
  }

  constexpr double kEventWindow = 1.0;  // seconds either side of a contact
  for (std::size_t e = 0; e < report.contacts.size(); ++e) {
    const auto& c = report.contacts[e];
    const std::string label = "event" + std::to_string(e + 1);
    SvgCanvas view3d, view_top;
    for (std::size_t i = 0; i < series.size(); ++i) {
      view3d.add_line(to_line(series[i], i, c.t - kEventWindow, c.t + kEventWindow, oblique));
      view_top.add_line(to_line(series[i], i, c.t - kEventWindow, c.t + kEventWindow, top_down));
    }
    const auto p3 = oblique(c.point);
    const auto pt = top_down(c.point);
    view3d.add_marker({p3.first, p3.second, "contact"});
    view_top.add_marker({pt.first, pt.second, "contact"});
    const fs::path p3d = out_dir / (base + "_" + label + "_3d.svg");
    const fs::path ptop = out_dir / (base + "_" + label + "_topdown.svg");
    view3d.write(p3d, report.scenario + " " + label + " (3D)", "x / z (oblique) [m]", "y [m]");
    view_top.write(ptop, report.scenario + " " + label + " (top-down)", "x [m]", "z [m]");
    written.push_back(p3d);
    written.push_back(ptop);
  }
  return written;
}

}  // namespace coloc::eval

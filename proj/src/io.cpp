#include "qising/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace qising {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {
double parse_double(const std::string& tok, const std::string& context) {
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    throw UsageError("malformed number '" + tok + "' in " + context);
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string tok;
  std::stringstream ss(line);
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}
}  // namespace

void write_series_csv(const std::filesystem::path& path, const TimeSeries& s) {
  s.validate();
  std::ofstream f = open_out(path);
  f << "t_mcs,value,stderr,variant,n_sites,mode\n";
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    f << format_double(s.times[i]) << ',' << format_double(s.values[i]) << ',';
    if (!s.stderrs.empty()) f << format_double(s.stderrs[i]);
    f << ',' << s.variant << ',' << s.n_sites << ',' << s.mode << '\n';
  }
}

TimeSeries read_series_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read series file " + path.string());
  TimeSeries s;
  std::string line;
  if (!std::getline(f, line) || line.rfind("t_mcs,", 0) != 0)
    throw UsageError("series file " + path.string() + " lacks the expected header");
  bool any_stderr = false;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto tok = split_csv_line(line);
    if (tok.size() < 6) throw UsageError("short row in " + path.string());
    s.times.push_back(parse_double(tok[0], path.string()));
    s.values.push_back(parse_double(tok[1], path.string()));
    if (!tok[2].empty()) {
      any_stderr = true;
      s.stderrs.push_back(parse_double(tok[2], path.string()));
    } else {
      s.stderrs.push_back(0.0);
    }
    s.variant = tok[3];
    s.n_sites = static_cast<int>(parse_double(tok[4], path.string()));
    s.mode = tok[5];
  }
  if (!any_stderr) s.stderrs.clear();
  s.validate();
  return s;
}

void write_grid_csv(const std::filesystem::path& path, const HammingClassGrid& g) {
  std::ofstream f = open_out(path);
  f << "c,a,b,mean_abs,mean_real,count\n";
  for (int c = 0; c <= g.c_max(); ++c)
    for (int a = 0; a <= g.n_sites(); ++a)
      for (int b = 0; b <= g.n_sites(); ++b)
        f << c << ',' << a << ',' << b << ',' << format_double(g.mean_abs(c, a, b))
          << ',' << format_double(g.mean_real(c, a, b)) << ','
          << g.population(c, a, b) << '\n';
}

void write_matrix_csv(const std::filesystem::path& path, const double* data,
                      int rows, int cols) {
  std::ofstream f = open_out(path);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c) f << ',';
      f << format_double(data[r * cols + c]);
    }
    f << '\n';
  }
}

Mat4 read_x_matrix_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read X matrix file " + path.string());
  Mat4 m;
  std::string line;
  int r = 0;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    if (r >= 4) throw UsageError("X matrix file has more than 4 rows");
    const auto tok = split_csv_line(line);
    if (tok.size() != 4)
      throw UsageError("X matrix row " + std::to_string(r + 1) +
                       " does not have 4 columns");
    for (int c = 0; c < 4; ++c) m(r, c) = parse_double(tok[static_cast<std::size_t>(c)], path.string());
    ++r;
  }
  if (r != 4) throw UsageError("X matrix file has fewer than 4 rows");
  return m;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot digest missing file " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (f.read(buf, sizeof(buf)) || f.gcount() > 0) {
    const std::streamsize got = f.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (!f) break;
  }
  return h;
}

std::string fnv1a64_hex(std::uint64_t digest) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(digest));
  return std::string(buf);
}

std::string scaling_fit_report_json(
    const ScalingFit& fit, const std::vector<std::string>& input_names,
    const std::vector<std::uint64_t>& input_digests) {
  nlohmann::ordered_json j;
  j["regime"] = fit.regime == Regime::Short ? "short" : "long";
  j["exponent"] = fit.exponent;
  j["exponent_stderr"] = fit.exponent_se;
  j["rate"] = fit.rate;
  j["rate_stderr"] = fit.rate_se;
  j["collapse_score"] = fit.collapse_score;
  j["iterations"] = fit.iterations;
  nlohmann::ordered_json windows = nlohmann::ordered_json::object();
  for (const auto& [n, w] : fit.windows)
    windows[std::to_string(n)] = {{"t_min", w.t_min}, {"t_max", w.t_max}};
  j["windows"] = windows;
  nlohmann::ordered_json curves = nlohmann::ordered_json::array();
  for (const CurveSummary& c : fit.curves)
    curves.push_back({{"n_sites", c.n_sites},
                      {"intercept", c.intercept},
                      {"slope", c.slope},
                      {"intercept_stderr", c.intercept_se},
                      {"slope_stderr", c.slope_se},
                      {"n_points", c.n_points},
                      {"n_excluded", c.n_excluded}});
  j["curves"] = curves;
  nlohmann::ordered_json inputs = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < input_names.size(); ++i)
    inputs.push_back({{"file", input_names[i]},
                      {"fnv1a64", fnv1a64_hex(input_digests[i])}});
  j["inputs"] = inputs;
  return j.dump(2) + "\n";
}

}  // namespace qising

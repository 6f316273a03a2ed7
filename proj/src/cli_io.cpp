#include "bmconc/cli_io.hpp"

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bmconc/geometry.hpp"

namespace bmconc {

namespace {

[[noreturn]] void syntax_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::SyntaxError, "line " + std::to_string(line) + ": " + what);
}

std::string_view trim(std::string_view s) {
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t k = 0;
  while (k < s.size()) {
    while (k < s.size() && (s[k] == ' ' || s[k] == '\t')) ++k;
    std::size_t start = k;
    while (k < s.size() && s[k] != ' ' && s[k] != '\t') ++k;
    if (k > start) out.push_back(s.substr(start, k - start));
  }
  return out;
}

double parse_number(std::string_view tok, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    syntax_error(line, "'" + std::string(tok) + "' is not a number");
  return v;
}

std::vector<double> parse_numbers(std::string_view text, std::size_t count, std::size_t line,
                                  const char* what) {
  auto toks = tokens(text);
  if (toks.size() != count)
    syntax_error(line, std::string("expected ") + std::to_string(count) + " " + what + ", found " +
                           std::to_string(toks.size()));
  std::vector<double> out;
  out.reserve(count);
  for (auto tok : toks) out.push_back(parse_number(tok, line));
  return out;
}

Json number_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? Json("inf") : Json("-inf");
  return Json(v);
}

Json indices_json(const std::vector<std::size_t>& idx) {
  Json a = Json::array();
  for (auto i : idx) a.push_back(i);
  return a;
}

Json coefficient_json(const InfCoefficient& c, double tau) {
  Json j;
  j["tau"] = tau;
  j["value"] = to_json(c.value);
  j["witness"] = Json::array({c.i, c.j});
  return j;
}

}  // namespace

const std::string* SpaceFile::find(std::string_view key) const {
  for (const auto& [k, v] : metadata)
    if (k == key) return &v;
  return nullptr;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string emit_space(const MetricMeasureSpace& space, const SpaceMetadata& metadata) {
  const std::size_t n = space.size();
  std::string out;
  out.reserve(n * n * 24 + 64);
  out += kSpaceFormatVersion;
  out += '\n';
  out += std::to_string(n);
  out += '\n';
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += space.labels()[i];
  }
  out += '\n';
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += format_double(space.weight(i));
  }
  out += '\n';
  for (std::size_t i = 0; i < n; ++i) {
    auto row = space.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j) out += ' ';
      out += format_double(row[j]);
    }
    out += '\n';
  }
  for (const auto& [k, v] : metadata) out += "# " + k + " " + v + "\n";
  return out;
}

SpaceFile parse_space_file(std::string_view text) {
  std::vector<std::string_view> lines;
  for (std::size_t start = 0; start <= text.size();) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  auto line_at = [&](std::size_t k, const char* what) -> std::string_view {
    if (k >= lines.size()) syntax_error(k + 1, std::string("missing ") + what);
    return trim(lines[k]);
  };

  if (line_at(0, "format header") != kSpaceFormatVersion)
    syntax_error(1, "expected format header '" + std::string(kSpaceFormatVersion) + "'");

  std::string_view size_text = line_at(1, "point count");
  std::size_t n = 0;
  auto [ptr, ec] = std::from_chars(size_text.data(), size_text.data() + size_text.size(), n);
  if (ec != std::errc() || ptr != size_text.data() + size_text.size() || n == 0)
    syntax_error(2, "point count must be a positive integer");

  RawSpace raw;
  auto labels = tokens(line_at(2, "labels"));
  if (labels.size() != n)
    syntax_error(3, "expected " + std::to_string(n) + " labels, found " + std::to_string(labels.size()));
  for (auto l : labels) raw.labels.emplace_back(l);
  raw.weights = parse_numbers(line_at(3, "weights"), n, 4, "weights");
  raw.dist.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = parse_numbers(line_at(4 + i, "distance row"), n, 5 + i, "distances");
    raw.dist.insert(raw.dist.end(), row.begin(), row.end());
  }

  SpaceMetadata metadata;
  for (std::size_t k = 4 + n; k < lines.size(); ++k) {
    std::string_view l = trim(lines[k]);
    if (l.empty()) continue;
    if (l.front() != '#') syntax_error(k + 1, "unexpected content after the distance matrix");
    l = trim(l.substr(1));
    if (l.empty()) continue;
    std::size_t cut = l.find_first_of(" \t");
    std::string key(l.substr(0, cut));
    std::string value = cut == std::string_view::npos ? std::string() : std::string(trim(l.substr(cut)));
    metadata.emplace_back(std::move(key), std::move(value));
  }
  return {validate_space(std::move(raw)), std::move(metadata)};
}

MetricMeasureSpace parse_space(std::string_view text) { return parse_space_file(text).space; }

SpaceMetadata discretization_metadata(const DiscretizationResult& d) {
  double stderr_max = 0.0;
  for (double e : d.weight_stderr) stderr_max = std::max(stderr_max, e);
  return {
      {"source", "discretize-sphere"},
      {"sphere_dimension", std::to_string(d.m)},
      {"seed", std::to_string(d.seed)},
      {"mc_samples", std::to_string(d.mc_samples)},
      {"cloud_size", std::to_string(d.cloud_size)},
      {"covering_radius", format_double(d.covering_radius)},
      {"mc_covering_radius", format_double(d.mc_covering_radius)},
      {"weight_stderr_max", format_double(stderr_max)},
      {"weight_stderr_budget", format_double(d.stderr_budget())},
  };
}

Json to_json(const Subset& s) { return indices_json(s.indices()); }

Json to_json(ExtendedReal v) { return number_or_inf(v.value()); }

Json to_json(const BMCheckResult& r) {
  Json j;
  j["t"] = r.t;
  j["a0"] = to_json(r.a0);
  j["a1"] = to_json(r.a1);
  j["intermediate"] = to_json(r.intermediate);
  j["lhs"] = r.lhs;
  j["rhs"] = to_json(r.rhs);
  j["gap"] = number_or_inf(r.gap);
  j["satisfied"] = r.satisfied;
  j["coeff0"] = coefficient_json(r.coeff0, 1.0 - r.t);
  j["coeff1"] = coefficient_json(r.coeff1, r.t);
  return j;
}

Json to_json(const BMVerifyReport& r) {
  Json j;
  Json strategy;
  if (r.strategy.kind == VerifyStrategy::Kind::Exhaustive) {
    strategy["kind"] = "exhaustive";
  } else {
    strategy["kind"] = "sampled";
    strategy["sampler"] = r.strategy.sampler.name();
    strategy["pair_count"] = r.strategy.pair_count;
    strategy["seed"] = r.strategy.seed;
  }
  j["strategy"] = strategy;
  j["eps"] = r.config.eps;
  j["n"] = r.config.n;
  j["t_values"] = r.config.t_values;
  j["tol_report"] = r.config.tol_report;
  j["checked_count"] = r.checked_count;
  j["violation_count"] = r.violation_count;
  j["refuted"] = r.refuted();
  if (r.lemma_shortcircuit)
    j["lemma_shortcircuit"] = Json{{"i", r.lemma_shortcircuit->i},
                                   {"j", r.lemma_shortcircuit->j},
                                   {"distance", r.lemma_shortcircuit->distance}};
  else
    j["lemma_shortcircuit"] = nullptr;
  j["worst"] = r.worst ? to_json(*r.worst) : Json(nullptr);
  return j;
}

Json to_json(const ConcentrationProfile& p) {
  Json j;
  j["n"] = p.n;
  j["strategy"] = to_string(p.strategy);
  j["space_size"] = p.space_size;
  j["diameter"] = p.space_diameter;
  Json entries = Json::array();
  for (const auto& e : p.entries) {
    Json row;
    row["r"] = e.r;
    row["r_evaluated"] = e.r_evaluated;
    row["alpha"] = e.alpha;
    row["exactness"] = to_string(e.exactness);
    row["bound_thm1"] = e.bound_thm1;
    row["bound_improved"] = e.bound_improved ? Json(*e.bound_improved) : Json(nullptr);
    entries.push_back(row);
  }
  j["entries"] = entries;
  j["bound_exceedances"] = indices_json(p.bound_exceedances());
  return j;
}

Json to_json(const DiscretizationResult& d) {
  Json j;
  j["sphere_dimension"] = d.m;
  j["center_count"] = d.space.size();
  j["covering_radius"] = d.covering_radius;
  j["mc_covering_radius"] = d.mc_covering_radius;
  j["diameter"] = diameter(d.space);
  j["cloud_size"] = d.cloud_size;
  j["mc_samples"] = d.mc_samples;
  j["seed"] = d.seed;
  const auto& w = d.space.weights();
  j["weight_min"] = *std::min_element(w.begin(), w.end());
  j["weight_max"] = *std::max_element(w.begin(), w.end());
  j["weight_stderr_max"] = *std::max_element(d.weight_stderr.begin(), d.weight_stderr.end());
  j["weight_stderr_budget"] = d.stderr_budget();
  j["center_indices"] = indices_json(d.center_indices);
  return j;
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "json") return ReportFormat::Json;
  if (name == "csv") return ReportFormat::Csv;
  throw Error(ErrorCode::UnsupportedFormat, "format must be json or csv, got '" + name + "'");
}

std::string profile_csv(const ConcentrationProfile& profile) {
  std::string out = "r,alpha,exactness,bound_thm1,bound_improved\n";
  for (const auto& e : profile.entries) {
    out += format_double(e.r) + "," + format_double(e.alpha) + "," + to_string(e.exactness) + "," +
           format_double(e.bound_thm1) + "," + (e.bound_improved ? format_double(*e.bound_improved) : "") + "\n";
  }
  return out;
}

std::string emit_report(const RunReport& report, ReportFormat format) {
  if (format == ReportFormat::Csv) {
    if (const auto* p = std::get_if<ConcentrationProfile>(&report.payload)) return profile_csv(*p);
    throw Error(ErrorCode::UnsupportedFormat, "csv output is only available for concentration profiles");
  }
  Json j;
  j["command"] = report.command;
  j["parameters"] = report.parameters;
  j["results"] = std::visit(
      [](const auto& payload) -> Json {
        using T = std::decay_t<decltype(payload)>;
        if constexpr (std::is_same_v<T, std::monostate>)
          return nullptr;
        else if constexpr (std::is_same_v<T, Json>)
          return payload;
        else
          return to_json(payload);
      },
      report.payload);
  j["wall_time_s"] = report.wall_time_s;
  return j.dump(2) + "\n";
}

void write_file_atomic(const std::string& path, std::string_view contents) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::InvalidArgument, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorCode::InvalidArgument, "cannot rename onto " + path + ": " + ec.message());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace bmconc

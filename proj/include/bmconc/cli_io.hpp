#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "bmconc/bm_verifier.hpp"
#include "bmconc/concentration.hpp"
#include "bmconc/core.hpp"
#include "bmconc/discretize.hpp"

namespace bmconc {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kSpaceFormatVersion = "mms-1";

/// `# key value` lines that follow the distance rows of a space file.
using SpaceMetadata = std::vector<std::pair<std::string, std::string>>;

struct SpaceFile {
  MetricMeasureSpace space;
  SpaceMetadata metadata;

  /// Value of a metadata key, if present.
  const std::string* find(std::string_view key) const;
};

/// mms-1 text: "mms-1", N, N labels, N weights, N rows of N distances.
/// Numbers are written with 17 significant digits so parsing restores every
/// double bit for bit.
std::string emit_space(const MetricMeasureSpace& space, const SpaceMetadata& metadata = {});

/// Throws Error(SyntaxError) naming the 1-based line, or the validation error.
SpaceFile parse_space_file(std::string_view text);
MetricMeasureSpace parse_space(std::string_view text);

SpaceMetadata discretization_metadata(const DiscretizationResult& result);

/// 17-significant-digit decimal text.
std::string format_double(double v);

Json to_json(const Subset& s);
Json to_json(ExtendedReal v);
Json to_json(const BMCheckResult& r);
Json to_json(const BMVerifyReport& r);
Json to_json(const ConcentrationProfile& p);
Json to_json(const DiscretizationResult& d);

enum class ReportFormat { Json, Csv };
ReportFormat parse_report_format(const std::string& name);

/// Self-describing record of one CLI run.
struct RunReport {
  std::string command;
  Json parameters = Json::object();
  std::variant<std::monostate, BMVerifyReport, ConcentrationProfile, DiscretizationResult, Json> payload;
  double wall_time_s = 0.0;
};

/// JSON: {"command", "parameters", "results", "wall_time_s"} in that order.
/// CSV: only for ConcentrationProfile payloads; columns
/// r,alpha,exactness,bound_thm1,bound_improved. Throws UnsupportedFormat.
std::string emit_report(const RunReport& report, ReportFormat format);

std::string profile_csv(const ConcentrationProfile& profile);

/// Writes via a temporary sibling file and rename.
void write_file_atomic(const std::string& path, std::string_view contents);
std::string read_file(const std::string& path);

}  // namespace bmconc

#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "symkl/bounds.hpp"
#include "symkl/model.hpp"
#include "symkl/montecarlo.hpp"

namespace symkl::io {

inline constexpr const char* kToolVersion = "1.0.0";

/// Malformed input; `line` is 1-based, 0 when no line applies.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Counts CSV: two data rows (Y=1 counts, then Y=0 counts) of r columns, an
/// optional non-numeric header row of r names, '#' comments, blank lines.
CountTable parse_counts_csv(std::istream& in);

/// Shortest-form free, locale-independent rendering with 17 significant digits.
std::string format_real(double v);

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

inline constexpr const char* kRecordsHeader =
    "rep_index,n,estimate,eta,scaled_eta,sigma2_hat,ci_lo,ci_hi,covered,degenerate";

void write_records_csv(std::ostream& out, const std::vector<ReplicationRecord>& records);
void write_bounds_csv(std::ostream& out, const std::vector<BoundRow>& rows);

nlohmann::json summary_to_json(const ExperimentResult* result, const std::vector<CheckOutcome>& checks);

struct RunManifest {
  nlohmann::json config;
  std::string command;
  std::string tool_version = kToolVersion;
  std::uint64_t master_seed = 0;
  std::string started_at;
  std::string finished_at;
  std::vector<CheckOutcome> checks;
};

nlohmann::json manifest_to_json(const RunManifest& manifest);

/// UTC timestamp in ISO 8601 form.
std::string utc_now();

}  // namespace symkl::io

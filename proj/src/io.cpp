#include "symkl/io.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <locale>
#include <optional>
#include <sstream>

namespace symkl::io {

using nlohmann::json;

ParseError::ParseError(std::size_t line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<std::uint64_t> parse_count(const std::string& field) {
  std::uint64_t v = 0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

// A header row has no field that reads as a number.
bool looks_like_header(const std::vector<std::string>& fields) {
  for (const auto& f : fields) {
    double v = 0.0;
    const auto* end = f.data() + f.size();
    const auto [ptr, ec] = std::from_chars(f.data(), end, v);
    if (!f.empty() && ec == std::errc() && ptr == end) return false;
  }
  return true;
}

}  // namespace

CountTable parse_counts_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::optional<std::size_t> header_width;
  std::vector<std::vector<std::uint64_t>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    const auto content = trim(line);
    if (content.empty() || content.front() == '#') continue;
    const auto fields = split_fields(content);

    std::vector<std::uint64_t> row;
    bool numeric = true;
    for (const auto& f : fields) {
      const auto v = parse_count(f);
      if (!v) {
        numeric = false;
        break;
      }
      row.push_back(*v);
    }
    if (!numeric) {
      if (rows.empty() && !header_width && looks_like_header(fields)) {
        header_width = fields.size();
        continue;
      }
      throw ParseError(lineno, "expected nonnegative integer counts");
    }
    if (header_width && row.size() != *header_width) {
      throw ParseError(lineno, "row has " + std::to_string(row.size()) + " columns but header has " +
                                   std::to_string(*header_width));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(lineno, "row has " + std::to_string(row.size()) + " columns, expected " +
                                   std::to_string(rows.front().size()));
    }
    if (row.size() < 2) throw ParseError(lineno, "need at least 2 columns");
    if (rows.size() == 2) throw ParseError(lineno, "more than two data rows");
    rows.push_back(std::move(row));
  }
  if (rows.size() != 2) {
    throw ParseError(lineno, "expected two data rows (Y=1 counts, Y=0 counts), found " +
                                 std::to_string(rows.size()));
  }
  return CountTable(std::move(rows[0]), std::move(rows[1]));
}

std::string format_real(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] =
      std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf.data(), ptr);
}

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
T require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError("missing key '" + std::string(key) + "' in " + where);
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + std::string(key) + "': " + e.what());
  }
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  reject_unknown(j, {"model", "n_values", "replications", "master_seed", "ci_level", "checks"},
                 "config");
  const auto& m = j.contains("model") ? j.at("model") : throw ConfigError("missing key 'model'");
  reject_unknown(m, {"label_prob", "cond_p", "cond_q"}, "model");

  std::optional<PopulationModel> model;
  try {
    model.emplace(require<double>(m, "label_prob", "model"),
                  ProbVector(require<std::vector<double>>(m, "cond_p", "model")),
                  ProbVector(require<std::vector<double>>(m, "cond_q", "model")));
  } catch (const ModelError& e) {
    throw ConfigError(std::string("invalid model: ") + e.what());
  }

  std::set<Check> checks;
  if (j.contains("checks")) {
    for (const auto& name : require<std::vector<std::string>>(j, "checks", "config")) {
      const auto c = parse_check(name);
      if (!c) throw ConfigError("unknown check '" + name + "'");
      checks.insert(*c);
    }
  }

  ExperimentConfig config{std::move(*model),
                          require<std::vector<std::uint64_t>>(j, "n_values", "config"),
                          require<std::uint64_t>(j, "replications", "config"),
                          require<std::uint64_t>(j, "master_seed", "config"),
                          j.contains("ci_level") ? require<double>(j, "ci_level", "config") : 0.95,
                          std::move(checks)};
  validate(config);
  return config;
}

json config_to_json(const ExperimentConfig& config) {
  json checks = json::array();
  for (auto c : config.checks) checks.push_back(to_string(c));
  const auto& p = config.model.cond_p().values();
  const auto& q = config.model.cond_q().values();
  return json{
      {"model",
       {{"label_prob", config.model.p()},
        {"cond_p", std::vector<double>(p.begin(), p.end())},
        {"cond_q", std::vector<double>(q.begin(), q.end())}}},
      {"n_values", config.n_values},
      {"replications", config.replications},
      {"master_seed", config.master_seed},
      {"ci_level", config.ci_level},
      {"checks", checks},
  };
}

namespace {

template <class T>
std::string opt_real(const std::optional<T>& v) {
  return v ? format_real(*v) : std::string();
}

json real_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

void write_records_csv(std::ostream& sink, const std::vector<ReplicationRecord>& records) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << kRecordsHeader << '\n';
  for (const auto& r : records) {
    out << r.rep_index << ',' << r.n << ',' << opt_real(r.estimate) << ',' << opt_real(r.eta) << ','
        << opt_real(r.scaled_eta) << ',' << opt_real(r.sigma2_hat) << ',' << opt_real(r.ci_lo) << ','
        << opt_real(r.ci_hi) << ',' << (r.covered ? (*r.covered ? "1" : "0") : "") << ','
        << (r.degenerate ? 1 : 0) << '\n';
  }
  sink << out.str();
}

void write_bounds_csv(std::ostream& sink, const std::vector<BoundRow>& rows) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << "bound,n,g,value,informative,empirical,replications,valid\n";
  for (const auto& r : rows) {
    out << to_string(r.kind) << ',' << r.n << ',' << format_real(r.g) << ','
        << format_real(r.bound.value) << ',' << (r.bound.informative ? 1 : 0) << ','
        << opt_real(r.empirical) << ',' << (r.replications ? std::to_string(*r.replications) : "")
        << ',' << (r.valid() ? 1 : 0) << '\n';
  }
  sink << out.str();
}

json summary_to_json(const ExperimentResult* result, const std::vector<CheckOutcome>& checks) {
  json j;
  json check_list = json::array();
  for (const auto& c : checks) {
    check_list.push_back({{"check", to_string(c.check)}, {"passed", c.passed}, {"detail", c.detail}});
  }
  j["checks"] = check_list;
  if (result == nullptr) return j;
  j["true_value"] = result->true_value;
  j["sigma2"] = result->sigma2;
  j["failure"] = result->failure ? json(*result->failure) : json(nullptr);
  json per_n = json::array();
  for (const auto& s : result->summary) {
    per_n.push_back({
        {"n", s.n},
        {"replications", s.replications},
        {"degenerate", s.degenerate},
        {"mean_eta", real_or_null(s.mean_eta)},
        {"median_eta", real_or_null(s.median_eta)},
        {"variance_eta", real_or_null(s.variance_eta)},
        {"median_abs_eta", real_or_null(s.median_abs_eta)},
        {"mean_scaled_eta", real_or_null(s.mean_scaled)},
        {"median_scaled_eta", real_or_null(s.median_scaled)},
        {"variance_scaled_eta", real_or_null(s.variance_scaled)},
        {"ks_distance", s.ks_distance ? real_or_null(*s.ks_distance) : json(nullptr)},
        {"coverage", s.coverage ? real_or_null(*s.coverage) : json(nullptr)},
    });
  }
  j["per_n"] = per_n;
  return j;
}

json manifest_to_json(const RunManifest& m) {
  json checks = json::object();
  for (const auto& c : m.checks) checks[to_string(c.check)] = c.passed ? "pass" : "fail";
  return json{
      {"command", m.command},       {"tool_version", m.tool_version}, {"master_seed", m.master_seed},
      {"started_at", m.started_at}, {"finished_at", m.finished_at},   {"config", m.config},
      {"checks", checks},
  };
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::array<char, 32> buf{};
  std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf.data();
}

}  // namespace symkl::io

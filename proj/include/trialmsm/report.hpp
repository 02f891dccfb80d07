#pragma once

#include "trialmsm/config.hpp"
#include "trialmsm/design.hpp"
#include "trialmsm/estimators.hpp"

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <variant>
#include <vector>

namespace trialmsm {

/// Shortest decimal string that parses back to the same double.
std::string format_number(double x);

/// RFC 4180 table with shortest round-trip numbers.
class CsvTable {
 public:
  using Cell = std::variant<std::monostate, std::string, double, std::int64_t>;

  explicit CsvTable(std::vector<std::string> header);

  CsvTable& add_row(std::vector<Cell> cells);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

inline CsvTable::Cell cell(std::size_t v) { return static_cast<std::int64_t>(v); }

/// Splits one CSV line (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_csv_line(const std::string& line);

struct IngestedEndpoints {
  std::vector<EndpointRow> rows;       // well-formed rows
  std::vector<std::size_t> row_lines;  // file line of each row
  std::vector<MsmRecord> records;      // rows that passed IDM derivation
  std::vector<std::pair<std::size_t, std::string>> rejected;  // (file line, reason)
};

/// Reads `id,arm,pfs_time,pfs_event,os_time,os_event` rows. Throws
/// std::runtime_error when the header is wrong; bad rows are collected.
IngestedEndpoints ingest_endpoints(std::istream& in);
IngestedEndpoints ingest_endpoints(const std::filesystem::path& path);

/// Each writer returns the file names it produced inside `out_dir`.
std::vector<std::string> write_analytic(const ConfigDocument& doc, const std::filesystem::path& out_dir);

std::vector<std::string> write_trials(const Scenario& scenario, std::size_t n_patients,
                                      const McOptions& mc, const std::filesystem::path& out_dir);

std::vector<std::string> write_coprimary(const CoprimaryReport& report,
                                         const std::filesystem::path& out_dir);

std::vector<std::string> write_group_sequential(const GroupSequentialReport& report,
                                                const std::filesystem::path& out_dir);

std::vector<std::string> write_estimates(const IngestedEndpoints& data, const EstimateConfig& cfg,
                                         const std::filesystem::path& out_dir);

}  // namespace trialmsm

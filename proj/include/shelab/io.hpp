#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shelab/field.hpp"

namespace shelab {

inline constexpr int kSchemaVersion = 1;

/// Binary array: uint64 rows, uint64 cols, then rows*cols float64, all little-endian.
void write_field_dump(const std::string& path, const FieldRows& f);
FieldRows read_field_dump(const std::string& path);

enum class Verdict { Pass, Fail, Info };
std::string to_string(Verdict v);

struct VerdictRow {
  std::string experiment;
  std::string resolution;
  std::string statistic;
  double value = 0.0;
  double stderr_value = 0.0;
  Verdict verdict = Verdict::Info;
};

/// "# shelab verdicts schema v1" then the column header and one line per row.
void write_csv(std::ostream& out, const std::vector<VerdictRow>& rows);
/// Schema header record, one record per row, then `extra` records verbatim.
void write_ndjson(std::ostream& out, const std::vector<VerdictRow>& rows,
                  const std::vector<nlohmann::json>& extra = {});

nlohmann::json to_json(const VerdictRow& row);

/// Shortest round-trip text for a double; "nan"/"inf" spelled out.
std::string format_double(double v);

}  // namespace shelab

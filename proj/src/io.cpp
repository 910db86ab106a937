#include "shelab/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace shelab {

static_assert(std::endian::native == std::endian::little, "field dumps assume a little-endian host");

void write_field_dump(const std::string& path, const FieldRows& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  const std::uint64_t header[2] = {static_cast<std::uint64_t>(f.rows), static_cast<std::uint64_t>(f.cols)};
  out.write(reinterpret_cast<const char*>(header), sizeof header);
  out.write(reinterpret_cast<const char*>(f.data.data()), static_cast<std::streamsize>(f.data.size() * sizeof(double)));
  if (!out) throw std::runtime_error("short write to " + path);
}

FieldRows read_field_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::uint64_t header[2];
  in.read(reinterpret_cast<char*>(header), sizeof header);
  if (!in || header[0] > (1u << 30) || header[1] > (1u << 30)) throw std::runtime_error("bad field dump header in " + path);
  FieldRows f(static_cast<int>(header[0]), static_cast<int>(header[1]));
  in.read(reinterpret_cast<char*>(f.data.data()), static_cast<std::streamsize>(f.data.size() * sizeof(double)));
  if (!in) throw std::runtime_error("truncated field dump " + path);
  return f;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Info: return "INFO";
  }
  return "?";
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_csv(std::ostream& out, const std::vector<VerdictRow>& rows) {
  out << "# shelab verdicts schema v" << kSchemaVersion << "\n";
  out << "experiment,resolution,statistic,value,stderr,verdict\n";
  for (const auto& r : rows) {
    out << r.experiment << ',' << r.resolution << ',' << r.statistic << ',' << format_double(r.value) << ','
        << format_double(r.stderr_value) << ',' << to_string(r.verdict) << '\n';
  }
}

nlohmann::json to_json(const VerdictRow& r) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return format_double(v);
  };
  return {{"experiment", r.experiment}, {"resolution", r.resolution}, {"statistic", r.statistic},
          {"value", num(r.value)},      {"stderr", num(r.stderr_value)}, {"verdict", to_string(r.verdict)}};
}

void write_ndjson(std::ostream& out, const std::vector<VerdictRow>& rows, const std::vector<nlohmann::json>& extra) {
  out << nlohmann::json{{"schema", "shelab.verdicts"}, {"version", kSchemaVersion}}.dump() << '\n';
  for (const auto& r : rows) out << to_json(r).dump() << '\n';
  for (const auto& e : extra) out << e.dump() << '\n';
}

}  // namespace shelab

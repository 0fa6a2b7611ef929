#include "optorot/report.hpp"

#include "optorot/version.hpp"

#include <charconv>
#include <cstdio>

namespace optorot {

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << csv_field(fields[i]);
  }
  out << "\n";
}

std::uint64_t fnv1a_64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string reproducibility_header(std::string_view preset, std::string_view canonical_config,
                                   std::optional<std::uint64_t> seed) {
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a_64(canonical_config)));
  std::string out = "# optorot " + std::string(kVersion) + "\n";
  out += "# preset: " + std::string(preset) + "\n";
  out += "# config-hash: fnv1a64:" + std::string(hash) + "\n";
  out += "# seed: " + (seed ? std::to_string(*seed) : std::string("none")) + "\n";
  return out;
}

}  // namespace optorot

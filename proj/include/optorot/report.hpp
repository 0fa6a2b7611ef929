#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace optorot {

/// Shortest round-trip decimal form.
std::string format_number(double v);

/// RFC 4180 field quoting.
std::string csv_field(std::string_view text);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

std::uint64_t fnv1a_64(std::string_view data);

/// Comment block opening every output file: tool version, preset name and
/// hash of the canonical configuration, and the RNG seed when relevant.
std::string reproducibility_header(std::string_view preset, std::string_view canonical_config,
                                   std::optional<std::uint64_t> seed);

}  // namespace optorot

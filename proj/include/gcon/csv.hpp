#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "gcon/transport.hpp"

namespace gcon {

/// Measured or simulated G(V_g) trace read from the ingestion CSV format.
struct IngestedTrace {
  ConductanceTrace trace;
  std::optional<double> length_nm;
  std::optional<double> width_nm;
  std::map<std::string, std::string> metadata;
  std::string source;
};

struct IngestedBiasMap {
  BiasMap map;
  std::map<std::string, std::string> metadata;
  std::string source;
};

enum class CsvKind { trace, bias_map };

/// Looks at the column header only.
CsvKind sniff_csv_kind(std::string_view text, const std::string& source);

/// Schema errors are ValidationErrors naming source and line.
IngestedTrace parse_trace_csv(std::string_view text, const std::string& source = "<memory>");
IngestedBiasMap parse_bias_map_csv(std::string_view text, const std::string& source = "<memory>");

std::string read_text_file(const std::filesystem::path& path);

}  // namespace gcon

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gcon/analysis.hpp"
#include "gcon/csv.hpp"

namespace gcon {

struct AnalysisConfig;

/// Parsed analysis inputs. Trace roles follow the run manifest:
/// trace, fan-trace, ensemble-trace.
struct InputSet {
  struct Trace {
    std::string role;
    IngestedTrace data;
  };
  std::vector<Trace> traces;
  std::vector<IngestedBiasMap> maps;
  std::vector<std::string> sources;

  /// Lowest-field trace.
  const IngestedTrace& primary() const;
  /// Empty role: sniffed from the column header.
  void add_csv(const std::string& text, const std::string& source, const std::string& role);
};

bool is_analysis_role(const std::string& role);
InputSet load_inputs(const std::vector<std::filesystem::path>& inputs);
ExtractionReport analyze_inputs(const InputSet& inputs, const AnalysisConfig& config);

}  // namespace gcon

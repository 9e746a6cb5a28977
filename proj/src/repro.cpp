#include "gcon/error.hpp"
#include "gcon/workbench.hpp"

namespace gcon {

using nlohmann::json;

nlohmann::json repro_config(const std::string& figure) {
  if (figure == "fig2") {
    return json::parse(R"({
      "device": {
        "kind": "constriction",
        "lattice": {"scaling_factor": 20},
        "geometry": {"edge_type": "armchair", "lead_width": 250, "constriction_width": 100,
                     "constriction_length": 80, "total_length": 300, "profile": "smooth-cosine"}
      },
      "sweep": {"kind": "gate", "gate_V": {"start": -38, "stop": 38, "count": 153},
                "alpha_F_per_m2": 8e-6, "dirac_point_V": 0},
      "analysis": {"extractions": ["plateaus", "width_semiclassical", "energy_scales"]},
      "output": {"directory": "fig2"}
    })");
  }
  if (figure == "fig3") {
    return json::parse(R"({
      "device": {
        "kind": "constriction",
        "lattice": {"scaling_factor": 20},
        "geometry": {"edge_type": "armchair", "lead_width": 115, "constriction_width": 100,
                     "constriction_length": 80, "total_length": 200, "profile": "abrupt"}
      },
      "sweep": {"kind": "field-fan", "gate_V": {"start": 0, "stop": 17, "count": 52},
                "field_T": {"start": 0, "stop": 0.8, "count": 17},
                "alpha_F_per_m2": 8e-6, "dirac_point_V": 0},
      "analysis": {"extractions": ["plateaus", "crossover", "capacitance"]},
      "output": {"directory": "fig3"}
    })");
  }
  if (figure == "fig4") {
    // a ribbon keeps the first two thresholds sharp enough for the half plateau
    return json::parse(R"({
      "device": {
        "kind": "ribbon",
        "lattice": {"scaling_factor": 20},
        "geometry": {"edge_type": "armchair", "width": 100, "length": 80, "metallic_snap": true}
      },
      "sweep": {"kind": "bias-map", "gate_V": {"start": 0, "stop": 20, "count": 81},
                "bias_V": {"start": 0, "stop": 0.03, "count": 31}, "energy_step_eV": 2.5e-4,
                "alpha_F_per_m2": 8e-6, "dirac_point_V": 0},
      "analysis": {"extractions": ["plateaus", "subband_spacing", "energy_scales"]},
      "output": {"directory": "fig4"}
    })");
  }
  throw ValidationError("unknown figure '" + figure + "' (fig2, fig3, fig4)");
}

}  // namespace gcon

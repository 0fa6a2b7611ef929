#include "optorot/presets.hpp"

#include <array>

namespace optorot {
namespace {

// 10 ug, 10 um disk on a 2.5 kHz torsion mount, 1 mm cavity, l = 100,
// two Gaussian drives for trapping and cooling.
const Preset kWorkedExample{
    "worked-example",
    R"([mirror]
; kg (10 ug)
mass = 1e-8
; m (10 um)
radius = 1e-5
; rad/s (2 pi x 2.5 kHz)
omega_phi = 15707.963267948966
; dimensionless
quality_factor = 1e5

[cavity]
; m
length = 1e-3
; rad/s (2 pi x 10 MHz)
linewidth = 62831853.07179586
topological_charge = 100
; m, assumed: the optical wavelength is not part of the published example
wavelength = 1.064e-6

[env]
; K
temperature = 300

[beam.trap]
; W
input_power = 0.25
; units of the linewidth
detuning_linewidths = -2.5

[beam.cool]
; W
input_power = 0.004
; units of the linewidth
detuning_linewidths = 0.5
)",
    {"mirror mass 10 ug, radius 10 um, omega_phi = 2 pi x 2.5 kHz, Q ~ 1e5: published example",
     "T = 300 K, L = 1 mm, l = 100, linewidth = 2 pi x 10 MHz: published example",
     "trap 250 mW at -2.5 linewidths, cool 4 mW at +0.5 linewidths: published example",
     "wavelength 1064 nm: assumption (not stated in the published example)"}};

// Same mirror with a softer mount (Q = 1e3) in a long, low-finesse cavity:
// linewidth = 50 omega_phi so the full field dynamics is cheap to integrate,
// and xi small enough that thermal angles stay inside the linear regime.
const Preset kDeskScale{
    "desk-scale",
    R"([mirror]
; kg
mass = 1e-8
; m
radius = 1e-5
; rad/s
omega_phi = 15707.963267948966
quality_factor = 1e3

[cavity]
; m
length = 0.1
; rad/s (50 omega_phi)
linewidth = 785398.1633974483
topological_charge = 1
; m
wavelength = 1.064e-6

[env]
; K
temperature = 300

[beam.trap]
; W
input_power = 0.2
detuning_linewidths = -2.5

[beam.cool]
; W
input_power = 0.0013
detuning_linewidths = 0.5
)",
    {"rescaled parameters chosen for time-domain cross-checks; not a published design",
     "targets omega_eff ~ 1.5 omega_phi and D_eff ~ 10 D_phi"}};

const std::array<const Preset*, 2> kPresets{&kWorkedExample, &kDeskScale};

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto* p : kPresets) names.push_back(p->name);
  return names;
}

const Preset& find_preset(const std::string& name) {
  for (const auto* p : kPresets)
    if (p->name == name) return *p;
  throw ConfigError("preset", "unknown preset '" + name + "'");
}

SystemParams load_preset(const std::string& name) {
  return build_system(parse_config_text(find_preset(name).config_text));
}

}  // namespace optorot

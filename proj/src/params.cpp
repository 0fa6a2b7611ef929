#include "optorot/params.hpp"

#include "optorot/constants.hpp"

#include <boost/property_tree/ini_parser.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace optorot {
namespace {

std::string join_issues(const std::vector<FieldIssue>& issues) {
  std::string out = "invalid configuration:";
  for (const auto& issue : issues) out += "\n  " + issue.field + ": " + issue.message;
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

class SectionReader {
 public:
  SectionReader(const ConfigTree& section, std::string name, std::vector<FieldIssue>& issues)
      : section_(section), name_(std::move(name)), issues_(issues) {}

  std::optional<double> number(const std::string& key) {
    used_.insert(key);
    auto child = section_.get_child_optional(ConfigTree::path_type(key, '\0'));
    if (!child) return std::nullopt;
    const std::string text = trim(child->data());
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
      issues_.push_back({field(key), "not a number: '" + text + "'"});
      return std::nullopt;
    }
    if (!std::isfinite(value)) {
      issues_.push_back({field(key), "must be finite"});
      return std::nullopt;
    }
    return value;
  }

  double required(const std::string& key) {
    auto v = number(key);
    if (!v) {
      if (!section_.get_child_optional(ConfigTree::path_type(key, '\0')))
        issues_.push_back({field(key), "missing"});
      return std::nan("");
    }
    return *v;
  }

  std::optional<std::string> text(const std::string& key) {
    used_.insert(key);
    auto child = section_.get_child_optional(ConfigTree::path_type(key, '\0'));
    if (!child) return std::nullopt;
    return trim(child->data());
  }

  void reject_unknown() {
    for (const auto& [key, child] : section_)
      if (!used_.count(key)) issues_.push_back({field(key), "unknown key"});
  }

  std::string field(const std::string& key) const { return name_ + "." + key; }

 private:
  const ConfigTree& section_;
  std::string name_;
  std::vector<FieldIssue>& issues_;
  std::set<std::string> used_;
};

void require_positive(double v, const std::string& field, std::vector<FieldIssue>& issues) {
  if (std::isnan(v)) return;  // already reported
  if (!(v > 0.0) || !std::isfinite(v)) issues.push_back({field, "must be positive and finite"});
}

std::vector<FieldIssue> validate(const MirrorParams& m, const CavityParams& c,
                                 const std::vector<BeamDrive>& beams, const EnvParams& env) {
  std::vector<FieldIssue> issues;
  require_positive(m.mass, "mirror.mass", issues);
  require_positive(m.radius, "mirror.radius", issues);
  require_positive(m.omega_phi, "mirror.omega_phi", issues);
  if (m.quality_factor.has_value() == m.damping_constant.has_value()) {
    issues.push_back({"mirror.quality_factor",
                      "exactly one of quality_factor / damping_constant is required"});
  } else if (m.quality_factor) {
    require_positive(*m.quality_factor, "mirror.quality_factor", issues);
  } else {
    require_positive(*m.damping_constant, "mirror.damping_constant", issues);
  }
  require_positive(c.length, "cavity.length", issues);
  require_positive(c.linewidth, "cavity.linewidth", issues);
  require_positive(c.optical_angular_frequency, "cavity.optical_angular_frequency", issues);
  if (c.topological_charge < 0) issues.push_back({"cavity.topological_charge", "must be >= 0"});
  if (beams.empty()) issues.push_back({"beam", "at least one beam section is required"});
  for (const auto& b : beams) {
    const std::string f = "beam." + b.label;
    if (!(b.input_power >= 0.0) || !std::isfinite(b.input_power))
      issues.push_back({f + ".input_power", "must be >= 0 and finite"});
    if (!std::isfinite(b.detuning)) issues.push_back({f + ".detuning", "must be finite"});
  }
  require_positive(env.temperature, "env.temperature", issues);
  return issues;
}

}  // namespace

ConfigError::ConfigError(std::vector<FieldIssue> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

ConfigError::ConfigError(std::string field, std::string message)
    : ConfigError(std::vector<FieldIssue>{{std::move(field), std::move(message)}}) {}

double derived_damping(const MirrorParams& mirror) {
  if (!mirror.quality_factor) throw ConfigError("mirror.quality_factor", "missing");
  if (!(*mirror.quality_factor > 0.0))
    throw ConfigError("mirror.quality_factor", "must be positive");
  return mirror.moment_of_inertia() * mirror.omega_phi / *mirror.quality_factor;
}

SystemParams SystemParams::make(MirrorParams mirror, CavityParams cavity,
                                std::vector<BeamDrive> beams, EnvParams env) {
  auto issues = validate(mirror, cavity, beams, env);
  if (!issues.empty()) throw ConfigError(std::move(issues));
  SystemParams sys;
  sys.mirror_ = std::move(mirror);
  sys.cavity_ = cavity;
  sys.beams_ = std::move(beams);
  sys.env_ = env;
  sys.inertia_ = sys.mirror_.moment_of_inertia();
  sys.coupling_ = si::speed_of_light * sys.cavity_.topological_charge / sys.cavity_.length;
  sys.damping_ = sys.mirror_.damping_constant ? *sys.mirror_.damping_constant
                                              : derived_damping(sys.mirror_);
  if (!(sys.inertia_ > 0.0)) throw ConfigError("mirror", "moment of inertia underflows");
  return sys;
}

bool SystemParams::high_temperature() const {
  return si::boltzmann * env_.temperature / (si::hbar * mirror_.omega_phi) > 10.0;
}

SystemParams SystemParams::with_beams(std::vector<BeamDrive> beams) const {
  return make(mirror_, cavity_, std::move(beams), env_);
}
SystemParams SystemParams::with_mirror(MirrorParams mirror) const {
  return make(std::move(mirror), cavity_, beams_, env_);
}
SystemParams SystemParams::with_cavity(CavityParams cavity) const {
  return make(mirror_, cavity, beams_, env_);
}
SystemParams SystemParams::with_env(EnvParams env) const {
  return make(mirror_, cavity_, beams_, env);
}

ConfigTree parse_config(std::istream& in) {
  ConfigTree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()), e.message());
  }
  return tree;
}

ConfigTree parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

SystemParams build_system(const ConfigTree& raw) {
  std::vector<FieldIssue> issues;
  const ConfigTree empty;
  auto section = [&](const std::string& name) -> const ConfigTree& {
    auto child = raw.get_child_optional(ConfigTree::path_type(name, '\0'));
    if (!child) {
      issues.push_back({name, "missing section"});
      return empty;
    }
    return *child;
  };

  MirrorParams mirror;
  {
    SectionReader r(section("mirror"), "mirror", issues);
    mirror.mass = r.required("mass");
    mirror.radius = r.required("radius");
    mirror.omega_phi = r.required("omega_phi");
    mirror.quality_factor = r.number("quality_factor");
    mirror.damping_constant = r.number("damping_constant");
    r.reject_unknown();
  }

  CavityParams cavity;
  {
    SectionReader r(section("cavity"), "cavity", issues);
    cavity.length = r.required("length");
    cavity.linewidth = r.required("linewidth");
    const double charge = r.required("topological_charge");
    if (!std::isnan(charge)) {
      if (charge != std::floor(charge) || std::abs(charge) > 1e9)
        issues.push_back({"cavity.topological_charge", "must be an integer"});
      else
        cavity.topological_charge = static_cast<int>(charge);
    }
    auto omega_c = r.number("optical_angular_frequency");
    auto wavelength = r.number("wavelength");
    if (omega_c.has_value() == wavelength.has_value()) {
      issues.push_back({"cavity.optical_angular_frequency",
                        "exactly one of optical_angular_frequency / wavelength is required"});
    } else if (omega_c) {
      cavity.optical_angular_frequency = *omega_c;
    } else if (*wavelength > 0.0) {
      cavity.optical_angular_frequency = 2.0 * si::pi * si::speed_of_light / *wavelength;
    } else {
      issues.push_back({"cavity.wavelength", "must be positive"});
      cavity.optical_angular_frequency = std::nan("");
    }
    r.reject_unknown();
  }

  EnvParams env;
  {
    SectionReader r(section("env"), "env", issues);
    env.temperature = r.required("temperature");
    r.reject_unknown();
  }

  std::vector<BeamDrive> beams;
  for (const auto& [name, child] : raw) {
    if (name == "mirror" || name == "cavity" || name == "env") continue;
    if (name.rfind("beam.", 0) != 0 || name.size() == 5) {
      issues.push_back({name, "unknown section (beams are named [beam.<label>])"});
      continue;
    }
    BeamDrive beam;
    beam.label = name.substr(5);
    SectionReader r(child, name, issues);
    beam.input_power = r.required("input_power");
    auto detuning = r.number("detuning");
    auto in_linewidths = r.number("detuning_linewidths");
    if (detuning.has_value() == in_linewidths.has_value()) {
      issues.push_back({name + ".detuning",
                        "exactly one of detuning / detuning_linewidths is required"});
    } else if (detuning) {
      beam.detuning = *detuning;
    } else {
      beam.detuning = *in_linewidths * cavity.linewidth;
    }
    r.reject_unknown();
    beams.push_back(std::move(beam));
  }

  if (!issues.empty()) {
    // Physical checks on whatever did parse, so one pass reports everything.
    for (auto& issue : validate(mirror, cavity, beams, env)) {
      const bool seen = std::any_of(issues.begin(), issues.end(),
                                    [&](const FieldIssue& i) { return i.field == issue.field; });
      if (!seen) issues.push_back(std::move(issue));
    }
    throw ConfigError(std::move(issues));
  }
  return SystemParams::make(std::move(mirror), cavity, std::move(beams), env);
}

std::string to_config_text(const SystemParams& sys) {
  std::ostringstream out;
  const auto& m = sys.mirror();
  out << "[mirror]\n"
      << "; kg\nmass = " << format_double(m.mass) << "\n"
      << "; m\nradius = " << format_double(m.radius) << "\n"
      << "; rad/s\nomega_phi = " << format_double(m.omega_phi) << "\n";
  if (m.quality_factor)
    out << "; dimensionless\nquality_factor = " << format_double(*m.quality_factor) << "\n";
  else
    out << "; kg m^2/s\ndamping_constant = " << format_double(*m.damping_constant) << "\n";

  const auto& c = sys.cavity();
  out << "\n[cavity]\n"
      << "; m\nlength = " << format_double(c.length) << "\n"
      << "; rad/s (energy decay rate)\nlinewidth = " << format_double(c.linewidth) << "\n"
      << "; integer\ntopological_charge = " << c.topological_charge << "\n"
      << "; rad/s\noptical_angular_frequency = " << format_double(c.optical_angular_frequency)
      << "\n";

  out << "\n[env]\n; K\ntemperature = " << format_double(sys.env().temperature) << "\n";

  for (const auto& b : sys.beams()) {
    out << "\n[beam." << b.label << "]\n"
        << "; W\ninput_power = " << format_double(b.input_power) << "\n"
        << "; rad/s, positive = laser below cavity resonance\ndetuning = "
        << format_double(b.detuning) << "\n";
  }
  return out.str();
}

}  // namespace optorot

#include "optorot/langevin.hpp"

#include "optorot/constants.hpp"
#include "optorot/detail/parallel.hpp"
#include "optorot/steady.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <string>

namespace optorot {
namespace {

using Complex = std::complex<double>;

struct BeamModel {
  double drive = 0.0;     // sqrt(gamma) |a_in|
  double detuning = 0.0;  // held full detuning
  double photons = 0.0;   // steady photon number
  Complex rotation_half;  // exp(-i Delta dt / 2)
};

// Everything a trajectory needs; shared read-only between workers.
struct Model {
  std::vector<BeamModel> beams;
  double g = 0.0;
  double gamma = 0.0;
  double xi = 0.0;
  double inertia = 0.0;
  double stiffness = 0.0;  // I omega_phi^2
  double damping_rate = 0.0;  // D / I
  double torque_per_photon = 0.0;  // hbar xi
  double steady_photons = 0.0;
  double phi_s = 0.0;
  double thermal_sigma = 0.0;  // sqrt(2 D k_B T dt)
  double vacuum_sigma = 0.0;   // per quadrature, per half step
  double decay_half = 0.0;     // exp(-g dt / 2)
  double dt = 0.0;
  std::int64_t steps = 0;
  std::int64_t stride = 1;
  Eigen::Index samples = 0;
  Eigen::Index burn_in_samples = 0;
};

class TrajectoryRunner {
 public:
  TrajectoryRunner(const Model& model, const SimConfig& cfg, int index)
      : m_(model), cfg_(cfg), index_(index) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.rng_seed & 0xffffffffu),
                      static_cast<std::uint32_t>(cfg.rng_seed >> 32),
                      static_cast<std::uint32_t>(index)};
    rng_.seed(seq);
  }

  Trajectory run() {
    const std::size_t k = m_.beams.size();
    fields_.resize(k);
    for (std::size_t j = 0; j < k; ++j)
      fields_[j] = m_.beams[j].drive / Complex(m_.g, m_.beams[j].detuning);
    dphi_ = cfg_.initial_phi_offset;
    lz_ = 0.0;

    const Eigen::Index cols = 2 + (cfg_.record_fields ? 2 * static_cast<Eigen::Index>(k) : 0);
    Trajectory traj;
    traj.samples.resize(m_.samples, cols);
    Eigen::Index row = 0;
    const bool full = cfg_.scheme == Scheme::full_cavity;
    for (std::int64_t step = 1; step <= m_.steps; ++step) {
      if (full)
        full_cavity_step();
      else
        adiabatic_step();
      if (step % m_.stride == 0 && row < m_.samples) {
        if (!(std::abs(m_.phi_s + dphi_) <= 2.0 * si::pi))
          throw SimulationDiverged("trajectory " + std::to_string(index_) +
                                   " left the small-angle regime at t = " +
                                   std::to_string(static_cast<double>(step) * m_.dt) + " s");
        record(traj.samples, row++);
      }
    }

    const Eigen::Index m = m_.samples - m_.burn_in_samples;
    const auto phi = traj.samples.col(0).tail(m);
    traj.mean_phi = phi.mean();
    traj.var_phi = (phi.array() - traj.mean_phi).square().sum() / static_cast<double>(m - 1);
    traj.max_abs_dphi = (phi.array() - m_.phi_s).abs().maxCoeff();
    return traj;
  }

 private:
  void relax_fields() {
    // Exact propagation over dt/2 with the angle frozen.
    const Complex shared = std::polar(1.0, 0.5 * m_.xi * dphi_ * m_.dt);
    for (std::size_t j = 0; j < m_.beams.size(); ++j) {
      const auto& b = m_.beams[j];
      const Complex target = b.drive / Complex(m_.g, b.detuning - m_.xi * dphi_);
      fields_[j] = target + (fields_[j] - target) * (m_.decay_half * b.rotation_half * shared);
      if (cfg_.include_field_vacuum_noise)
        fields_[j] += Complex(m_.vacuum_sigma * normal_(rng_), m_.vacuum_sigma * normal_(rng_));
    }
  }

  // Half-step drift of the angle at fixed momentum.
  void drift_half() { dphi_ += 0.5 * m_.dt * lz_ / m_.inertia; }

  // Momentum update with the damping treated by the trapezoidal rule.
  void kick(double optical_torque, double extra_damping_rate) {
    double noise = 0.0;
    if (cfg_.thermal_noise) noise = m_.thermal_sigma * normal_(rng_);
    const double half_loss = 0.5 * m_.dt * (m_.damping_rate + extra_damping_rate);
    lz_ = (lz_ * (1.0 - half_loss) + m_.dt * (-m_.stiffness * dphi_ + optical_torque) + noise) /
          (1.0 + half_loss);
  }

  // Symmetric composition fields / drift / kick / drift / fields: second
  // order, so the field lag behind the angle that produces optical damping
  // is not biased by the splitting.
  void full_cavity_step() {
    relax_fields();
    drift_half();
    double photons = 0.0;
    for (const auto& a : fields_) photons += std::norm(a);
    kick(m_.torque_per_photon * (photons - m_.steady_photons), 0.0);
    drift_half();
    relax_fields();
  }

  void adiabatic_step() {
    drift_half();
    double excess = 0.0;
    double retarded_slope = 0.0;
    const double g2 = m_.g * m_.g;
    for (const auto& b : m_.beams) {
      const double theta = b.detuning - m_.xi * dphi_;
      const double denom = g2 + theta * theta;
      const double photons = b.drive * b.drive / denom;
      excess += photons - b.photons;
      // dn/dphi times the field delay gamma / (g^2 + theta^2).
      retarded_slope += photons * 2.0 * m_.xi * theta / denom * (m_.gamma / denom);
    }
    kick(m_.torque_per_photon * excess, m_.torque_per_photon * retarded_slope / m_.inertia);
    drift_half();
  }

  void record(Eigen::MatrixXd& samples, Eigen::Index row) {
    samples(row, 0) = m_.phi_s + dphi_;
    samples(row, 1) = lz_;
    if (!cfg_.record_fields) return;
    for (std::size_t j = 0; j < m_.beams.size(); ++j) {
      Complex a = fields_[j];
      if (cfg_.scheme == Scheme::adiabatic)
        a = m_.beams[j].drive / Complex(m_.g, m_.beams[j].detuning - m_.xi * dphi_);
      samples(row, 2 + 2 * static_cast<Eigen::Index>(j)) = a.real();
      samples(row, 3 + 2 * static_cast<Eigen::Index>(j)) = a.imag();
    }
  }

  const Model& m_;
  const SimConfig& cfg_;
  int index_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::vector<Complex> fields_;
  double dphi_ = 0.0;
  double lz_ = 0.0;
};

Model build_model(const SystemParams& sys, const SimConfig& cfg, const ResponseResult& response) {
  Model m;
  m.gamma = sys.linewidth();
  m.g = 0.5 * m.gamma;
  m.xi = sys.coupling();
  m.inertia = sys.inertia();
  m.stiffness = m.inertia * sys.omega_phi() * sys.omega_phi();
  m.damping_rate = sys.damping() / m.inertia;
  m.torque_per_photon = si::hbar * m.xi;
  m.dt = cfg.dt;
  m.decay_half = std::exp(-0.5 * m.g * cfg.dt);
  m.thermal_sigma = std::sqrt(2.0 * sys.damping() * si::boltzmann * sys.temperature() * cfg.dt);
  m.vacuum_sigma = std::sqrt(0.25 * (1.0 - std::exp(-0.5 * m.gamma * cfg.dt)));

  for (const auto& s : clamped_states(sys)) {
    BeamModel b;
    b.detuning = s.full_detuning;
    b.photons = s.intensity;
    b.drive = std::sqrt(s.intensity) * std::hypot(m.g, s.full_detuning);
    b.rotation_half = std::polar(1.0, -0.5 * s.full_detuning * cfg.dt);
    m.steady_photons += s.intensity;
    m.phi_s += s.phi_s;
    m.beams.push_back(b);
  }

  m.steps = std::llround(cfg.duration / cfg.dt);
  const double period = 2.0 * si::pi / mechanical_rate(sys);
  m.stride = std::max<std::int64_t>(1, std::llround(period / (cfg.samples_per_period * cfg.dt)));
  m.samples = static_cast<Eigen::Index>(m.steps / m.stride);

  const double ring_down =
      response.D_eff > 0.0 ? sys.inertia() / response.D_eff : sys.inertia() / sys.damping();
  const double burn_in = cfg.burn_in.value_or(10.0 * ring_down);
  const double sample_dt = static_cast<double>(m.stride) * cfg.dt;
  m.burn_in_samples = static_cast<Eigen::Index>(std::ceil(burn_in / sample_dt));
  if (m.samples - m.burn_in_samples < 2)
    throw std::invalid_argument("simulate: duration leaves no stationary segment after burn-in (" +
                                std::to_string(burn_in) + " s)");
  return m;
}

}  // namespace

const char* to_string(Scheme s) {
  return s == Scheme::full_cavity ? "full-cavity" : "adiabatic";
}

Scheme recommended_scheme(const SystemParams& sys) {
  return sys.linewidth() > 1e3 * sys.omega_phi() ? Scheme::adiabatic : Scheme::full_cavity;
}

double mechanical_rate(const SystemParams& sys) {
  const auto response = effective_params(sys);
  return std::max(sys.omega_phi(), std::sqrt(std::max(0.0, response.omega_eff_sq)));
}

void validate(const SimConfig& cfg, const SystemParams& sys) {
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("simulate: dt must be > 0");
  if (!(cfg.duration > 0.0)) throw std::invalid_argument("simulate: duration must be > 0");
  if (cfg.n_trajectories < 1) throw std::invalid_argument("simulate: need at least one trajectory");
  if (cfg.samples_per_period < 2)
    throw std::invalid_argument("simulate: samples_per_period must be >= 2");
  const double slack = 1.0 + 1e-9;
  if (cfg.scheme == Scheme::full_cavity && cfg.dt > slack * 0.1 / sys.linewidth())
    throw std::invalid_argument("simulate: full-cavity scheme needs dt <= 0.1 / linewidth");
  if (cfg.scheme == Scheme::adiabatic &&
      cfg.dt > slack * 0.01 * 2.0 * si::pi / mechanical_rate(sys))
    throw std::invalid_argument("simulate: adiabatic scheme needs dt <= 0.01 mechanical periods");
  if (cfg.scheme == Scheme::adiabatic && cfg.include_field_vacuum_noise)
    throw std::invalid_argument("simulate: field vacuum noise requires the full-cavity scheme");
}

TrajectoryEnsemble simulate(const SystemParams& sys, const SimConfig& cfg) {
  validate(cfg, sys);
  if (!cfg.allow_unstable) {
    const auto verdict = routh_hurwitz_stable(drift_matrix(sys));
    if (verdict != Stability::stable)
      throw std::domain_error(std::string("simulate: configuration is ") + to_string(verdict) +
                              " by Routh-Hurwitz; set allow_unstable to integrate anyway");
  }
  const auto response = effective_params(sys);
  const Model model = build_model(sys, cfg, response);

  const auto n = static_cast<std::size_t>(cfg.n_trajectories);
  std::vector<Trajectory> results(n);
  detail::parallel_for(n, [&](std::size_t i) {
    results[i] = TrajectoryRunner(model, cfg, static_cast<int>(i)).run();
  });

  TrajectoryEnsemble ens;
  ens.sample_dt = static_cast<double>(model.stride) * cfg.dt;
  ens.time = Eigen::VectorXd::LinSpaced(model.samples, ens.sample_dt,
                                        ens.sample_dt * static_cast<double>(model.samples));
  ens.burn_in_samples = model.burn_in_samples;
  ens.phi_s = model.phi_s;
  ens.inertia = sys.inertia();
  ens.omega_eff_sq = response.omega_eff_sq;

  // Batch variances give the error bar; with few trajectories each one is
  // split so that at least eight batches contribute.
  const Eigen::Index stationary = model.samples - model.burn_in_samples;
  const Eigen::Index batches = std::max<Eigen::Index>(
      1, std::min<Eigen::Index>((8 + cfg.n_trajectories - 1) / cfg.n_trajectories, stationary / 16));
  const Eigen::Index batch_len = stationary / batches;
  std::vector<double> batch_vars;
  for (const auto& t : results) {
    ens.mean_phi += t.mean_phi / static_cast<double>(n);
    ens.var_phi += t.var_phi / static_cast<double>(n);
    ens.max_abs_dphi = std::max(ens.max_abs_dphi, t.max_abs_dphi);
    const auto phi = t.samples.col(0).tail(stationary);
    for (Eigen::Index b = 0; b < batches; ++b) {
      const auto seg = phi.segment(b * batch_len, batch_len);
      const double mean = seg.mean();
      batch_vars.push_back((seg.array() - mean).square().sum() / static_cast<double>(batch_len - 1));
    }
  }
  if (batch_vars.size() > 1) {
    const Eigen::Map<const Eigen::VectorXd> v(batch_vars.data(),
                                              static_cast<Eigen::Index>(batch_vars.size()));
    const double mean = v.mean();
    const double sd = std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
    ens.var_phi_stderr = sd / std::sqrt(static_cast<double>(v.size()));
  }
  ens.trajectories = std::move(results);
  const double to_kelvin = sys.inertia() * response.omega_eff_sq / si::boltzmann;
  ens.T_eff_sim = to_kelvin * ens.var_phi;
  ens.T_eff_sim_stderr = to_kelvin * ens.var_phi_stderr;
  return ens;
}

Spectrum psd_estimate(const TrajectoryEnsemble& ensemble, std::size_t segment_length) {
  WelchEstimator est(ensemble.sample_dt, segment_length);
  const Eigen::Index m = ensemble.stationary_samples();
  for (const auto& t : ensemble.trajectories) {
    const Eigen::VectorXd phi = t.samples.col(0).tail(m);
    est.add(std::span<const double>(phi.data(), static_cast<std::size_t>(phi.size())));
  }
  if (est.segments() < 8)
    throw std::runtime_error("psd_estimate: insufficient data (" + std::to_string(est.segments()) +
                             " segments, need 8)");
  return est.result();
}

}  // namespace optorot

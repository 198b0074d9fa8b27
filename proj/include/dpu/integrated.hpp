#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "dpu/propagate.hpp"

// 2D on-chip metaline DPU, modeled as scalar slab propagation at the
// effective wavelength lambda/n_eff across a 1D transverse grid: amplitude
// injection into waveguide modes, binary phase modulation by the metaline,
// overlap-integral readout at two output waveguides, plus an incoherently
// added optical bias per output.

namespace dpu::integrated {

using optics::Field1;

struct IntegratedGeometry {
  double wavelength = 1550e-9;
  double n_eff = 2.85;
  int n_inputs = 16;
  double input_pitch = 15e-6;
  double output_separation = 270e-6;
  double plane_distance = 200e-6;  // input plane to output plane, metaline centered
  double atom_period = 300e-9;
  int atoms_per_neuron = 3;
  int n_neurons = 600;
  double atom_height = 400e-9;  // metadata only, fixed by the process
  double mode_waist = 1.5e-6;   // Gaussian amplitude 1/e half-width
  double grid_pitch = 100e-9;
  double window_width = 600e-6;
  double phase_slot = -1.55;  // radians imposed by an etched slot
  double phase_no_slot = 0.0;

  double metaline_width() const { return n_neurons * atoms_per_neuron * atom_period; }
  double wavelength_eff() const { return wavelength / n_eff; }
  Eigen::Index grid_size() const;
  int samples_per_neuron() const;
  void validate() const;
};

// smaller grid for gradient-check and unit-test work
IntegratedGeometry toy_geometry(int n_neurons = 16, int n_inputs = 8);

struct IntegratedModel {
  IntegratedGeometry geometry;
  Eigen::VectorXd logits;       // relaxation logits, one per neuron
  double temperature = 0.2;     // binarization temperature
  double bias_raw[2] = {-10.0, -10.0};  // softplus preimages of the bias powers
  bool bias_enabled = true;

  double bias(int k) const;  // softplus(bias_raw[k]), 0 when disabled
  void validate() const;
};

IntegratedModel make_model(const IntegratedGeometry& geom, std::uint64_t seed);

enum class BinarizeMode { Hard, Relaxed };

// Hard: phase = phase_slot * step(logit) (logit > 0 means slot).
// Relaxed: phase = phase_slot * sigmoid(logit / T). The straight-through
// backward always differentiates the relaxed form.
Eigen::VectorXd binarize(const Eigen::VectorXd& logits, double temperature, BinarizeMode mode,
                         double phase_slot = -1.55, double phase_no_slot = 0.0);

// Gaussian amplitude modes at the input/output waveguide positions,
// normalized to unit discrete power.
Eigen::MatrixXd input_modes(const IntegratedGeometry& geom);
Eigen::MatrixXd output_modes(const IntegratedGeometry& geom);

Field1<double> inject(const Eigen::VectorXd& x, const IntegratedGeometry& geom);

// Multiplies exp(j phase) per neuron span inside the metaline aperture and
// zeroes the field outside it (opaque cladding).
fft::CVector<double> modulate_metaline(const fft::CVector<double>& u,
                                       const Eigen::VectorXd& neuron_phases,
                                       const IntegratedGeometry& geom);

std::pair<double, double> read_outputs(const fft::CVector<double>& u,
                                       const IntegratedGeometry& geom);

struct IntegratedReadout {
  double p1 = 0, p2 = 0;  // coherent output powers
  double s1 = 0, s2 = 0;  // powers plus bias
  bool seizure = false;   // output 0 is the seizure side; tie -> non-seizure
};

struct IntegratedTrace {
  fft::CVector<double> u_in, u_mid, u_mod, u_out;
  Eigen::VectorXd phases;
  std::complex<double> s[2];  // overlap amplitudes
  IntegratedReadout out;
};

class Engine {
 public:
  explicit Engine(const IntegratedGeometry& geom);

  IntegratedTrace forward(const IntegratedModel& model, const Eigen::VectorXd& x,
                          BinarizeMode mode = BinarizeMode::Hard);

  struct Gradients {
    Eigen::VectorXd dlogits;
    double dbias_raw[2] = {0, 0};
  };

  // g_s = (dL/dS1, dL/dS2); straight-through through the binarization.
  Gradients backward(const IntegratedModel& model, const IntegratedTrace& trace,
                     double g_s1, double g_s2);

 private:
  IntegratedGeometry geom_;
  Eigen::MatrixXd in_modes_, out_modes_;
  optics::Propagator1<double> prop_;  // half-distance hop, reused on both sides
};

IntegratedTrace forward_integrated(const IntegratedModel& model, const Eigen::VectorXd& x,
                                   BinarizeMode mode = BinarizeMode::Hard);

void save_model(const std::string& path, const IntegratedModel& model,
                bool include_logits = true);
IntegratedModel load_model(const std::string& path);

}  // namespace dpu::integrated

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dpu/propagate.hpp"

// Differentiable model of the free-space diffractive processing unit:
// phase-encoded input, per-layer phase modulation, angular-spectrum
// propagation, intensity detection with a sigmoid re-encoding between
// layers, and a two-region detector readout.
//
// Layer recurrence: y_i = |P exp(j(x_i + H_i))|^2, x_1 = 2 pi * image,
// x_{i+1} = 2 pi * sigmoid(a_i y_i + b_i).

namespace dpu::freespace {

using BoolMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
using optics::Field2;

struct DetectorRegions {
  BoolMask seizure;      // region read as I1 (scaled by c)
  BoolMask non_seizure;  // region read as I2

  void validate() const;
};

// default geometry: two side/8 squares centered at (H/2, W/4), (H/2, 3W/4)
DetectorRegions default_regions(Eigen::Index rows, Eigen::Index cols);

struct FreespaceModel {
  std::vector<Eigen::ArrayXXd> layers;            // phase maps H_i in [0, 2pi)
  std::vector<std::pair<double, double>> activations;  // (a_i, b_i), size N-1
  double z = 0.10;             // propagation distance per hop, meters
  double pitch = 9.2e-6;       // meters per pixel
  double wavelength = 532e-9;  // meters
  double region_scale = 1.0;   // factor c in [0.9, 1.1]
  bool pad = true;             // zero-pad 2x around propagation DFTs
  DetectorRegions regions;

  Eigen::Index rows() const { return layers.empty() ? 0 : layers[0].rows(); }
  Eigen::Index cols() const { return layers.empty() ? 0 : layers[0].cols(); }
  int n_layers() const { return static_cast<int>(layers.size()); }
  void validate() const;
};

// uniform-random phases, a=1, b=0, default regions
FreespaceModel make_model(int n_layers, Eigen::Index rows, Eigen::Index cols,
                          std::uint64_t seed);

struct Readout {
  double i1 = 0;  // mean intensity over the seizure region, scaled by c
  double i2 = 0;
  bool seizure = false;
};

// I1 <- c * mean(yN | seizure mask); strict inequality decides, exact tie
// falls to non-seizure.
Readout readout(const Eigen::ArrayXXd& yn, const DetectorRegions& regions, double c);

// One diffractive hop: y = |P exp(j(x + H))|^2.
Eigen::ArrayXXd layer_forward(const Eigen::ArrayXXd& x, const Eigen::ArrayXXd& h,
                              double pitch, double wavelength, double z, bool pad = true);

// Optoelectronic re-encoding x' = 2 pi sigmoid(a y + b), range (0, 2 pi).
Eigen::ArrayXXd activation(const Eigen::ArrayXXd& y, double a, double b);

// Systematic-error model standing in for the physical bench. Illumination
// gain and a static phase error multiply every layer's modulated field;
// the re-encoded phase maps of layers >= 2 are displaced by `shift` with
// zero fill; the detector region means pick up per-region gains.
struct AberrationProfile {
  Eigen::ArrayXXd illumination;  // nonnegative gain map
  Eigen::ArrayXXd phase_error;   // radians
  std::pair<int, int> shift = {0, 0};  // (rows, cols), whole pixels
  double detector_gain[2] = {1.0, 1.0};
};

AberrationProfile identity_profile(Eigen::Index rows, Eigen::Index cols);
AberrationProfile stress_profile(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed,
                                 double phase_sigma = 0.3);

// Cached propagators + per-layer intermediates of one forward pass.
struct ForwardTrace {
  std::vector<Eigen::ArrayXXd> x;       // encoded phase per layer
  std::vector<fft::CMatrix<double>> f;  // exp(j(x_i + H_i)) before aberrations
  std::vector<fft::CMatrix<double>> u;  // propagated field per layer
  std::vector<Eigen::ArrayXXd> y;       // intensity per layer
  Readout out;
};

class Engine {
 public:
  explicit Engine(const FreespaceModel& model);

  // model must keep the construction-time grid/z/pitch/wavelength/pad;
  // phase maps and activations may change between calls.
  ForwardTrace forward(const FreespaceModel& model, const Eigen::ArrayXXd& image,
                       const AberrationProfile* profile = nullptr);

  struct Gradients {
    std::vector<Eigen::ArrayXXd> dH;
    std::vector<std::pair<double, double>> dab;
  };

  // Reverse-mode pass from dL/dyN. first_trained_layer freezes everything
  // below it (adaptive retraining trains from layer 2 up).
  Gradients backward(const FreespaceModel& model, const ForwardTrace& trace,
                     const Eigen::ArrayXXd& g_yn, const AberrationProfile* profile = nullptr,
                     int first_trained_layer = 1);

 private:
  optics::Propagator2<double> prop_;
};

ForwardTrace forward(const FreespaceModel& model, const Eigen::ArrayXXd& image);
ForwardTrace emulate_hardware(const FreespaceModel& model, const AberrationProfile& profile,
                              const Eigen::ArrayXXd& image);

void save_model(const std::string& path, const FreespaceModel& model);
FreespaceModel load_model(const std::string& path);

}  // namespace dpu::freespace

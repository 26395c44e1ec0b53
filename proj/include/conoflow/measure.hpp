#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "conoflow/flow.hpp"
#include "conoflow/phase_space.hpp"
#include "conoflow/potentials.hpp"
#include "conoflow/quantum.hpp"

namespace conoflow {

/// |<phi_rho, u>|^2 / (2 pi h)^d with phi_rho = coherent_state(rho, sigma).
/// Integrates to ||u||^2 over phase space; a coherent state peaks at 1 / (2 pi h)^d.
/// sigma <= 0 selects sqrt(h); otherwise sigma must lie in [sqrt(h)/4, 4 sqrt(h)].
double husimi(const WaveState& u, const PhasePoint& rho, double sigma = 0.0);

/// Integral of the Husimi density over B. Centres are spaced at most
/// sqrt(h) / resolution in position and momentum. resolution < 8 raises
/// ErrorCode::Config. Momenta are clipped to the grid's Nyquist range.
double box_mass(const WaveState& u, const PhaseSpaceBox& B, double sigma = 0.0,
                int resolution = 8);

struct MeasureEstimate {
  std::vector<std::pair<PhaseSpaceBox, double>> masses;
  double h = 0.0;
  double sigma = 0.0;
  int resolution = 8;
  /// Husimi mass of the whole grid window.
  double total = 0.0;
};

MeasureEstimate estimate(const WaveState& u, const std::vector<PhaseSpaceBox>& boxes,
                         double sigma = 0.0, int resolution = 8);

struct InvarianceResult {
  PhaseSpaceBox box;
  PhaseSpaceBox image_box;
  double mass_before = 0.0;
  double mass_after = 0.0;
  double defect = 0.0;
  double hypothesis_infimum = 0.0;
};

/// |box_mass(uT, image) - box_mass(u0, B)| with both boxes inflated by
/// 3 sqrt(h); image is the bounding box of flow.images. Refuses with
/// ErrorCode::HypothesisViolation unless the transversality hypothesis holds
/// (or, with use_corollary, the glancing variant of it).
InvarianceResult invariance_defect(const WaveState& u0, const WaveState& uT,
                                   const PhaseSpaceBox& B, const FlowBox& flow,
                                   bool use_corollary = false, double sigma = 0.0,
                                   int resolution = 8);

/// Husimi mass outside {|xi^2 + |eta|^2 + V - E| < delta} over the position
/// window (x, y of `window`; the whole grid when absent).
double shell_concentration(const WaveState& u, const ConormalPotential& V, double E,
                           double delta, double sigma = 0.0, int resolution = 8,
                           const std::optional<PhaseSpaceBox>& window = std::nullopt);

}  // namespace conoflow

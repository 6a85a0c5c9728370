#pragma once

#include <cstddef>
#include <vector>

#include "tfrw/evolution_kernel.hpp"
#include "tfrw/measurement_kernel.hpp"
#include "tfrw/spectral_profile.hpp"
#include "tfrw/universe_state.hpp"

namespace tfrw {

/// One photon: emitted with coordinate-frequency shape f, detected with g.
struct MeasurementEvent {
  SpectralProfile emit;
  SpectralProfile detect;

  MeasurementKernel kernel() const {
    return MeasurementKernel::from_profiles(emit, detect);
  }
};

struct StepRecord {
  unsigned photons = 0;
  double detect_weight = 0.0;
  Moments moments;
};

struct PipelineResult {
  UniverseWavefunction posterior;
  /// Squared norm of the unnormalized posterior: a relative post-selection
  /// weight, not an absolute detection probability.
  double detect_weight = 0.0;
  std::vector<StepRecord> history;
};

/// Single emission, evolution, detection:
///   h1(a) ~ integral q(a, c) B(a, c) h0(c) dc.
/// Throws NoDetection when the unnormalized posterior vanishes.
PipelineResult measure_once(const UniverseWavefunction& prior,
                            const EvolutionKernel& evolution,
                            const MeasurementEvent& event);

/// Same update for a precomputed kernel (any power).
PipelineResult measure_with_kernel(const UniverseWavefunction& prior,
                                   const EvolutionKernel& evolution,
                                   const MeasurementKernel& kernel);

/// Direct evaluation of the uniform-scaling result
///   h1(a) ~ (1 / (a sqrt(s))) (integral conj(g(w/a)) f(s w / a) dw) h0(a/s),
/// independent of the kernel/evolution machinery.
PipelineResult simple_example_direct(const UniverseWavefunction& prior,
                                     double s, const SpectralProfile& f,
                                     const SpectralProfile& g);

/// k identical photons with the universe static except between the last
/// emission and the first detection:
///   h_k(a) ~ integral q^k(a, c) B(a, c) h0(c) dc.
/// history[j - 1] holds the posterior after j photons.
PipelineResult measure_k(const UniverseWavefunction& prior,
                         const EvolutionKernel& middle,
                         const MeasurementEvent& event, unsigned k);

/// measure_k for a precomputed single-photon kernel.
PipelineResult measure_k_with_kernel(const UniverseWavefunction& prior,
                                     const EvolutionKernel& middle,
                                     const MeasurementKernel& kernel,
                                     unsigned k);

/// N = events.size() photons emitted at epochs 0..N-1, the first k of them
/// detected at epochs N..N+k-1, with kernels[i] evolving epoch i to i+1
/// (kernels.size() == N + k - 1). Photons never detected are traced out.
///
/// The state carries one grid axis per photon in flight (its emission epoch)
/// plus the current scale factor, so memory grows as n^(in flight + 1).
/// Uniform scalings applied while photons are in flight shift every axis
/// together and need a log-uniform grid.
PipelineResult general_chain(const UniverseWavefunction& prior,
                             const std::vector<EvolutionKernel>& kernels,
                             const std::vector<MeasurementEvent>& events,
                             unsigned k);

/// Largest tensor general_chain will allocate, in complex entries.
inline constexpr std::size_t kMaxChainEntries = std::size_t{1} << 23;

/// Emission at a known reference scale factor, detection at the current one:
///   h1(a) ~ q(a / a_ref) h0(a).
PipelineResult measure_against_reference(const UniverseWavefunction& prior,
                                         double a_ref,
                                         const MeasurementEvent& event);

}  // namespace tfrw

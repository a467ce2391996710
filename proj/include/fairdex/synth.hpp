#pragma once

#include <cstdint>
#include <vector>

#include "fairdex/spatial.hpp"

namespace fairdex {

// Rectangle of cells whose label probability is shifted by `label_shift`
// with no corresponding feature signal, planting spatially localized
// miscalibration that a location-blind model cannot explain.
struct BiasBlob {
  Region rect;
  double label_shift = 0.0;  // in [-1, 1]
};

struct SynthConfig {
  GridSpec grid{32, 32};
  int n_records = 2000;
  int n_features = 6;
  int m_tasks = 1;
  std::vector<BiasBlob> bias_blobs;
  double noise_sd = 0.0;
  std::uint64_t seed = 0;
};

// The configuration used throughout the benchmark defaults: 32x32 grid,
// 2000 records, 6 features, two opposing blobs at +0.35 and -0.35.
SynthConfig default_synth_config(std::uint64_t seed);

// Deterministic generator. Records are placed uniformly over cells, features
// are standard normal, and each task's label probability is
// sigmoid(w . x + noise) shifted by any enclosing blob and clamped to [0,1].
Dataset generate(const SynthConfig& c);

}  // namespace fairdex

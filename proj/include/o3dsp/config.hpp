#pragma once

#include <cstdint>
#include <string>

#include "o3dsp/filter.hpp"
#include "o3dsp/simulator.hpp"
#include "o3dsp/types.hpp"

namespace o3dsp {

/// Everything a run needs: acquisition constants, filter tuning and the
/// scene to simulate.
struct RunConfig {
  SystemConfig sys;
  FilterParams params;
  SceneSpec scene;
  std::uint64_t seed = 1;
};

/// Parses a flat `key = value` file ('#' starts a comment). Unknown or
/// duplicate keys and out-of-range values are errors; missing keys take
/// the documented defaults (gamma2 = 100, nu = 0.99, alpha = 0.01,
/// smooth_std = 0, t_r = 1500, s2 = 200, ...).
RunConfig parse_config(const std::string& path);

/// Same, from an in-memory string (used by tests).
RunConfig parse_config_text(const std::string& text);

}  // namespace o3dsp

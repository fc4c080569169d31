#pragma once

#include <optional>

#include "prefevo/audio.hpp"
#include "prefevo/curve.hpp"
#include "prefevo/fir.hpp"

namespace prefevo {

struct RenderSettings {
    BandPlan plan = BandPlan::octaves();
    std::size_t tap_count = kDefaultTapCount;
    double target_lufs = -18.0;
    std::optional<FirFilter> compensation;
};

struct RenderedStimulus {
    AudioClip clip;
    double gain_db = 0.0;
    bool exceeds_full_scale = false;
};

/// track -> equalizer(curve) -> compensation (if any) -> loudness alignment.
RenderedStimulus render_stimulus(const AudioClip& track, const Curve& curve, const RenderSettings& settings);

} // namespace prefevo

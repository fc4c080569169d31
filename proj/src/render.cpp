#include "prefevo/render.hpp"

#include "prefevo/loudness.hpp"

namespace prefevo {

RenderedStimulus render_stimulus(const AudioClip& track, const Curve& curve, const RenderSettings& settings) {
    track.validate();
    AudioClip shaped = apply_fir(track, design_eq_filter(curve, settings.plan, track.sample_rate, settings.tap_count));
    if (settings.compensation) shaped = apply_fir(shaped, *settings.compensation);
    AlignedClip aligned = align_loudness(shaped, settings.target_lufs);
    return RenderedStimulus{std::move(aligned.clip), aligned.gain_db, aligned.exceeds_full_scale};
}

} // namespace prefevo

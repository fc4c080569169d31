#pragma once

#include <array>
#include <optional>

#include "prefevo/audio.hpp"

namespace prefevo {

/// Direct-form biquad coefficients, a0 normalized to 1.
struct Biquad {
    std::array<double, 3> b;
    std::array<double, 2> a; ///< a1, a2
};

/// The two K-weighting stages (high shelf, then high pass) for a sample rate.
/// 48 kHz uses the published BS.1770 coefficients; other rates re-derive the
/// stages from their analog prototypes with the bilinear transform.
std::array<Biquad, 2> k_weighting(int sample_rate);

/// Integrated loudness in LUFS: K-weighting, 400 ms blocks with 75 % overlap,
/// -70 LUFS absolute gate, then a relative gate 10 LU below the ungated level.
/// Returns nullopt when no block passes the absolute gate (e.g. silence).
/// Throws ValidationError for clips shorter than one block.
std::optional<double> measure_loudness(const AudioClip& clip);

struct AlignedClip {
    AudioClip clip;
    double gain_db = 0.0;
    bool exceeds_full_scale = false; ///< some sample is beyond [-1, 1] after gain
};

/// Applies one broadband gain so the clip measures `target_lufs`.
/// Throws ValidationError when the input is unmeasurable.
AlignedClip align_loudness(const AudioClip& clip, double target_lufs);

} // namespace prefevo

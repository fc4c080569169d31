#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace prefevo {

/// Multichannel audio at nominal full scale [-1, 1]. Channels are stored
/// planar; every channel has the same length.
struct AudioClip {
    int sample_rate = 48000;
    std::vector<std::vector<float>> channels;

    std::size_t channel_count() const noexcept { return channels.size(); }
    std::size_t frames() const noexcept { return channels.empty() ? 0 : channels.front().size(); }
    double duration_seconds() const noexcept {
        return static_cast<double>(frames()) / static_cast<double>(sample_rate);
    }

    static AudioClip silence(int sample_rate, std::size_t channels, std::size_t frames);

    /// Throws ValidationError unless 1-2 equal-length channels at 44.1 or 48 kHz.
    void validate() const;

    /// Frames [start, start + count), clamped to the clip.
    AudioClip excerpt(std::size_t start_frame, std::size_t frame_count) const;

    float peak() const noexcept;

    friend bool operator==(const AudioClip&, const AudioClip&) = default;
};

enum class SampleFormat { Pcm16, Pcm24, Float32 };

std::vector<std::uint8_t> encode_wav(const AudioClip& clip, SampleFormat format = SampleFormat::Float32);
AudioClip decode_wav(std::span<const std::uint8_t> bytes);

AudioClip read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const AudioClip& clip,
               SampleFormat format = SampleFormat::Float32);

} // namespace prefevo

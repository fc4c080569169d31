#include "prefevo/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "prefevo/errors.hpp"

namespace prefevo {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
           (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
    return std::memcmp(b.data() + at, tag, 4) == 0;
}

std::int32_t quantize(float x, double full_scale) {
    const double scaled = std::round(static_cast<double>(x) * full_scale);
    return static_cast<std::int32_t>(std::clamp(scaled, -full_scale, full_scale - 1.0));
}

} // namespace

AudioClip AudioClip::silence(int sample_rate, std::size_t channels, std::size_t frames) {
    AudioClip clip;
    clip.sample_rate = sample_rate;
    clip.channels.assign(channels, std::vector<float>(frames, 0.0f));
    return clip;
}

void AudioClip::validate() const {
    std::vector<std::string> issues;
    if (sample_rate != 44100 && sample_rate != 48000) {
        issues.push_back("unsupported sample rate " + std::to_string(sample_rate) + " (need 44100 or 48000)");
    }
    if (channels.empty() || channels.size() > 2) {
        issues.push_back("need 1 or 2 channels, got " + std::to_string(channels.size()));
    }
    for (const auto& ch : channels) {
        if (ch.size() != frames()) {
            issues.emplace_back("channels have unequal lengths");
            break;
        }
    }
    if (!issues.empty()) throw ValidationError(std::move(issues));
}

AudioClip AudioClip::excerpt(std::size_t start_frame, std::size_t frame_count) const {
    AudioClip out;
    out.sample_rate = sample_rate;
    const std::size_t begin = std::min(start_frame, frames());
    const std::size_t end = std::min(frames(), begin + frame_count);
    for (const auto& ch : channels) out.channels.emplace_back(ch.begin() + begin, ch.begin() + end);
    return out;
}

float AudioClip::peak() const noexcept {
    float p = 0.0f;
    for (const auto& ch : channels) {
        for (float x : ch) p = std::max(p, std::abs(x));
    }
    return p;
}

std::vector<std::uint8_t> encode_wav(const AudioClip& clip, SampleFormat format) {
    const std::uint16_t channels = static_cast<std::uint16_t>(clip.channel_count());
    const std::uint16_t bytes_per_sample = format == SampleFormat::Pcm16 ? 2 : format == SampleFormat::Pcm24 ? 3 : 4;
    const std::uint32_t data_bytes = static_cast<std::uint32_t>(clip.frames() * channels * bytes_per_sample);

    std::vector<std::uint8_t> out;
    out.reserve(44 + data_bytes);
    put_tag(out, "RIFF");
    put_u32(out, 36 + data_bytes);
    put_tag(out, "WAVE");
    put_tag(out, "fmt ");
    put_u32(out, 16);
    put_u16(out, format == SampleFormat::Float32 ? kFormatFloat : kFormatPcm);
    put_u16(out, channels);
    put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
    put_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * channels * bytes_per_sample);
    put_u16(out, static_cast<std::uint16_t>(channels * bytes_per_sample));
    put_u16(out, static_cast<std::uint16_t>(bytes_per_sample * 8));
    put_tag(out, "data");
    put_u32(out, data_bytes);

    for (std::size_t n = 0; n < clip.frames(); ++n) {
        for (std::size_t c = 0; c < channels; ++c) {
            const float x = clip.channels[c][n];
            switch (format) {
            case SampleFormat::Pcm16: {
                const auto v = static_cast<std::uint32_t>(quantize(x, 32768.0));
                out.push_back(static_cast<std::uint8_t>(v & 0xFF));
                out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
                break;
            }
            case SampleFormat::Pcm24: {
                const auto v = static_cast<std::uint32_t>(quantize(x, 8388608.0));
                for (int i = 0; i < 3; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
                break;
            }
            case SampleFormat::Float32: {
                std::uint32_t v;
                std::memcpy(&v, &x, 4);
                put_u32(out, v);
                break;
            }
            }
        }
    }
    return out;
}

AudioClip decode_wav(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
        throw FormatError("wav: missing RIFF/WAVE header");
    }
    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    bool have_fmt = false;
    std::span<const std::uint8_t> data;

    std::size_t at = 12;
    while (at + 8 <= bytes.size()) {
        const std::uint32_t size = get_u32(bytes, at + 4);
        const std::size_t body = at + 8;
        if (body + size > bytes.size()) throw FormatError("wav: chunk extends past end of file");
        if (tag_is(bytes, at, "fmt ")) {
            if (size < 16) throw FormatError("wav: fmt chunk too short");
            format = get_u16(bytes, body);
            channels = get_u16(bytes, body + 2);
            rate = get_u32(bytes, body + 4);
            bits = get_u16(bytes, body + 14);
            if (format == kFormatExtensible) {
                if (size < 26) throw FormatError("wav: extensible fmt chunk too short");
                format = get_u16(bytes, body + 24);
            }
            have_fmt = true;
        } else if (tag_is(bytes, at, "data")) {
            data = bytes.subspan(body, size);
        }
        at = body + size + (size & 1U);
    }
    if (!have_fmt) throw FormatError("wav: no fmt chunk");
    if (data.data() == nullptr) throw FormatError("wav: no data chunk");
    if (channels == 0) throw FormatError("wav: zero channels");

    const bool is_float = format == kFormatFloat && bits == 32;
    const bool is_pcm = format == kFormatPcm && (bits == 16 || bits == 24);
    if (!is_float && !is_pcm) {
        throw FormatError("wav: unsupported sample format " + std::to_string(format) + "/" + std::to_string(bits) +
                          " bit (need PCM16, PCM24 or float32)");
    }
    const std::size_t bytes_per_sample = bits / 8;
    const std::size_t frames = data.size() / (bytes_per_sample * channels);

    AudioClip clip;
    clip.sample_rate = static_cast<int>(rate);
    clip.channels.assign(channels, std::vector<float>(frames));
    std::size_t p = 0;
    for (std::size_t n = 0; n < frames; ++n) {
        for (std::size_t c = 0; c < channels; ++c, p += bytes_per_sample) {
            float x = 0.0f;
            if (is_float) {
                const std::uint32_t v = get_u32(data, p);
                std::memcpy(&x, &v, 4);
            } else if (bits == 16) {
                x = static_cast<float>(static_cast<std::int16_t>(get_u16(data, p)) / 32768.0);
            } else {
                std::int32_t v = data[p] | (data[p + 1] << 8) | (data[p + 2] << 16);
                if (v & 0x800000) v -= 0x1000000;
                x = static_cast<float>(v / 8388608.0);
            }
            clip.channels[c][n] = x;
        }
    }
    return clip;
}

AudioClip read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_wav(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip, SampleFormat format) {
    const auto bytes = encode_wav(clip, format);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

} // namespace prefevo

#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pronto::io {

// All writers go through write_atomic: the payload lands in a sibling temp file which is
// renamed over the target, so readers never observe a half-written artifact.
void write_atomic(const std::filesystem::path& path, const std::string& bytes);

std::string read_all(const std::filesystem::path& path);

// Raw sample dump: interleaved little-endian float32 I/Q in <path>, plus a JSON sidecar
// <path>.json carrying {"n": <samples>, "fs": <hz>} so the dump is self-describing.
void dump_iq(const std::filesystem::path& path, const std::vector<std::complex<double>>& x,
             double sample_rate);

struct IqDump {
    std::vector<std::complex<double>> samples;
    double sample_rate;
};

IqDump load_iq(const std::filesystem::path& path);

// Little-endian scalar append/read helpers shared by the binary formats.
void put_u32(std::string& out, std::uint32_t v);
void put_f32(std::string& out, float v);
void put_f64(std::string& out, double v);

class Cursor {
  public:
    Cursor(const std::string& bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}
    std::uint32_t u32();
    float f32();
    double f64();
    std::string raw(std::size_t n);
    bool at_end() const { return pos_ == bytes_.size(); }
    std::size_t remaining() const { return bytes_.size() - pos_; }

  private:
    void need(std::size_t n);
    const std::string& bytes_;
    std::string what_;
    std::size_t pos_ = 0;
};

}  // namespace pronto::io

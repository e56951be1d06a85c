#include "pronto/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "pronto/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "binary formats are little-endian; big-endian hosts are not supported");

namespace pronto::io {

void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open for writing: " + tmp.string());
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!f) throw IoError("short write: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed: " + tmp.string() + " -> " + path.string());
}

std::string read_all(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (f.bad()) throw IoError("read failed: " + path.string());
    return bytes;
}

void dump_iq(const std::filesystem::path& path, const std::vector<std::complex<double>>& x,
             double sample_rate) {
    std::string bytes;
    bytes.reserve(x.size() * 8);
    for (const auto& s : x) {
        put_f32(bytes, static_cast<float>(s.real()));
        put_f32(bytes, static_cast<float>(s.imag()));
    }
    write_atomic(path, bytes);
    nlohmann::json side{{"n", x.size()}, {"fs", sample_rate}};
    std::filesystem::path sp = path;
    sp += ".json";
    write_atomic(sp, side.dump(2) + "\n");
}

IqDump load_iq(const std::filesystem::path& path) {
    std::filesystem::path sp = path;
    sp += ".json";
    nlohmann::json side;
    try {
        side = nlohmann::json::parse(read_all(sp));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad iq sidecar " + sp.string() + ": " + e.what());
    }
    IqDump out;
    out.sample_rate = side.at("fs").get<double>();
    const auto n = side.at("n").get<std::size_t>();
    const std::string bytes = read_all(path);
    Cursor c(bytes, path.string());
    out.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const float re = c.f32();
        const float im = c.f32();
        out.samples.emplace_back(re, im);
    }
    if (!c.at_end()) throw FormatError("trailing bytes in " + path.string());
    return out;
}

void put_u32(std::string& out, std::uint32_t v) {
    char b[4];
    std::memcpy(b, &v, 4);
    out.append(b, 4);
}

void put_f32(std::string& out, float v) {
    char b[4];
    std::memcpy(b, &v, 4);
    out.append(b, 4);
}

void put_f64(std::string& out, double v) {
    char b[8];
    std::memcpy(b, &v, 8);
    out.append(b, 8);
}

void Cursor::need(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw FormatError("truncated data in " + what_);
}

std::uint32_t Cursor::u32() {
    need(4);
    std::uint32_t v;
    std::memcpy(&v, bytes_.data() + pos_, 4);
    pos_ += 4;
    return v;
}

float Cursor::f32() {
    need(4);
    float v;
    std::memcpy(&v, bytes_.data() + pos_, 4);
    pos_ += 4;
    return v;
}

double Cursor::f64() {
    need(8);
    double v;
    std::memcpy(&v, bytes_.data() + pos_, 8);
    pos_ += 8;
    return v;
}

std::string Cursor::raw(std::size_t n) {
    need(n);
    std::string v = bytes_.substr(pos_, n);
    pos_ += n;
    return v;
}

}  // namespace pronto::io

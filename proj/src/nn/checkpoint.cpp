#include "pronto/nn/checkpoint.hpp"

#include <cstring>

#include "pronto/error.hpp"
#include "pronto/io.hpp"

namespace pronto::nn {

void save_model(const std::filesystem::path& path, const ModelSpec& spec,
                const Params<float>& params) {
    const Plan plan = make_plan(spec);
    const Params<float> want = zeros_like_params<float>(plan);
    if (want.w.size() != params.w.size() || want.b.size() != params.b.size()) {
        throw ShapeError("parameter set does not match the model spec");
    }
    for (std::size_t i = 0; i < want.w.size(); ++i) {
        if (params.w[i].shape != want.w[i].shape || params.b[i].shape != want.b[i].shape) {
            throw ShapeError("parameter shapes do not match the model spec");
        }
    }

    std::string out;
    out.append(kModelMagic, 4);
    io::put_u32(out, kModelVersion);
    const std::string js = spec_to_json(spec);
    io::put_u32(out, static_cast<std::uint32_t>(js.size()));
    out += js;
    for (std::size_t i = 0; i < params.w.size(); ++i) {
        for (float v : params.w[i].data) io::put_f32(out, v);
        for (float v : params.b[i].data) io::put_f32(out, v);
    }
    io::write_atomic(path, out);
}

Checkpoint load_model(const std::filesystem::path& path) {
    const std::string blob = io::read_all(path);
    io::Cursor cur(blob, "model file");
    const std::string magic = cur.raw(4);
    if (std::memcmp(magic.data(), kModelMagic, 4) != 0) {
        throw FormatError("not a model file: bad magic");
    }
    const std::uint32_t version = cur.u32();
    if (version != kModelVersion) {
        throw FormatError("unsupported model file version " + std::to_string(version));
    }
    const std::uint32_t jlen = cur.u32();
    Checkpoint ck;
    ck.spec = spec_from_json(cur.raw(jlen));
    const Plan plan = make_plan(ck.spec);
    ck.params = zeros_like_params<float>(plan);
    for (std::size_t i = 0; i < ck.params.w.size(); ++i) {
        for (float& v : ck.params.w[i].data) v = cur.f32();
        for (float& v : ck.params.b[i].data) v = cur.f32();
    }
    if (!cur.at_end()) throw FormatError("trailing bytes in model file");
    return ck;
}

}  // namespace pronto::nn

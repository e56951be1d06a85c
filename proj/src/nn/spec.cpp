#include "pronto/nn/spec.hpp"

#include <json.hpp>

#include "pronto/error.hpp"

namespace pronto::nn {

Plan make_plan(const ModelSpec& spec) {
    if (spec.input_len <= 0 || spec.input_channels <= 0) {
        throw ShapeError("model input must be non-empty");
    }
    if (spec.layers.empty()) throw ShapeError("model has no layers");

    Plan plan;
    plan.spec = spec;
    Dim cur{spec.input_channels, spec.input_len};
    plan.dims.push_back(cur);

    bool flat = false;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerDesc& ld = spec.layers[i];
        const bool last = i + 1 == spec.layers.size();
        int wslot = -1;
        int pslot = -1;
        switch (ld.kind) {
            case LayerKind::kConv1D:
                if (flat) throw ShapeError("conv1d after flatten");
                if (ld.kernel <= 0 || ld.out_channels <= 0) {
                    throw ShapeError("conv1d needs positive kernel and channels");
                }
                if (cur.len < ld.kernel) throw ShapeError("conv1d kernel longer than input");
                wslot = plan.num_weighted++;
                cur = {ld.out_channels, cur.len - ld.kernel + 1};
                break;
            case LayerKind::kMaxPool:
                if (flat) throw ShapeError("maxpool after flatten");
                if (cur.len < 2) throw ShapeError("maxpool needs at least 2 samples");
                pslot = plan.num_pools++;
                cur = {cur.channels, cur.len / 2};
                break;
            case LayerKind::kRelu:
                break;
            case LayerKind::kFlatten:
                if (flat) throw ShapeError("flatten applied twice");
                flat = true;
                cur = {cur.channels * cur.len, 1};
                break;
            case LayerKind::kDense:
                if (!flat) throw ShapeError("dense needs a flattened input");
                if (ld.out_dim <= 0) throw ShapeError("dense needs a positive width");
                wslot = plan.num_weighted++;
                cur = {ld.out_dim, 1};
                break;
            case LayerKind::kSoftmax:
            case LayerKind::kTanh:
                if (!last) throw ShapeError("output activation must terminate the stack");
                if (!flat) throw ShapeError("output activation needs a flattened input");
                break;
        }
        plan.weighted.push_back(wslot);
        plan.pools.push_back(pslot);
        plan.dims.push_back(cur);
    }
    plan.out_dim = cur.channels * cur.len;
    return plan;
}

std::int64_t param_count(const ModelSpec& spec) {
    const Plan plan = make_plan(spec);
    std::int64_t n = 0;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerDesc& ld = spec.layers[i];
        const Dim in = plan.dims[i];
        if (ld.kind == LayerKind::kConv1D) {
            n += static_cast<std::int64_t>(ld.kernel) * in.channels * ld.out_channels +
                 ld.out_channels;
        } else if (ld.kind == LayerKind::kDense) {
            n += static_cast<std::int64_t>(in.channels) * ld.out_dim + ld.out_dim;
        }
    }
    return n;
}

std::int64_t flop_count(const ModelSpec& spec) {
    const Plan plan = make_plan(spec);
    std::int64_t n = 0;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerDesc& ld = spec.layers[i];
        const Dim in = plan.dims[i];
        const Dim out = plan.dims[i + 1];
        if (ld.kind == LayerKind::kConv1D) {
            const std::int64_t macs =
                static_cast<std::int64_t>(out.len) * out.channels * ld.kernel * in.channels;
            n += 2 * macs + static_cast<std::int64_t>(out.len) * out.channels;
        } else if (ld.kind == LayerKind::kDense) {
            const std::int64_t macs = static_cast<std::int64_t>(in.channels) * ld.out_dim;
            n += 2 * macs + ld.out_dim;
        }
    }
    return n;
}

ModelSpec make_model_spec(Arch arch, Task task, int input_len, int classes) {
    if (task == Task::kDetect && classes < 2) throw ConfigError("detector needs >= 2 classes");
    ModelSpec spec;
    spec.input_len = input_len;
    spec.input_channels = 2;
    auto& L = spec.layers;
    if (arch == Arch::kSmall) {
        // Two constraints shape this stack. Only the first two blocks pool, so the
        // flatten keeps four-sample temporal resolution — the start-shift classifier
        // must separate adjacent shifts. And the wide third kernel pushes the conv
        // receptive field to 72 input samples, past the long field's 64-sample
        // repetition lag: under an uncompensated oscillator offset the only reliable
        // cue is the relation between samples a lag apart, which units upstream of the
        // (linear) dense layers can otherwise never combine.
        L.push_back(LayerDesc::conv1d(5, 16));
        L.push_back(LayerDesc::relu());
        L.push_back(LayerDesc::maxpool());
        L.push_back(LayerDesc::conv1d(5, 24));
        L.push_back(LayerDesc::relu());
        L.push_back(LayerDesc::maxpool());
        L.push_back(LayerDesc::conv1d(13, 48));
        L.push_back(LayerDesc::relu());
        L.push_back(LayerDesc::conv1d(3, 32));
        L.push_back(LayerDesc::relu());
        L.push_back(LayerDesc::flatten());
        L.push_back(LayerDesc::dense(192));
        L.push_back(LayerDesc::relu());
    } else {
        const int kernels[9] = {7, 5, 5, 5, 5, 5, 3, 3, 3};
        const int widths[9] = {64, 64, 96, 96, 128, 128, 192, 192, 256};
        for (int i = 0; i < 9; ++i) {
            L.push_back(LayerDesc::conv1d(kernels[i], widths[i]));
            L.push_back(LayerDesc::relu());
            if (i % 2 == 1) L.push_back(LayerDesc::maxpool());
        }
        L.push_back(LayerDesc::flatten());
        for (int w : {512, 256, 128}) {
            L.push_back(LayerDesc::dense(w));
            L.push_back(LayerDesc::relu());
        }
    }
    if (task == Task::kDetect) {
        L.push_back(LayerDesc::dense(classes));
        L.push_back(LayerDesc::softmax());
    } else {
        L.push_back(LayerDesc::dense(1));
        L.push_back(LayerDesc::tanh());
    }
    make_plan(spec);  // fail fast if the stack does not fit input_len
    return spec;
}

namespace {

const char* kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::kConv1D: return "conv1d";
        case LayerKind::kRelu: return "relu";
        case LayerKind::kMaxPool: return "maxpool";
        case LayerKind::kFlatten: return "flatten";
        case LayerKind::kDense: return "dense";
        case LayerKind::kSoftmax: return "softmax";
        case LayerKind::kTanh: return "tanh";
    }
    return "?";
}

}  // namespace

std::string spec_to_json(const ModelSpec& spec) {
    nlohmann::json j;
    j["input_len"] = spec.input_len;
    j["input_channels"] = spec.input_channels;
    j["layers"] = nlohmann::json::array();
    for (const LayerDesc& ld : spec.layers) {
        nlohmann::json lj{{"type", kind_name(ld.kind)}};
        if (ld.kind == LayerKind::kConv1D) {
            lj["kernel"] = ld.kernel;
            lj["out_channels"] = ld.out_channels;
        } else if (ld.kind == LayerKind::kDense) {
            lj["out_dim"] = ld.out_dim;
        }
        j["layers"].push_back(lj);
    }
    return j.dump();
}

ModelSpec spec_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad model spec json: ") + e.what());
    }
    try {
        ModelSpec spec;
        spec.input_len = j.at("input_len").get<int>();
        spec.input_channels = j.at("input_channels").get<int>();
        for (const auto& lj : j.at("layers")) {
            const std::string type = lj.at("type").get<std::string>();
            if (type == "conv1d") {
                spec.layers.push_back(LayerDesc::conv1d(lj.at("kernel").get<int>(),
                                                        lj.at("out_channels").get<int>()));
            } else if (type == "relu") {
                spec.layers.push_back(LayerDesc::relu());
            } else if (type == "maxpool") {
                spec.layers.push_back(LayerDesc::maxpool());
            } else if (type == "flatten") {
                spec.layers.push_back(LayerDesc::flatten());
            } else if (type == "dense") {
                spec.layers.push_back(LayerDesc::dense(lj.at("out_dim").get<int>()));
            } else if (type == "softmax") {
                spec.layers.push_back(LayerDesc::softmax());
            } else if (type == "tanh") {
                spec.layers.push_back(LayerDesc::tanh());
            } else {
                throw FormatError("unknown layer type: " + type);
            }
        }
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad model spec json: ") + e.what());
    }
}

}  // namespace pronto::nn

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pronto::nn {

enum class LayerKind { kConv1D, kRelu, kMaxPool, kFlatten, kDense, kSoftmax, kTanh };

// One layer descriptor. Only the fields relevant to the kind are meaningful:
// conv1d uses kernel/out_channels, dense uses out_dim, the rest carry nothing.
struct LayerDesc {
    LayerKind kind;
    int kernel = 0;
    int out_channels = 0;
    int out_dim = 0;

    static LayerDesc conv1d(int kernel, int out_channels) {
        return {LayerKind::kConv1D, kernel, out_channels, 0};
    }
    static LayerDesc relu() { return {LayerKind::kRelu, 0, 0, 0}; }
    static LayerDesc maxpool() { return {LayerKind::kMaxPool, 0, 0, 0}; }
    static LayerDesc flatten() { return {LayerKind::kFlatten, 0, 0, 0}; }
    static LayerDesc dense(int out_dim) { return {LayerKind::kDense, 0, 0, out_dim}; }
    static LayerDesc softmax() { return {LayerKind::kSoftmax, 0, 0, 0}; }
    static LayerDesc tanh() { return {LayerKind::kTanh, 0, 0, 0}; }

    bool operator==(const LayerDesc&) const = default;
};

struct ModelSpec {
    int input_len = 160;
    int input_channels = 2;
    std::vector<LayerDesc> layers;

    bool operator==(const ModelSpec&) const = default;
};

// (channels, len) at a layer boundary; flat vectors are (dim, 1).
struct Dim {
    int channels = 0;
    int len = 0;
};

// Validated execution plan: boundary shapes plus weighted/pool slot numbering. Max pooling
// is window 2 stride 2; convolutions are valid-padding stride 1.
struct Plan {
    ModelSpec spec;
    std::vector<Dim> dims;        // dims[i] feeds layer i; dims.back() is the output
    std::vector<int> weighted;    // per layer: slot in the parameter list, or -1
    std::vector<int> pools;       // per layer: slot among pooling layers, or -1
    int num_weighted = 0;
    int num_pools = 0;
    int out_dim = 0;
};

// Shape-checks the stack (throws ShapeError): kernels must fit, dense layers need a
// flattened input, softmax/tanh may only terminate the stack.
Plan make_plan(const ModelSpec& spec);

std::int64_t param_count(const ModelSpec& spec);

// Multiply-accumulate work for one forward pass, counted as 2 FLOPs per MAC plus the bias
// adds; activations and pooling are not counted.
std::int64_t flop_count(const ModelSpec& spec);

enum class Arch { kSmall, kLarge };
enum class Task { kDetect, kRegress };

// The two production stacks. kSmall: four conv blocks and two dense layers (6 weighted);
// kLarge: nine convolutions and four dense layers (13 weighted). kDetect ends in
// Dense(classes)+softmax, kRegress in Dense(1)+tanh.
ModelSpec make_model_spec(Arch arch, Task task, int input_len = 160, int classes = 98);

// JSON round-trip for checkpoint headers and tooling.
std::string spec_to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const std::string& text);

}  // namespace pronto::nn

#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "pronto/error.hpp"
#include "pronto/nn/adam.hpp"
#include "pronto/nn/checkpoint.hpp"
#include "pronto/nn/net.hpp"
#include "pronto/nn/spec.hpp"
#include "pronto/rng.hpp"

using namespace pronto;
using namespace pronto::nn;

namespace {

ModelSpec tiny_classifier() {
    ModelSpec s;
    s.input_len = 8;
    s.input_channels = 2;
    s.layers = {LayerDesc::conv1d(3, 4), LayerDesc::relu(),  LayerDesc::maxpool(),
                LayerDesc::flatten(),    LayerDesc::dense(8), LayerDesc::relu(),
                LayerDesc::dense(5),     LayerDesc::softmax()};
    return s;
}

ModelSpec tiny_regressor() {
    ModelSpec s;
    s.input_len = 8;
    s.input_channels = 2;
    s.layers = {LayerDesc::conv1d(3, 3), LayerDesc::relu(),   LayerDesc::maxpool(),
                LayerDesc::flatten(),    LayerDesc::dense(4), LayerDesc::relu(),
                LayerDesc::dense(1),     LayerDesc::tanh()};
    return s;
}

template <class S>
std::vector<S> random_input(const Plan& plan, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<S> x(static_cast<std::size_t>(plan.dims[0].channels) * plan.dims[0].len);
    for (auto& v : x) v = static_cast<S>(rng.uniform(-1.0, 1.0));
    return x;
}

}  // namespace

TEST_CASE("plan tracks shapes through the compact stack") {
    const ModelSpec spec = make_model_spec(Arch::kSmall, Task::kDetect);
    const Plan plan = make_plan(spec);
    CHECK(plan.dims.front().channels == 2);
    CHECK(plan.dims.front().len == 160);
    CHECK(plan.out_dim == 98);
    CHECK(plan.num_weighted == 6);
    // Hand tally: 176 + 1944 + 15024 + 4640 + (736*192+192) + (192*98+98).
    CHECK(param_count(spec) == 182202);
    // 52416 + 285936 + 750000 + 212704 + 282816 + 37730.
    CHECK(flop_count(spec) == 1621602);
}

TEST_CASE("plan tracks shapes through the wide stack") {
    const ModelSpec spec = make_model_spec(Arch::kLarge, Task::kDetect);
    const Plan plan = make_plan(spec);
    CHECK(plan.out_dim == 98);
    CHECK(plan.num_weighted == 13);
    CHECK(param_count(spec) == 1014050);
    CHECK(flop_count(spec) == 29371938);

    const ModelSpec rspec = make_model_spec(Arch::kLarge, Task::kRegress);
    CHECK(make_plan(rspec).out_dim == 1);
    CHECK(param_count(rspec) == 1001537);
}

TEST_CASE("parameter counts for single layers") {
    ModelSpec s;
    s.input_len = 20;
    s.input_channels = 1;
    s.layers = {LayerDesc::flatten(), LayerDesc::dense(10)};
    CHECK(param_count(s) == 210);

    ModelSpec c;
    c.input_len = 160;
    c.input_channels = 2;
    c.layers = {LayerDesc::conv1d(5, 128)};
    CHECK(param_count(c) == 1408);
}

TEST_CASE("plan validation refuses malformed stacks") {
    ModelSpec s;
    s.input_len = 16;
    s.input_channels = 2;

    s.layers = {LayerDesc::flatten(), LayerDesc::conv1d(3, 4)};
    CHECK_THROWS_AS(make_plan(s), ShapeError);

    s.layers = {LayerDesc::conv1d(17, 4)};
    CHECK_THROWS_AS(make_plan(s), ShapeError);

    s.layers = {LayerDesc::dense(4)};
    CHECK_THROWS_AS(make_plan(s), ShapeError);

    s.layers = {LayerDesc::softmax(), LayerDesc::flatten()};
    CHECK_THROWS_AS(make_plan(s), ShapeError);

    s.layers = {};
    CHECK_THROWS_AS(make_plan(s), ShapeError);
}

TEST_CASE("spec json round-trip") {
    const ModelSpec spec = make_model_spec(Arch::kLarge, Task::kRegress);
    const ModelSpec back = spec_from_json(spec_to_json(spec));
    CHECK(back == spec);
    CHECK_THROWS_AS(spec_from_json("{"), FormatError);
    CHECK_THROWS_AS(spec_from_json(R"({"input_len":160,"input_channels":2,"layers":[{"type":"wat"}]})"),
                    FormatError);
}

TEST_CASE("initialization is seed-deterministic") {
    const Plan plan = make_plan(tiny_classifier());
    const auto a = init_params<float>(plan, 7);
    const auto b = init_params<float>(plan, 7);
    const auto c = init_params<float>(plan, 8);
    REQUIRE(a.w.size() == b.w.size());
    for (std::size_t i = 0; i < a.w.size(); ++i) CHECK(a.w[i].data == b.w[i].data);
    bool differs = false;
    for (std::size_t i = 0; i < a.w.size(); ++i) differs |= a.w[i].data != c.w[i].data;
    CHECK(differs);
    for (const auto& t : a.b) {
        for (float v : t.data) CHECK(v == 0.0f);
    }
}

TEST_CASE("forward pass produces a distribution") {
    const Plan plan = make_plan(make_model_spec(Arch::kSmall, Task::kDetect));
    const auto params = init_params<float>(plan, 3);
    Workspace<float> ws;
    ws.init(plan);
    const auto x = random_input<float>(plan, 11);
    const auto& p = forward_one<float>(plan, params, x, ws);
    REQUIRE(p.size() == 98u);
    double sum = 0.0;
    for (float v : p) {
        CHECK(v >= 0.0f);
        sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("analytic gradients match finite differences (classifier)") {
    const Plan plan = make_plan(tiny_classifier());
    auto params = init_params<double>(plan, 19);
    Workspace<double> ws;
    ws.init(plan);
    const auto x = random_input<double>(plan, 5);
    const int label = 2;

    Grads g = zeros_grads(plan);
    forward_one<double>(plan, params, x, ws);
    backward_ce<double>(plan, params, ws, label, g);

    const double h = 1e-6;
    double worst = 0.0;
    for (std::size_t li = 0; li < params.w.size(); ++li) {
        for (auto [tens, grad] : {std::pair{&params.w[li], &g.w[li]}, {&params.b[li], &g.b[li]}}) {
            for (std::size_t j = 0; j < tens->data.size(); ++j) {
                const double keep = tens->data[j];
                tens->data[j] = keep + h;
                forward_one<double>(plan, params, x, ws);
                Grads scratch = zeros_grads(plan);
                const double lp = backward_ce<double>(plan, params, ws, label, scratch);
                tens->data[j] = keep - h;
                forward_one<double>(plan, params, x, ws);
                const double lm = backward_ce<double>(plan, params, ws, label, scratch);
                tens->data[j] = keep;
                const double fd = (lp - lm) / (2.0 * h);
                const double an = grad->data[j];
                worst = std::max(worst, std::abs(fd - an) / std::max(1.0, std::abs(an)));
            }
        }
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("analytic gradients match finite differences (regressor)") {
    const Plan plan = make_plan(tiny_regressor());
    auto params = init_params<double>(plan, 23);
    Workspace<double> ws;
    ws.init(plan);
    const auto x = random_input<double>(plan, 29);
    const double target = 0.37;

    Grads g = zeros_grads(plan);
    forward_one<double>(plan, params, x, ws);
    backward_mse<double>(plan, params, ws, target, g);

    const double h = 1e-6;
    double worst = 0.0;
    for (std::size_t li = 0; li < params.w.size(); ++li) {
        for (auto [tens, grad] : {std::pair{&params.w[li], &g.w[li]}, {&params.b[li], &g.b[li]}}) {
            for (std::size_t j = 0; j < tens->data.size(); ++j) {
                const double keep = tens->data[j];
                Grads scratch = zeros_grads(plan);
                tens->data[j] = keep + h;
                forward_one<double>(plan, params, x, ws);
                const double lp = backward_mse<double>(plan, params, ws, target, scratch);
                tens->data[j] = keep - h;
                forward_one<double>(plan, params, x, ws);
                const double lm = backward_mse<double>(plan, params, ws, target, scratch);
                tens->data[j] = keep;
                const double fd = (lp - lm) / (2.0 * h);
                const double an = grad->data[j];
                worst = std::max(worst, std::abs(fd - an) / std::max(1.0, std::abs(an)));
            }
        }
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("max-pool ties keep the earlier element") {
    ModelSpec s;
    s.input_len = 4;
    s.input_channels = 1;
    s.layers = {LayerDesc::maxpool()};
    const Plan plan = make_plan(s);
    Params<float> params;  // no weighted layers
    Workspace<float> ws;
    ws.init(plan);
    const std::vector<float> x = {2.0f, 2.0f, -1.0f, -1.0f};
    forward_one<float>(plan, params, x, ws);
    CHECK(ws.pick[0][0] == 0);
    CHECK(ws.pick[0][1] == 0);
}

TEST_CASE("optimizer drives a small regression to convergence") {
    const Plan plan = make_plan(tiny_regressor());
    auto params = init_params<float>(plan, 41);
    Workspace<float> ws;
    ws.init(plan);
    AdamConfig ac;
    ac.lr = 5e-3;
    Adam opt(plan, ac);
    // Four fixed input/target pairs, full-batch steps.
    std::vector<std::vector<float>> xs;
    const std::vector<double> ys = {0.3, -0.5, 0.1, 0.7};
    for (int i = 0; i < 4; ++i) xs.push_back(random_input<float>(plan, 100 + i));

    double loss = 0.0;
    Grads g = zeros_grads(plan);
    for (int step = 0; step < 1200; ++step) {
        clear_grads(g);
        loss = 0.0;
        for (int i = 0; i < 4; ++i) {
            forward_one<float>(plan, params, xs[i], ws);
            loss += backward_mse<float>(plan, params, ws, ys[i], g);
        }
        loss /= 4.0;
        opt.step(params, g, 0.25);
    }
    CHECK(loss < 1e-4);
    CHECK(opt.steps() == 1200);
}

TEST_CASE("model files round-trip bit-exactly") {
    const ModelSpec spec = make_model_spec(Arch::kSmall, Task::kRegress);
    const Plan plan = make_plan(spec);
    const auto params = init_params<float>(plan, 77);
    const auto path = std::filesystem::temp_directory_path() / "pronto_test_model.bin";
    save_model(path, spec, params);
    const Checkpoint ck = load_model(path);
    CHECK(ck.spec == spec);
    REQUIRE(ck.params.w.size() == params.w.size());
    for (std::size_t i = 0; i < params.w.size(); ++i) {
        CHECK(ck.params.w[i].data == params.w[i].data);
        CHECK(ck.params.b[i].data == params.b[i].data);
    }
    std::filesystem::remove(path);
}

TEST_CASE("model files reject corruption") {
    const ModelSpec spec = make_model_spec(Arch::kSmall, Task::kRegress);
    const Plan plan = make_plan(spec);
    const auto params = init_params<float>(plan, 78);
    const auto path = std::filesystem::temp_directory_path() / "pronto_test_model2.bin";
    save_model(path, spec, params);

    std::ifstream in(path, std::ios::binary);
    std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();

    const auto bad = std::filesystem::temp_directory_path() / "pronto_test_model_bad.bin";
    {
        std::ofstream out(bad, std::ios::binary);
        out.write(blob.data(), static_cast<std::streamsize>(blob.size() / 2));
    }
    CHECK_THROWS_AS(load_model(bad), FormatError);
    {
        std::string wrong = blob;
        wrong[0] = 'X';
        std::ofstream out(bad, std::ios::binary);
        out.write(wrong.data(), static_cast<std::streamsize>(wrong.size()));
    }
    CHECK_THROWS_AS(load_model(bad), FormatError);
    std::filesystem::remove(path);
    std::filesystem::remove(bad);
}

TEST_CASE("saving mismatched parameters fails") {
    const ModelSpec spec = make_model_spec(Arch::kSmall, Task::kDetect);
    const Plan other = make_plan(make_model_spec(Arch::kLarge, Task::kDetect));
    const auto params = init_params<float>(other, 1);
    const auto path = std::filesystem::temp_directory_path() / "pronto_test_model3.bin";
    CHECK_THROWS_AS(save_model(path, spec, params), ShapeError);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "eeg2shape/adam.hpp"
#include "eeg2shape/grad_check.hpp"
#include "eeg2shape/ops.hpp"
#include "eeg2shape/rng.hpp"

using namespace e2s;

namespace {

// Reference convolution oracle: direct translation of the definition with an
// explicitly padded input, independent of the production kernel loops.
template <typename T>
TensorT<T> reference_conv2d(const TensorT<T>& input, const TensorT<T>& kernels,
                            const TensorT<T>& bias, Stride stride, Padding padding) {
  const int h = input.dims[0], w = input.dims[1], cin = input.dims[2];
  const int kh = kernels.dims[0], kw = kernels.dims[1], cout = kernels.dims[3];
  int out_h, out_w, pad_top, pad_left;
  if (padding == Padding::Same) {
    out_h = (h + stride.h - 1) / stride.h;
    out_w = (w + stride.w - 1) / stride.w;
    pad_top = std::max((out_h - 1) * stride.h + kh - h, 0) / 2;
    pad_left = std::max((out_w - 1) * stride.w + kw - w, 0) / 2;
  } else {
    out_h = (h - kh) / stride.h + 1;
    out_w = (w - kw) / stride.w + 1;
    pad_top = pad_left = 0;
  }
  TensorT<T> out({out_h, out_w, cout});
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      for (int co = 0; co < cout; ++co) {
        T acc = bias[co];
        for (int dy = 0; dy < kh; ++dy) {
          for (int dx = 0; dx < kw; ++dx) {
            for (int ci = 0; ci < cin; ++ci) {
              const int iy = oy * stride.h - pad_top + dy;
              const int ix = ox * stride.w - pad_left + dx;
              if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
              acc += input.at3(iy, ix, ci) * kernels.at4(dy, dx, ci, co);
            }
          }
        }
        out.at3(oy, ox, co) = acc;
      }
    }
  }
  return out;
}

// Brute-force pooling oracle.
template <typename T>
TensorT<T> reference_maxpool(const TensorT<T>& input, int wh, int ww, int sh, int sw) {
  const int h = input.dims[0], w = input.dims[1], c = input.dims[2];
  const int out_h = (h + sh - 1) / sh, out_w = (w + sw - 1) / sw;
  TensorT<T> out({out_h, out_w, c});
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      for (int ch = 0; ch < c; ++ch) {
        T best = -std::numeric_limits<T>::infinity();
        for (int y = oy * sh; y < std::min(oy * sh + wh, h); ++y) {
          for (int x = ox * sw; x < std::min(ox * sw + ww, w); ++x) {
            best = std::max(best, input.at3(y, x, ch));
          }
        }
        out.at3(oy, ox, ch) = best;
      }
    }
  }
  return out;
}

template <typename T>
TensorT<T> random_tensor(std::vector<int> dims, Rng& rng, double scale = 1.0) {
  TensorT<T> t(std::move(dims));
  for (long long i = 0; i < t.size(); ++i) t[i] = static_cast<T>(rng.normal() * scale);
  return t;
}

// Scalar probe of a tensor output through a fixed random projection, for
// finite-difference checks of layers that do not end in a scalar.
TensorD random_projection(const std::vector<int>& dims, Rng& rng) {
  return random_tensor<double>(dims, rng);
}

double dot_all(const TensorD& a, const TensorD& b) {
  double s = 0.0;
  for (long long i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST_CASE("conv2d zero input stays zero") {
  Rng rng(1);
  const Tensor input({7, 9, 3});
  const Tensor kernels = random_tensor<float>({3, 3, 3, 4}, rng);
  const Tensor bias({4});
  const Tensor out = conv2d(input, kernels, bias);
  for (long long i = 0; i < out.size(); ++i) CHECK(out[i] == 0.0f);
}

TEST_CASE("conv2d 1x1 identity kernel") {
  const Tensor input({1, 1, 1}, {5.0f});
  const Tensor kernels({1, 1, 1, 1}, {1.0f});
  const Tensor bias({1});
  const Tensor out = conv2d(input, kernels, bias, {1, 1}, Padding::Valid);
  CHECK(out.dims == std::vector<int>{1, 1, 1});
  CHECK(out[0] == doctest::Approx(5.0f));
}

TEST_CASE("conv2d 2x2 diagonal kernel matches hand result") {
  const Tensor input({2, 2, 1}, {1, 2, 3, 4});
  const Tensor kernels({2, 2, 1, 1}, {1, 0, 0, 1});
  const Tensor bias({1});
  const Tensor out = conv2d(input, kernels, bias, {1, 1}, Padding::Valid);
  CHECK(out.dims == std::vector<int>{1, 1, 1});
  CHECK(out[0] == doctest::Approx(5.0f));
}

TEST_CASE("conv2d matches the reference oracle on random tensors") {
  Rng rng(42);
  for (const auto& [h, w, cin, cout, k, s, pad] :
       {std::tuple{10, 14, 1, 32, 3, 1, Padding::Same},
        std::tuple{5, 7, 4, 8, 3, 1, Padding::Same},
        std::tuple{9, 11, 2, 3, 4, 2, Padding::Same},
        std::tuple{8, 8, 3, 5, 3, 1, Padding::Valid},
        std::tuple{11, 6, 2, 2, 5, 2, Padding::Valid}}) {
    const TensorD input = random_tensor<double>({h, w, cin}, rng);
    const TensorD kernels = random_tensor<double>({k, k, cin, cout}, rng);
    const TensorD bias = random_tensor<double>({cout}, rng);
    const TensorD got = conv2d(input, kernels, bias, {s, s}, pad);
    const TensorD want = reference_conv2d(input, kernels, bias, {s, s}, pad);
    REQUIRE(got.dims == want.dims);
    for (long long i = 0; i < got.size(); ++i) {
      CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("conv2d output dims follow the SAME/VALID contracts") {
  Rng rng(7);
  const TensorD input = random_tensor<double>({10, 14, 2}, rng);
  const TensorD kernels = random_tensor<double>({3, 3, 2, 6}, rng);
  const TensorD bias = random_tensor<double>({6}, rng);
  CHECK(conv2d(input, kernels, bias, {1, 1}, Padding::Same).dims ==
        std::vector<int>{10, 14, 6});
  CHECK(conv2d(input, kernels, bias, {2, 2}, Padding::Same).dims == std::vector<int>{5, 7, 6});
  CHECK(conv2d(input, kernels, bias, {1, 1}, Padding::Valid).dims ==
        std::vector<int>{8, 12, 6});
  CHECK(conv2d(input, kernels, bias, {2, 2}, Padding::Valid).dims == std::vector<int>{4, 6, 6});
}

TEST_CASE("conv2d is linear in its input at fixed kernels") {
  Rng rng(3);
  const TensorD x = random_tensor<double>({6, 5, 3}, rng);
  const TensorD y = random_tensor<double>({6, 5, 3}, rng);
  const TensorD kernels = random_tensor<double>({3, 3, 3, 4}, rng);
  const TensorD bias = random_tensor<double>({4}, rng);
  const double a = 1.7, b = -0.6;

  TensorD mix({6, 5, 3});
  for (long long i = 0; i < mix.size(); ++i) mix[i] = a * x[i] + b * y[i];

  const TensorD conv_mix = conv2d(mix, kernels, bias);
  const TensorD conv_x = conv2d(x, kernels, bias);
  const TensorD conv_y = conv2d(y, kernels, bias);
  // a*conv(x) + b*conv(y) counts the bias (a+b) times.
  for (long long i = 0; i < conv_mix.size(); ++i) {
    const int co = static_cast<int>(i % 4);
    const double want = a * conv_x[i] + b * conv_y[i] - (a + b - 1.0) * bias[co];
    CHECK(std::abs(conv_mix[i] - want) < 1e-10);
  }
}

TEST_CASE("conv2d rejects channel mismatch") {
  const Tensor input({4, 4, 3});
  const Tensor kernels({3, 3, 2, 4});
  const Tensor bias({4});
  CHECK_THROWS_AS(conv2d(input, kernels, bias), shape_error);
}

TEST_CASE("maxpool2d single window") {
  const Tensor input({2, 2, 1}, {1, 2, 3, 4});
  auto [out, sw] = maxpool2d(input, {2, 2}, {2, 2});
  CHECK(out.dims == std::vector<int>{1, 1, 1});
  CHECK(out[0] == 4.0f);
  CHECK(sw.rows[0] == 1);
  CHECK(sw.cols[0] == 1);
}

TEST_CASE("maxpool2d ties go to the first position in row-major order") {
  const Tensor input({4, 4, 1}, std::vector<float>(16, 3.5f));
  auto [out, sw] = maxpool2d(input, {2, 2}, {2, 2});
  for (long long i = 0; i < out.size(); ++i) CHECK(out[i] == 3.5f);
  CHECK(sw.rows[0] == 0);
  CHECK(sw.cols[0] == 0);
  CHECK(sw.rows[1] == 0);
  CHECK(sw.cols[1] == 2);
  CHECK(sw.rows[3] == 2);
  CHECK(sw.cols[3] == 2);
}

TEST_CASE("maxpool2d ceil-mode dims: 5x7 pools to 3x4") {
  Rng rng(11);
  const Tensor input = random_tensor<float>({5, 7, 2}, rng);
  auto [out, sw] = maxpool2d(input, {2, 2}, {2, 2});
  // ceil(5/2) x ceil(7/2), the oracle for the encoder pipeline dims.
  CHECK(out.dims == std::vector<int>{3, 4, 2});
}

TEST_CASE("maxpool2d matches brute-force oracle and records in-window switches") {
  Rng rng(13);
  const Tensor input = random_tensor<float>({9, 7, 3}, rng);
  auto [out, sw] = maxpool2d(input, {2, 2}, {2, 2});
  const Tensor want = reference_maxpool(input, 2, 2, 2, 2);
  REQUIRE(out.dims == want.dims);
  for (long long i = 0; i < out.size(); ++i) CHECK(out[i] == want[i]);
  const int out_w = out.dims[1], c = out.dims[2];
  for (std::size_t idx = 0; idx < sw.rows.size(); ++idx) {
    const int flat = static_cast<int>(idx) / c;
    const int oy = flat / out_w, ox = flat % out_w;
    CHECK(sw.rows[idx] >= oy * 2);
    CHECK(sw.rows[idx] < std::min(oy * 2 + 2, 9));
    CHECK(sw.cols[idx] >= ox * 2);
    CHECK(sw.cols[idx] < std::min(ox * 2 + 2, 7));
  }
}

TEST_CASE("maxpool2d rejects empty input at construction") {
  CHECK_THROWS_AS(Tensor({0, 4, 1}), shape_error);
}

TEST_CASE("unpool places each max at its recorded position and zeros elsewhere") {
  Rng rng(17);
  const Tensor input = random_tensor<float>({6, 8, 2}, rng);
  auto [pooled, sw] = maxpool2d(input, {2, 2}, {2, 2});
  const Tensor unpooled = max_unpool2d(pooled, sw);

  Tensor expected(input.dims);
  const int c = pooled.dims[2], in_w = input.dims[1];
  for (std::size_t idx = 0; idx < sw.rows.size(); ++idx) {
    const int ch = static_cast<int>(idx % c);
    expected.data[(static_cast<std::size_t>(sw.rows[idx]) * in_w + sw.cols[idx]) * c + ch] =
        pooled.data[idx];
  }
  for (long long i = 0; i < unpooled.size(); ++i) CHECK(unpooled[i] == expected[i]);
}

TEST_CASE("unpool then re-pool is exact on nonnegative input") {
  Rng rng(19);
  Tensor input = random_tensor<float>({10, 14, 3}, rng);
  for (long long i = 0; i < input.size(); ++i) input[i] = std::abs(input[i]);
  auto [pooled, sw] = maxpool2d(input, {2, 2}, {2, 2});
  auto [repooled, sw2] = maxpool2d(max_unpool2d(pooled, sw), {2, 2}, {2, 2});
  for (long long i = 0; i < pooled.size(); ++i) CHECK(repooled[i] == pooled[i]);
}

TEST_CASE("upsample2x duplicates cells") {
  const Tensor single({1, 1, 1}, {1.0f});
  const Tensor up = upsample2x(single);
  CHECK(up.dims == std::vector<int>{2, 2, 1});
  for (long long i = 0; i < 4; ++i) CHECK(up[i] == 1.0f);

  const Tensor quad({2, 2, 1}, {1, 2, 3, 4});
  const Tensor up2 = upsample2x(quad);
  CHECK(up2.dims == std::vector<int>{4, 4, 1});
  CHECK(up2.at3(0, 0, 0) == 1.0f);
  CHECK(up2.at3(0, 1, 0) == 1.0f);
  CHECK(up2.at3(1, 1, 0) == 1.0f);
  CHECK(up2.at3(0, 2, 0) == 2.0f);
  CHECK(up2.at3(3, 3, 0) == 4.0f);
}

TEST_CASE("upsample2x preserves the mean") {
  Rng rng(23);
  const TensorD input = random_tensor<double>({5, 6, 4}, rng);
  const TensorD up = upsample2x(input);
  double mean_in = 0, mean_up = 0;
  for (long long i = 0; i < input.size(); ++i) mean_in += input[i];
  for (long long i = 0; i < up.size(); ++i) mean_up += up[i];
  mean_in /= static_cast<double>(input.size());
  mean_up /= static_cast<double>(up.size());
  CHECK(mean_in == doctest::Approx(mean_up).epsilon(1e-12));
}

TEST_CASE("upsample2x backward sums each 2x2 block") {
  const Tensor d_out({2, 2, 1}, {1, 1, 1, 1});
  const Tensor d_in = upsample2x_backward(d_out);
  CHECK(d_in.dims == std::vector<int>{1, 1, 1});
  CHECK(d_in[0] == 4.0f);
}

TEST_CASE("dense identity and bias behavior") {
  const Tensor id_w({2, 2}, {1, 0, 0, 1});
  const Tensor zero_b({2});
  const Tensor x({2}, {3, -4});
  const Tensor out = dense(x, id_w, zero_b);
  CHECK(out[0] == 3.0f);
  CHECK(out[1] == -4.0f);

  const Tensor zero_w({2, 3});
  const Tensor b({3}, {1, 2, 3});
  const Tensor out2 = dense(x, zero_w, b);
  for (int j = 0; j < 3; ++j) CHECK(out2[j] == b[j]);
}

TEST_CASE("dense matches the hand matrix-multiply oracle") {
  const Tensor x({2}, {1, 2});
  const Tensor w({2, 2}, {1, 1, 1, -1});
  const Tensor b({2});
  const Tensor out = dense(x, w, b);
  CHECK(out[0] == doctest::Approx(3.0f));
  CHECK(out[1] == doctest::Approx(-1.0f));
}

TEST_CASE("dense rejects shape mismatch") {
  const Tensor x({3});
  const Tensor w({2, 2});
  const Tensor b({2});
  CHECK_THROWS_AS(dense(x, w, b), shape_error);
}

TEST_CASE("activation fixed points") {
  const Tensor x({2}, {-1.0f, 2.0f});
  const Tensor r = relu(x);
  CHECK(r[0] == 0.0f);
  CHECK(r[1] == 2.0f);

  const Tensor zero({1});
  CHECK(tanh_act(zero)[0] == 0.0f);
  CHECK(sigmoid(zero)[0] == 0.5f);

  const TensorD logits({5});
  const TensorD sm = softmax(logits);
  for (int i = 0; i < 5; ++i) CHECK(sm[i] == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("softmax sums to one and shifts are invariant (double)") {
  Rng rng(29);
  for (int rep = 0; rep < 20; ++rep) {
    const TensorD x = random_tensor<double>({7}, rng, 3.0);
    const TensorD sm = softmax(x);
    double sum = 0.0;
    for (long long i = 0; i < sm.size(); ++i) {
      CHECK(sm[i] > 0.0);
      sum += sm[i];
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);

    TensorD shifted = x;
    for (long long i = 0; i < shifted.size(); ++i) shifted[i] += 123.456;
    const TensorD sm2 = softmax(shifted);
    for (long long i = 0; i < sm.size(); ++i) CHECK(std::abs(sm[i] - sm2[i]) < 1e-10);
  }
}

TEST_CASE("softmax in float mode sums to one within 1e-6") {
  Rng rng(31);
  const Tensor x = random_tensor<float>({5}, rng, 2.0);
  const Tensor sm = softmax(x);
  float sum = 0.0f;
  for (long long i = 0; i < sm.size(); ++i) sum += sm[i];
  CHECK(std::abs(sum - 1.0f) < 1e-6f);
}

TEST_CASE("adam zero gradient leaves parameter and moments unchanged") {
  TensorD param({3}, {1.0, -2.0, 3.0});
  const TensorD grad({3});
  AdamStateT<double> st({3}, 2e-4, 0.5, 0.999);
  adam_step(param, grad, st);
  CHECK(param[0] == 1.0);
  CHECK(param[1] == -2.0);
  CHECK(param[2] == 3.0);
  for (int i = 0; i < 3; ++i) {
    CHECK(st.first_moment[i] == 0.0);
    CHECK(st.second_moment[i] == 0.0);
  }
  CHECK(st.step == 1);
}

TEST_CASE("adam single step matches the closed form") {
  // One step from zero moments: m_hat = g, v_hat = g^2, so the update is
  // -lr * g / (|g| + eps); for g = 1 that is -lr / (1 + eps).
  const double lr = 2e-4, b1 = 0.5, b2 = 0.999, eps = 1e-8;
  TensorD param({1}, {0.0});
  TensorD grad({1}, {1.0});
  AdamStateT<double> st({1}, lr, b1, b2, eps);
  adam_step(param, grad, st);
  const double expected = -lr * 1.0 / (1.0 + eps);
  CHECK(param[0] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::abs(param[0] + 2e-4) < 1e-11);
  CHECK(st.step == 1);
}

TEST_CASE("adam moves monotonically against a constant gradient") {
  TensorD param({1}, {0.5});
  const TensorD grad({1}, {0.75});
  AdamStateT<double> st({1}, 1e-3, 0.9, 0.999);
  const double p0 = param[0];
  adam_step(param, grad, st);
  const double p1 = param[0];
  adam_step(param, grad, st);
  const double p2 = param[0];
  CHECK(p1 < p0);
  CHECK(p2 < p1);
}

TEST_CASE("adam rejects non-finite gradients naming the parameter") {
  TensorD param({2});
  TensorD grad({2});
  grad[1] = std::numeric_limits<double>::quiet_NaN();
  AdamStateT<double> st({2}, 1e-3, 0.9, 0.999);
  try {
    adam_step(param, grad, st, "conv1_kernels");
    FAIL("expected numeric_error");
  } catch (const numeric_error& e) {
    CHECK(std::string(e.what()).find("conv1_kernels") != std::string::npos);
  }
}

TEST_CASE("grad_check validates the dense layer") {
  Rng rng(101);
  TensorD x = random_tensor<double>({6}, rng);
  TensorD w = random_tensor<double>({6, 4}, rng, 0.5);
  TensorD b = random_tensor<double>({4}, rng, 0.1);
  const TensorD proj = random_projection({4}, rng);

  auto loss = [&] { return dot_all(dense(x, w, b), proj); };
  auto analytic = [&] {
    DenseGrads<double> g = dense_backward(x, w, proj);
    return std::vector<TensorD>{g.input, g.weights, g.bias};
  };
  const auto report = grad_check({{"input", &x}, {"weights", &w}, {"bias", &b}}, loss, analytic,
                                 1e-4, 24);
  INFO(report.summary());
  CHECK(report.passed);
}

TEST_CASE("grad_check validates conv2d 3x3 SAME on a 5x5 input") {
  Rng rng(103);
  TensorD x = random_tensor<double>({5, 5, 2}, rng);
  TensorD k = random_tensor<double>({3, 3, 2, 3}, rng, 0.5);
  TensorD b = random_tensor<double>({3}, rng, 0.1);
  const TensorD proj = random_projection({5, 5, 3}, rng);

  auto loss = [&] { return dot_all(conv2d(x, k, b), proj); };
  auto analytic = [&] {
    Conv2dGrads<double> g = conv2d_backward(x, k, proj);
    return std::vector<TensorD>{g.input, g.kernels, g.bias};
  };
  const auto report = grad_check({{"input", &x}, {"kernels", &k}, {"bias", &b}}, loss, analytic,
                                 1e-4, 24);
  INFO(report.summary());
  CHECK(report.passed);
}

TEST_CASE("grad_check validates activations away from kinks") {
  Rng rng(107);
  TensorD x = random_tensor<double>({12}, rng);
  for (long long i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) < 1e-3) x[i] = 0.25;  // keep relu probes away from 0
  }
  const TensorD proj = random_projection({12}, rng);

  SUBCASE("relu") {
    auto loss = [&] { return dot_all(relu(x), proj); };
    auto analytic = [&] { return std::vector<TensorD>{relu_backward(x, proj)}; };
    const auto report = grad_check({{"input", &x}}, loss, analytic, 1e-4, 12);
    INFO(report.summary());
    CHECK(report.passed);
  }
  SUBCASE("sigmoid") {
    auto loss = [&] { return dot_all(sigmoid(x), proj); };
    auto analytic = [&] { return std::vector<TensorD>{sigmoid_backward(sigmoid(x), proj)}; };
    const auto report = grad_check({{"input", &x}}, loss, analytic, 1e-4, 12);
    INFO(report.summary());
    CHECK(report.passed);
  }
  SUBCASE("tanh") {
    auto loss = [&] { return dot_all(tanh_act(x), proj); };
    auto analytic = [&] { return std::vector<TensorD>{tanh_backward(tanh_act(x), proj)}; };
    const auto report = grad_check({{"input", &x}}, loss, analytic, 1e-4, 12);
    INFO(report.summary());
    CHECK(report.passed);
  }
  SUBCASE("softmax") {
    auto loss = [&] { return dot_all(softmax(x), proj); };
    auto analytic = [&] { return std::vector<TensorD>{softmax_backward(softmax(x), proj)}; };
    const auto report = grad_check({{"input", &x}}, loss, analytic, 1e-4, 12);
    INFO(report.summary());
    CHECK(report.passed);
  }
}

TEST_CASE("grad_check validates maxpool and upsample backward") {
  Rng rng(109);
  TensorD x = random_tensor<double>({6, 6, 2}, rng);

  SUBCASE("maxpool") {
    const TensorD proj = random_projection({3, 3, 2}, rng);
    auto loss = [&] {
      auto [out, sw] = maxpool2d(x, {2, 2}, {2, 2});
      return dot_all(out, proj);
    };
    auto analytic = [&] {
      auto [out, sw] = maxpool2d(x, {2, 2}, {2, 2});
      TensorD d = proj;
      return std::vector<TensorD>{maxpool2d_backward(d, sw)};
    };
    const auto report = grad_check({{"input", &x}}, loss, analytic, 1e-4, 16);
    INFO(report.summary());
    CHECK(report.passed);
  }
  SUBCASE("upsample2x") {
    const TensorD proj = random_projection({12, 12, 2}, rng);
    auto loss = [&] { return dot_all(upsample2x(x), proj); };
    auto analytic = [&] { return std::vector<TensorD>{upsample2x_backward(proj)}; };
    const auto report = grad_check({{"input", &x}}, loss, analytic, 1e-4, 16);
    INFO(report.summary());
    CHECK(report.passed);
  }
}

TEST_CASE("cross entropy with logits matches softmax and log") {
  Rng rng(113);
  const TensorD logits = random_tensor<double>({5}, rng, 2.0);
  auto [loss, d] = cross_entropy_with_logits(logits, 2);
  const TensorD probs = softmax(logits);
  CHECK(loss == doctest::Approx(-std::log(probs[2])).epsilon(1e-12));
  for (int i = 0; i < 5; ++i) {
    const double want = probs[i] - (i == 2 ? 1.0 : 0.0);
    CHECK(d[i] == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("fixed seed gives bit-identical op sequences") {
  auto run_once = [] {
    Rng rng(777);
    Tensor x = random_tensor<float>({8, 9, 2}, rng);
    const Tensor k = random_tensor<float>({3, 3, 2, 4}, rng, 0.1);
    const Tensor b = random_tensor<float>({4}, rng, 0.1);
    Tensor out = conv2d(x, k, b);
    out = relu(out);
    auto [pooled, sw] = maxpool2d(out, {2, 2}, {2, 2});
    return pooled;
  };
  const Tensor a = run_once();
  const Tensor b = run_once();
  REQUIRE(a.size() == b.size());
  for (long long i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "csfall/denoise.hpp"
#include "test_util.hpp"

using namespace csfall;
using csfall::test::random_frame;

namespace {

// independent TV oracle (forward differences, isotropic)
double tv_oracle(const Frame& f) {
    double tv = 0.0;
    for (int r = 0; r < f.height; ++r)
        for (int c = 0; c < f.width; ++c) {
            const double dx = c + 1 < f.width ? f.at(r, c + 1) - f.at(r, c) : 0.0;
            const double dy = r + 1 < f.height ? f.at(r + 1, c) - f.at(r, c) : 0.0;
            tv += std::hypot(dx, dy);
        }
    return tv;
}

double mse_oracle(const Frame& a, const Frame& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        const double d = a.pixels[i] - b.pixels[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.pixels.size());
}

DenoiseRequest request(Frame image, double strength) {
    DenoiseRequest req;
    req.image = std::move(image);
    req.strength = strength;
    return req;
}

}  // namespace

TEST_CASE("every denoiser is the identity at strength zero and deterministic") {
    const Frame noisy = random_frame(16, 16, 21);
    for (const DenoiserKind kind :
         {DenoiserKind::Identity, DenoiserKind::GaussianBlur, DenoiserKind::Median,
          DenoiserKind::Tv, DenoiserKind::Nlm}) {
        DenoiserSpec spec;
        spec.kind = kind;
        if (kind != DenoiserKind::Median) {  // median has no strength knob
            const Frame out = apply_denoiser(spec, noisy, 0.0);
            for (std::size_t i = 0; i < out.pixels.size(); ++i)
                CHECK(std::abs(out.pixels[i] - noisy.pixels[i]) < 1e-9);
        }
        CHECK(apply_denoiser(spec, noisy, 8.0) == apply_denoiser(spec, noisy, 8.0));
    }
}

TEST_CASE("every denoiser maps constant frames to themselves") {
    const Frame flat(12, 12, 77.5);
    for (const DenoiserKind kind :
         {DenoiserKind::GaussianBlur, DenoiserKind::Median, DenoiserKind::Tv,
          DenoiserKind::Nlm}) {
        DenoiserSpec spec;
        spec.kind = kind;
        const Frame out = apply_denoiser(spec, flat, 6.0);
        for (double p : out.pixels) CHECK(std::abs(p - 77.5) < 1e-9);
    }
}

TEST_CASE("gaussian blur preserves constants tightly and total mass") {
    const Frame flat(9, 9, 13.25);
    const Frame blurred = gaussian_blur(request(flat, 2.0));
    for (double p : blurred.pixels) CHECK(std::abs(p - 13.25) < 1e-12);

    Frame impulse(17, 17, 0.0);
    impulse.at(8, 8) = 1000.0;
    const Frame out = gaussian_blur(request(impulse, 2.0));
    double mass_in = 0.0, mass_out = 0.0;
    for (double p : impulse.pixels) mass_in += p;
    for (double p : out.pixels) mass_out += p;
    CHECK(std::abs(mass_in - mass_out) < 1e-9);
}

TEST_CASE("median filter rejects a single salt pixel") {
    Frame f(5, 5, 10.0);
    f.at(2, 2) = 255.0;
    DenoiseRequest req = request(f, 0.0);
    req.kernel_radius = 1;
    const Frame out = median_filter(req);
    for (double p : out.pixels) CHECK(p == 10.0);
}

TEST_CASE("median output stays within the input range") {
    const Frame f = random_frame(11, 13, 33);
    DenoiseRequest req = request(f, 0.0);
    req.kernel_radius = 2;
    const Frame out = median_filter(req);
    const auto [lo, hi] = std::minmax_element(f.pixels.begin(), f.pixels.end());
    for (double p : out.pixels) {
        CHECK(p >= *lo);
        CHECK(p <= *hi);
    }
    CHECK_THROWS_AS(
        [&] {
            DenoiseRequest bad = request(f, 0.0);
            bad.kernel_radius = 0;
            return median_filter(bad);
        }(),
        std::invalid_argument);
}

TEST_CASE("tv denoising reduces total variation on a noisy step edge") {
    Frame step(32, 32, 0.0);
    for (int r = 0; r < 32; ++r)
        for (int c = 16; c < 32; ++c) step.at(r, c) = 100.0;
    const Frame noisy = add_gaussian_noise(step, 10.0, 4);
    const Frame out = tv_denoise(request(noisy, 10.0));

    CHECK(tv_oracle(out) < tv_oracle(noisy));

    // ||out - noisy|| stays within twice the injected noise energy
    double diff2 = 0.0, noise2 = 0.0;
    for (std::size_t i = 0; i < noisy.pixels.size(); ++i) {
        diff2 += (out.pixels[i] - noisy.pixels[i]) * (out.pixels[i] - noisy.pixels[i]);
        noise2 += (noisy.pixels[i] - step.pixels[i]) * (noisy.pixels[i] - step.pixels[i]);
    }
    CHECK(std::sqrt(diff2) <= 2.0 * std::sqrt(noise2));
}

TEST_CASE("tv denoising reduces noise on a checkerboard") {
    Frame board(16, 16, 0.0);
    for (int r = 0; r < 16; ++r)
        for (int c = 0; c < 16; ++c) board.at(r, c) = ((r / 4 + c / 4) % 2) ? 120.0 : 40.0;
    const Frame noisy = add_gaussian_noise(board, 12.0, 5);
    const Frame out = tv_denoise(request(noisy, 12.0));
    CHECK(tv_oracle(out) < tv_oracle(noisy));
}

TEST_CASE("nlm improves mse on noisy periodic texture") {
    Frame texture(24, 24, 0.0);
    for (int r = 0; r < 24; ++r)
        for (int c = 0; c < 24; ++c)
            texture.at(r, c) = 100.0 + 50.0 * std::sin(2.0 * 3.14159265358979 * c / 6.0);
    const Frame noisy = add_gaussian_noise(texture, 15.0, 6);
    const Frame out = nlm_denoise(request(noisy, 15.0));
    CHECK(mse_oracle(out, texture) < mse_oracle(noisy, texture));
}

TEST_CASE("nlm stays within range and validates geometry") {
    const Frame f = random_frame(9, 9, 41);
    const Frame out = nlm_denoise(request(f, 10.0));
    const auto [lo, hi] = std::minmax_element(f.pixels.begin(), f.pixels.end());
    for (double p : out.pixels) {
        CHECK(p >= *lo - 1e-12);
        CHECK(p <= *hi + 1e-12);
    }

    DenoiseRequest even = request(f, 10.0);
    even.patch_size = 4;
    CHECK_THROWS_AS(nlm_denoise(even), std::invalid_argument);

    DenoiseRequest small_window = request(f, 10.0);
    small_window.patch_size = 5;
    small_window.search_window = 3;
    CHECK_THROWS_AS(nlm_denoise(small_window), std::invalid_argument);

    DenoiseRequest tiny_frame = request(Frame(5, 5, 1.0), 10.0);
    tiny_frame.search_window = 7;
    CHECK_THROWS_AS(nlm_denoise(tiny_frame), std::invalid_argument);
}

TEST_CASE("total_variation matches the oracle") {
    const Frame f = random_frame(10, 10, 55);
    CHECK(total_variation(f) == doctest::Approx(tv_oracle(f)).epsilon(1e-12));
    CHECK(total_variation(Frame(6, 6, 9.0)) == 0.0);
}

TEST_CASE("denoiser names roundtrip") {
    for (const DenoiserKind kind :
         {DenoiserKind::Identity, DenoiserKind::GaussianBlur, DenoiserKind::Median,
          DenoiserKind::Tv, DenoiserKind::Nlm})
        CHECK(denoiser_kind_from_name(denoiser_kind_name(kind)) == kind);
    CHECK_THROWS_AS(denoiser_kind_from_name("bm3d"), std::invalid_argument);
}

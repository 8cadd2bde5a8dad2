#include "csfall/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace csfall {

namespace {

// Reflect-101 indexing (mirror about the boundary pixel), folded until in
// range so radii larger than the image stay defined.
int reflect(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * n - 2 - i;
    }
    return i;
}

void check_image(const Frame& image) {
    if (image.width < 1 || image.height < 1 ||
        image.pixels.size() != static_cast<std::size_t>(image.width) * image.height)
        throw std::invalid_argument("denoise: malformed frame");
}

}  // namespace

Frame gaussian_blur(const DenoiseRequest& req) {
    check_image(req.image);
    if (req.strength < 0.0) throw std::invalid_argument("blur strength must be nonnegative");
    const double sigma = req.strength;  // kernel sigma factor 1.0
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    if (radius == 0) return req.image;

    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += kernel[i + radius];
    }
    for (double& k : kernel) k /= sum;

    const int w = req.image.width, h = req.image.height;
    Frame horizontal(w, h), out(w, h);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[i + radius] * req.image.at(r, reflect(c + i, w));
            horizontal.at(r, c) = acc;
        }
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[i + radius] * horizontal.at(reflect(r + i, h), c);
            out.at(r, c) = acc;
        }
    return out;
}

Frame median_filter(const DenoiseRequest& req) {
    check_image(req.image);
    if (req.kernel_radius < 1) throw std::invalid_argument("median radius must be >= 1");
    const int radius = req.kernel_radius;
    const int w = req.image.width, h = req.image.height;
    Frame out(w, h);
    std::vector<double> window;
    window.reserve(static_cast<std::size_t>(2 * radius + 1) * (2 * radius + 1));
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            window.clear();
            for (int dr = -radius; dr <= radius; ++dr)
                for (int dc = -radius; dc <= radius; ++dc)
                    window.push_back(req.image.at(reflect(r + dr, h), reflect(c + dc, w)));
            auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
            std::nth_element(window.begin(), mid, window.end());
            out.at(r, c) = *mid;
        }
    return out;
}

double total_variation(const Frame& frame) {
    double tv = 0.0;
    for (int r = 0; r < frame.height; ++r)
        for (int c = 0; c < frame.width; ++c) {
            const double dx = (c + 1 < frame.width) ? frame.at(r, c + 1) - frame.at(r, c) : 0.0;
            const double dy = (r + 1 < frame.height) ? frame.at(r + 1, c) - frame.at(r, c) : 0.0;
            tv += std::sqrt(dx * dx + dy * dy);
        }
    return tv;
}

Frame tv_denoise(const DenoiseRequest& req) {
    check_image(req.image);
    if (req.strength < 0.0) throw std::invalid_argument("tv strength must be nonnegative");
    if (req.tv_iterations < 1) throw std::invalid_argument("tv iterations must be >= 1");
    if (req.strength == 0.0) return req.image;  // fidelity weight is infinite

    // Chambolle dual projection for min_v TV(v) + 1/(2 lambda) ||v - f||^2
    // with lambda = strength^2; v = f - lambda div p at the end.
    const double lambda = req.strength * req.strength;
    const double tau = 0.25;
    const int w = req.image.width, h = req.image.height;
    const std::size_t n = static_cast<std::size_t>(w) * h;
    std::vector<double> px(n, 0.0), py(n, 0.0), div_p(n, 0.0), work(n, 0.0);
    const auto idx = [w](int r, int c) { return static_cast<std::size_t>(r) * w + c; };

    for (int it = 0; it < req.tv_iterations; ++it) {
        // div p with backward differences (adjoint of the forward gradient)
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c) {
                double d = 0.0;
                d += (c == 0) ? px[idx(r, c)]
                              : (c == w - 1 ? -px[idx(r, c - 1)]
                                            : px[idx(r, c)] - px[idx(r, c - 1)]);
                d += (r == 0) ? py[idx(r, c)]
                              : (r == h - 1 ? -py[idx(r - 1, c)]
                                            : py[idx(r, c)] - py[idx(r - 1, c)]);
                div_p[idx(r, c)] = d;
            }
        for (std::size_t i = 0; i < n; ++i) work[i] = div_p[i] - req.image.pixels[i] / lambda;
        // p <- (p + tau grad(work)) / (1 + tau |grad(work)|)
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c) {
                const double gx = (c + 1 < w) ? work[idx(r, c + 1)] - work[idx(r, c)] : 0.0;
                const double gy = (r + 1 < h) ? work[idx(r + 1, c)] - work[idx(r, c)] : 0.0;
                const double denom = 1.0 + tau * std::sqrt(gx * gx + gy * gy);
                px[idx(r, c)] = (px[idx(r, c)] + tau * gx) / denom;
                py[idx(r, c)] = (py[idx(r, c)] + tau * gy) / denom;
            }
    }

    Frame out(w, h);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            double d = 0.0;
            d += (c == 0) ? px[idx(r, c)]
                          : (c == w - 1 ? -px[idx(r, c - 1)]
                                        : px[idx(r, c)] - px[idx(r, c - 1)]);
            d += (r == 0) ? py[idx(r, c)]
                          : (r == h - 1 ? -py[idx(r - 1, c)]
                                        : py[idx(r, c)] - py[idx(r - 1, c)]);
            out.at(r, c) = req.image.at(r, c) - lambda * d;
        }
    return out;
}

Frame nlm_denoise(const DenoiseRequest& req) {
    check_image(req.image);
    if (req.strength < 0.0) throw std::invalid_argument("nlm strength must be nonnegative");
    if (req.patch_size % 2 == 0 || req.search_window % 2 == 0)
        throw std::invalid_argument("nlm patch and window sizes must be odd");
    if (req.search_window < req.patch_size)
        throw std::invalid_argument("nlm search window must cover the patch");
    if (req.image.width < req.search_window || req.image.height < req.search_window)
        throw std::invalid_argument("frame smaller than the nlm search window");
    if (req.strength == 0.0) return req.image;  // self-weight dominates

    const double h_param = 0.4 * req.strength * req.patch_size * req.patch_size;
    const double h2 = h_param * h_param;
    const int pr = (req.patch_size - 1) / 2;
    const int wr = (req.search_window - 1) / 2;
    const int w = req.image.width, h = req.image.height;
    Frame out(w, h);

    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            double acc = 0.0, wsum = 0.0;
            for (int dr = -wr; dr <= wr; ++dr)
                for (int dc = -wr; dc <= wr; ++dc) {
                    double dist2 = 0.0;
                    for (int prr = -pr; prr <= pr; ++prr)
                        for (int pcc = -pr; pcc <= pr; ++pcc) {
                            const double a =
                                req.image.at(reflect(r + prr, h), reflect(c + pcc, w));
                            const double b = req.image.at(reflect(r + dr + prr, h),
                                                          reflect(c + dc + pcc, w));
                            dist2 += (a - b) * (a - b);
                        }
                    const double weight = std::exp(-dist2 / h2);
                    acc += weight * req.image.at(reflect(r + dr, h), reflect(c + dc, w));
                    wsum += weight;
                }
            out.at(r, c) = acc / wsum;  // self-weight 1 keeps wsum > 0
        }
    return out;
}

Frame apply_denoiser(const DenoiserSpec& spec, const Frame& noisy, double omega) {
    if (omega < 0.0) throw std::invalid_argument("denoiser strength must be nonnegative");
    DenoiseRequest req;
    req.image = noisy;
    req.strength = omega;
    req.kernel_radius = spec.kernel_radius;
    req.patch_size = spec.patch_size;
    req.search_window = spec.search_window;
    req.tv_iterations = spec.tv_iterations;
    switch (spec.kind) {
        case DenoiserKind::Identity:
            return noisy;
        case DenoiserKind::GaussianBlur:
            return gaussian_blur(req);
        case DenoiserKind::Median:
            return median_filter(req);
        case DenoiserKind::Tv:
            return tv_denoise(req);
        case DenoiserKind::Nlm:
            return nlm_denoise(req);
    }
    throw std::invalid_argument("unknown denoiser kind");
}

DenoiserKind denoiser_kind_from_name(const std::string& name) {
    if (name == "identity") return DenoiserKind::Identity;
    if (name == "gaussian_blur") return DenoiserKind::GaussianBlur;
    if (name == "median") return DenoiserKind::Median;
    if (name == "tv") return DenoiserKind::Tv;
    if (name == "nlm") return DenoiserKind::Nlm;
    throw std::invalid_argument("unknown denoiser: " + name);
}

std::string denoiser_kind_name(DenoiserKind kind) {
    switch (kind) {
        case DenoiserKind::Identity: return "identity";
        case DenoiserKind::GaussianBlur: return "gaussian_blur";
        case DenoiserKind::Median: return "median";
        case DenoiserKind::Tv: return "tv";
        case DenoiserKind::Nlm: return "nlm";
    }
    return "unknown";
}

}  // namespace csfall

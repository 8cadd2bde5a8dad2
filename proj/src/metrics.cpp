#include "csfall/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace csfall {

double mse(const Frame& a, const Frame& b) {
    if (!a.same_dims(b))
        throw std::invalid_argument("mse: frame dimensions differ");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        const double d = a.pixels[i] - b.pixels[i];
        sum += d * d;
    }
    return sum / static_cast<double>(a.pixels.size());
}

double psnr(const Frame& a, const Frame& b) {
    const double err = mse(a, b);
    if (err == 0.0) return 99.0;
    return 10.0 * std::log10(255.0 * 255.0 / err);
}

}  // namespace csfall

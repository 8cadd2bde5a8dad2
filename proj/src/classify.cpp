#include "csfall/classify.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace csfall {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::array<double, 4> standardize(const BaselineModel& model, const FeatureVector& f) {
    const auto raw = f.as_array();
    std::array<double, 4> z{};
    for (std::size_t i = 0; i < 4; ++i) z[i] = (raw[i] - model.feature_mean[i]) / model.feature_std[i];
    return z;
}

double decision_value(const BaselineModel& model, const std::array<double, 4>& z) {
    double acc = model.weights[4];  // bias
    for (std::size_t i = 0; i < 4; ++i) acc += model.weights[i] * z[i];
    return acc;
}

}  // namespace

FeatureVector extract_features(const ForegroundMask& mask, int frame_width, int frame_height) {
    if (!mask.bbox || mask.pixel_count == 0) throw NoObjectError();
    (void)frame_width;
    const BBox& box = *mask.bbox;
    const double box_h = box.row_max - box.row_min + 1;
    const double box_w = box.col_max - box.col_min + 1;

    double sum_r = 0.0, sum_c = 0.0;
    for (int r = 0; r < mask.height; ++r)
        for (int c = 0; c < mask.width; ++c)
            if (mask.at(r, c)) {
                sum_r += r;
                sum_c += c;
            }
    const double n = mask.pixel_count;
    const double mean_r = sum_r / n, mean_c = sum_c / n;

    // Central second moments; x = column, y = row.
    double mu20 = 0.0, mu02 = 0.0, mu11 = 0.0;
    for (int r = 0; r < mask.height; ++r)
        for (int c = 0; c < mask.width; ++c)
            if (mask.at(r, c)) {
                const double dy = r - mean_r, dx = c - mean_c;
                mu20 += dx * dx;
                mu02 += dy * dy;
                mu11 += dx * dy;
            }
    mu20 /= n;
    mu02 /= n;
    mu11 /= n;

    // Major-axis angle from the horizontal, then folded to degrees from
    // vertical in [0, 90].
    const double theta_h = 0.5 * std::atan2(2.0 * mu11, mu20 - mu02);
    const double from_vertical = 90.0 - std::abs(theta_h * 180.0 / 3.14159265358979323846);

    FeatureVector f;
    f.aspect_ratio = box_h / box_w;
    f.fill_ratio = n / (box_h * box_w);
    f.orientation_deg = from_vertical;
    f.centroid_height = mean_r / frame_height;
    return f;
}

BaselineModel train_baseline(const std::vector<std::pair<FeatureVector, Decision>>& dataset) {
    bool has_fall = false, has_nofall = false;
    for (const auto& [f, d] : dataset) (d == Decision::Fall ? has_fall : has_nofall) = true;
    if (!has_fall || !has_nofall)
        throw std::invalid_argument("training set must contain both classes");

    BaselineModel model;
    const double n = static_cast<double>(dataset.size());
    for (std::size_t i = 0; i < 4; ++i) {
        double mean = 0.0;
        for (const auto& [f, d] : dataset) mean += f.as_array()[i];
        mean /= n;
        double var = 0.0;
        for (const auto& [f, d] : dataset) {
            const double delta = f.as_array()[i] - mean;
            var += delta * delta;
        }
        var /= n;
        model.feature_mean[i] = mean;
        model.feature_std[i] = var > 0.0 ? std::sqrt(var) : 1.0;
    }

    std::vector<std::array<double, 4>> inputs;
    std::vector<double> targets;
    inputs.reserve(dataset.size());
    for (const auto& [f, d] : dataset) {
        inputs.push_back(standardize(model, f));
        targets.push_back(d == Decision::Fall ? 1.0 : 0.0);
    }

    const int epochs = 500;
    const double lr = 0.1;
    for (int e = 0; e < epochs; ++e) {
        std::array<double, 5> grad{};
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            const double err = logistic(decision_value(model, inputs[i])) - targets[i];
            for (std::size_t j = 0; j < 4; ++j) grad[j] += err * inputs[i][j];
            grad[4] += err;
        }
        for (std::size_t j = 0; j < 5; ++j) model.weights[j] -= lr * grad[j] / n;
    }
    return model;
}

Label classify(const BaselineModel& model, const FeatureVector& features) {
    const double conf = logistic(decision_value(model, standardize(model, features)));
    return {conf > model.threshold ? Decision::Fall : Decision::NoFall, conf};
}

double agreement(const std::vector<Label>& labels_a, const std::vector<Label>& labels_b) {
    if (labels_a.size() != labels_b.size())
        throw std::invalid_argument("agreement: label lists differ in length");
    if (labels_a.empty()) throw std::invalid_argument("agreement: empty label lists");
    std::size_t equal = 0;
    for (std::size_t i = 0; i < labels_a.size(); ++i)
        if (labels_a[i].decision == labels_b[i].decision) ++equal;
    return static_cast<double>(equal) / static_cast<double>(labels_a.size());
}

void save_model(const BaselineModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file " + path.string());
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "# features: aspect_ratio fill_ratio orientation_deg centroid_height"
                  " ; mean: %.17g %.17g %.17g %.17g ; std: %.17g %.17g %.17g %.17g"
                  " ; threshold: %.17g\n",
                  model.feature_mean[0], model.feature_mean[1], model.feature_mean[2],
                  model.feature_mean[3], model.feature_std[0], model.feature_std[1],
                  model.feature_std[2], model.feature_std[3], model.threshold);
    out << buf;
    for (double w : model.weights) {
        std::snprintf(buf, sizeof(buf), "%.17g\n", w);
        out << buf;
    }
    if (!out) throw std::runtime_error("model write failed for " + path.string());
}

BaselineModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file " + path.string());
    std::string header;
    std::getline(in, header);
    BaselineModel model;

    const auto read_after = [&header](const std::string& key) {
        const auto pos = header.find(key);
        if (pos == std::string::npos)
            throw std::runtime_error("model header missing '" + key + "'");
        return std::istringstream(header.substr(pos + key.size()));
    };
    auto means = read_after("mean:");
    for (double& v : model.feature_mean) means >> v;
    auto stds = read_after("std:");
    for (double& v : model.feature_std) stds >> v;
    auto thresh = read_after("threshold:");
    thresh >> model.threshold;
    if (!means || !stds || !thresh) throw std::runtime_error("malformed model header");

    for (double& w : model.weights) {
        if (!(in >> w)) throw std::runtime_error("model file ended before all weights");
    }
    return model;
}

}  // namespace csfall

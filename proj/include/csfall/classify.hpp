#pragma once

#include <array>
#include <filesystem>
#include <stdexcept>
#include <utility>
#include <vector>

#include "csfall/detect.hpp"

namespace csfall {

// Shape features of the foreground mask; all dimensionless or normalized, so
// decisions are invariant to uniform rescaling of the frame.
struct FeatureVector {
    double aspect_ratio = 0.0;      // bbox height / width
    double fill_ratio = 0.0;        // foreground pixels / bbox area
    double orientation_deg = 0.0;   // principal axis, degrees from vertical, [0,90]
    double centroid_height = 0.0;   // centroid row / frame height, [0,1]

    std::array<double, 4> as_array() const {
        return {aspect_ratio, fill_ratio, orientation_deg, centroid_height};
    }
};

enum class Decision { NoFall = 0, Fall = 1 };

struct Label {
    Decision decision = Decision::NoFall;
    double confidence = 0.0;  // in [0,1]
};

// Logistic decision rule on standardized features.
struct BaselineModel {
    std::array<double, 5> weights{};       // 4 features + bias
    std::array<double, 4> feature_mean{};
    std::array<double, 4> feature_std{};
    double threshold = 0.5;
};

class NoObjectError : public std::runtime_error {
public:
    NoObjectError() : std::runtime_error("empty foreground mask: nothing to classify") {}
};

// Throws NoObjectError on an empty mask; callers exclude such frames.
FeatureVector extract_features(const ForegroundMask& mask, int frame_width, int frame_height);

// Batch gradient descent, 500 epochs, learning rate 0.1, zero-initialized
// weights, features standardized by training-set mean/stddev. Deterministic
// for a fixed dataset ordering; requires both classes present.
BaselineModel train_baseline(const std::vector<std::pair<FeatureVector, Decision>>& dataset);

// confidence = logistic(w . [features, 1]); Fall iff confidence > threshold
// (strict, so a tie stays NoFall).
Label classify(const BaselineModel& model, const FeatureVector& features);

// Fraction of positions with equal decisions.
double agreement(const std::vector<Label>& labels_a, const std::vector<Label>& labels_b);

// Plain text: one header line (feature order, standardization constants,
// threshold), then one weight per line.
void save_model(const BaselineModel& model, const std::filesystem::path& path);
BaselineModel load_model(const std::filesystem::path& path);

}  // namespace csfall

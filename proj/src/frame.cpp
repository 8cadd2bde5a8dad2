#include "csfall/frame.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "csfall/rng.hpp"

namespace csfall {

namespace {

// Next header token, skipping whitespace and '#' comment lines.
bool next_header_token(std::istream& in, std::string& token) {
    token.clear();
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    if (c == EOF) return false;
    while (c != EOF && !std::isspace(c) && c != '#') {
        token.push_back(static_cast<char>(c));
        c = in.get();
    }
    if (c == '#') in.unget();  // comment starts right after the token
    return true;
}

bool parse_dim(const std::string& token, int& value) {
    if (token.empty() || token.size() > 9) return false;
    value = 0;
    for (char ch : token) {
        if (ch < '0' || ch > '9') return false;
        value = value * 10 + (ch - '0');
    }
    return value > 0;
}

}  // namespace

Frame load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PgmError(PgmErrorCode::MissingFile, "cannot open " + path.string());

    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '5')
        throw PgmError(PgmErrorCode::BadMagic, "not a binary PGM (P5): " + path.string());

    std::string tok;
    int width = 0, height = 0, maxval = 0;
    if (!next_header_token(in, tok) || !parse_dim(tok, width))
        throw PgmError(PgmErrorCode::BadHeader, "bad width in " + path.string());
    if (!next_header_token(in, tok) || !parse_dim(tok, height))
        throw PgmError(PgmErrorCode::BadHeader, "bad height in " + path.string());
    if (!next_header_token(in, tok) || !parse_dim(tok, maxval))
        throw PgmError(PgmErrorCode::BadHeader, "bad maxval in " + path.string());
    if (maxval != 255)
        throw PgmError(PgmErrorCode::BadMaxval, "maxval must be 255, got " +
                                                    std::to_string(maxval));
    // Exactly one whitespace byte separates the header from the payload; the
    // token reader already consumed it.

    Frame frame(width, height);
    std::vector<unsigned char> raw(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        throw PgmError(PgmErrorCode::Truncated, "truncated pixel payload in " + path.string());

    std::transform(raw.begin(), raw.end(), frame.pixels.begin(),
                   [](unsigned char b) { return static_cast<double>(b); });
    return frame;
}

void save_pgm(const Frame& frame, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw PgmError(PgmErrorCode::Unwritable, "cannot write " + path.string());

    out << "P5\n" << frame.width << " " << frame.height << "\n255\n";
    std::vector<unsigned char> raw(frame.pixels.size());
    std::transform(frame.pixels.begin(), frame.pixels.end(), raw.begin(), [](double v) {
        const double clamped = std::clamp(v, 0.0, 255.0);
        return static_cast<unsigned char>(std::floor(clamped + 0.5));  // half-up
    });
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw PgmError(PgmErrorCode::Unwritable, "write failed for " + path.string());
}

SignalVec vectorize(const Frame& frame) {
    SignalVec sig;
    sig.width = frame.width;
    sig.height = frame.height;
    sig.values = Eigen::Map<const Eigen::VectorXd>(frame.pixels.data(),
                                                   static_cast<Eigen::Index>(frame.pixels.size()));
    return sig;
}

Frame devectorize(const SignalVec& sig) {
    const auto expected = static_cast<Eigen::Index>(sig.width) * sig.height;
    if (sig.values.size() != expected)
        throw std::invalid_argument("signal length " + std::to_string(sig.values.size()) +
                                    " does not match dims " + std::to_string(sig.width) + "x" +
                                    std::to_string(sig.height));
    Frame frame(sig.width, sig.height);
    Eigen::Map<Eigen::VectorXd>(frame.pixels.data(), expected) = sig.values;
    return frame;
}

Frame add_gaussian_noise(const Frame& frame, double sigma, std::uint64_t seed) {
    if (sigma < 0.0) throw std::invalid_argument("noise sigma must be nonnegative");
    Frame out = frame;
    if (sigma == 0.0) return out;
    GaussianStream gauss(seed);
    for (double& p : out.pixels) p += sigma * gauss.next();
    return out;
}

std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".pgm")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace csfall

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "csfall/frame.hpp"

namespace csfall {

// M x N projection matrix with orthonormal rows, reproducible from the seed.
// Rows are drawn iid standard Gaussian (GaussianStream, row-major fill order)
// and orthonormalized by modified Gram-Schmidt in row order.
struct MeasurementMatrix {
    Eigen::MatrixXd entries;  // M x N
    std::uint64_t seed = 0;

    int rows() const { return static_cast<int>(entries.rows()); }
    int cols() const { return static_cast<int>(entries.cols()); }
    double sub_rate() const { return static_cast<double>(rows()) / cols(); }
};

// Fails if a pivot norm falls below 1e-12 (never observed for Gaussian
// draws) rather than silently reseeding.
MeasurementMatrix build_matrix(std::uint64_t seed, int m, int n);

// Measurements paired with the rows of phi that produced them, so a partial
// set after packet loss stays well-defined.
struct MeasurementSet {
    Eigen::VectorXd values;
    std::vector<std::uint32_t> row_indices;  // strictly increasing
    std::uint64_t frame_id = 0;
    std::uint64_t matrix_seed = 0;

    bool complete(int m) const { return static_cast<int>(row_indices.size()) == m; }
};

// y = phi * x. The whole per-frame encoder path is this one mat-vec; nothing
// on the encoder side factorizes or inverts a matrix.
MeasurementSet acquire(const MeasurementMatrix& phi, const SignalVec& x,
                       std::uint64_t frame_id = 0);

struct Packet {
    std::uint64_t frame_id = 0;
    std::uint32_t packet_seq = 0;
    std::uint64_t matrix_seed = 0;
    std::vector<std::uint32_t> row_indices;
    std::vector<double> values;
};

// Contiguous blocks of `payload` measurements; the last packet may be short.
std::vector<Packet> packetize(const MeasurementSet& y, int payload);

struct LossModel {
    enum class Kind { IidErasure, Explicit };
    Kind kind = Kind::IidErasure;
    double p = 0.0;                       // iid erasure probability
    std::vector<std::uint32_t> drop_set;  // packet_seqs, explicit kind
    std::uint64_t seed = 0;

    static LossModel iid(double p, std::uint64_t seed) {
        LossModel m;
        m.kind = Kind::IidErasure;
        m.p = p;
        m.seed = seed;
        return m;
    }
    static LossModel explicit_drops(std::vector<std::uint32_t> drops) {
        LossModel m;
        m.kind = Kind::Explicit;
        m.drop_set = std::move(drops);
        return m;
    }
};

// Packet-erasure channel: survivors keep order and contents bit-exactly.
std::vector<Packet> transmit(const std::vector<Packet>& packets, const LossModel& loss);

struct AssembledMeasurements {
    MeasurementSet y;
    MeasurementMatrix phi;  // row-submatrix at the surviving indices
};

// Concatenates survivors sorted by row index and slices phi to match. The
// sliced rows stay orthonormal (subset of an orthonormal set), so the
// decoder's fast inversion path remains valid.
AssembledMeasurements assemble(const std::vector<Packet>& received,
                               const MeasurementMatrix& phi);

}  // namespace csfall

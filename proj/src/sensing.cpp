#include "csfall/sensing.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "csfall/rng.hpp"

namespace csfall {

MeasurementMatrix build_matrix(std::uint64_t seed, int m, int n) {
    if (m < 1) throw std::invalid_argument("measurement matrix needs at least one row");
    if (m > n)
        throw std::invalid_argument("cannot orthonormalize " + std::to_string(m) +
                                    " rows in dimension " + std::to_string(n));

    // Gaussian fill in row-major order; the stream is part of the format.
    // MGS runs on the transpose so the row operations are unit-stride.
    Eigen::MatrixXd cols(n, m);
    GaussianStream gauss(seed);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) cols(j, i) = gauss.next();

    for (int i = 0; i < m; ++i) {
        const double norm = cols.col(i).norm();
        if (norm < 1e-12)
            throw std::runtime_error("rank deficiency while orthonormalizing row " +
                                     std::to_string(i));
        cols.col(i) /= norm;
        if (i + 1 < m) {
            auto rest = cols.rightCols(m - i - 1);
            const Eigen::VectorXd coeffs = rest.transpose() * cols.col(i);
            rest.noalias() -= cols.col(i) * coeffs.transpose();
        }
    }

    MeasurementMatrix phi;
    phi.entries = cols.transpose();
    phi.seed = seed;
    return phi;
}

MeasurementSet acquire(const MeasurementMatrix& phi, const SignalVec& x,
                       std::uint64_t frame_id) {
    if (x.values.size() != phi.cols())
        throw std::invalid_argument("signal length " + std::to_string(x.values.size()) +
                                    " does not match matrix cols " + std::to_string(phi.cols()));
    MeasurementSet y;
    y.values = phi.entries * x.values;
    y.row_indices.resize(static_cast<std::size_t>(phi.rows()));
    std::iota(y.row_indices.begin(), y.row_indices.end(), 0u);
    y.frame_id = frame_id;
    y.matrix_seed = phi.seed;
    return y;
}

std::vector<Packet> packetize(const MeasurementSet& y, int payload) {
    if (payload < 1) throw std::invalid_argument("packet payload must be at least 1");
    const auto total = y.row_indices.size();
    if (total == 0) throw std::invalid_argument("cannot packetize an empty measurement set");

    std::vector<Packet> packets;
    packets.reserve((total + payload - 1) / payload);
    for (std::size_t start = 0; start < total; start += payload) {
        const std::size_t end = std::min(total, start + static_cast<std::size_t>(payload));
        Packet pkt;
        pkt.frame_id = y.frame_id;
        pkt.packet_seq = static_cast<std::uint32_t>(packets.size());
        pkt.matrix_seed = y.matrix_seed;
        pkt.row_indices.assign(y.row_indices.begin() + start, y.row_indices.begin() + end);
        pkt.values.assign(y.values.data() + start, y.values.data() + end);
        packets.push_back(std::move(pkt));
    }
    return packets;
}

std::vector<Packet> transmit(const std::vector<Packet>& packets, const LossModel& loss) {
    std::vector<Packet> survivors;
    if (loss.kind == LossModel::Kind::IidErasure) {
        if (loss.p < 0.0 || loss.p > 1.0)
            throw std::invalid_argument("erasure probability must lie in [0,1]");
        std::mt19937_64 engine(loss.seed);
        for (const Packet& pkt : packets) {
            if (uniform01(engine) >= loss.p) survivors.push_back(pkt);
        }
    } else {
        for (const Packet& pkt : packets) {
            const bool dropped = std::find(loss.drop_set.begin(), loss.drop_set.end(),
                                           pkt.packet_seq) != loss.drop_set.end();
            if (!dropped) survivors.push_back(pkt);
        }
    }
    return survivors;
}

AssembledMeasurements assemble(const std::vector<Packet>& received,
                               const MeasurementMatrix& phi) {
    if (received.empty())
        throw std::invalid_argument("no surviving measurements to assemble");
    const std::uint64_t frame_id = received.front().frame_id;
    std::size_t total = 0;
    for (const Packet& pkt : received) {
        if (pkt.frame_id != frame_id)
            throw std::invalid_argument("mixed frame_ids in assemble");
        if (pkt.matrix_seed != phi.seed)
            throw std::invalid_argument("packet matrix seed does not match phi");
        if (pkt.row_indices.size() != pkt.values.size())
            throw std::invalid_argument("malformed packet: index/value length mismatch");
        total += pkt.row_indices.size();
    }

    std::vector<std::pair<std::uint32_t, double>> entries;
    entries.reserve(total);
    for (const Packet& pkt : received)
        for (std::size_t i = 0; i < pkt.row_indices.size(); ++i)
            entries.emplace_back(pkt.row_indices[i], pkt.values[i]);
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    AssembledMeasurements out;
    out.y.frame_id = frame_id;
    out.y.matrix_seed = phi.seed;
    out.y.values.resize(static_cast<Eigen::Index>(entries.size()));
    out.y.row_indices.resize(entries.size());
    out.phi.seed = phi.seed;
    out.phi.entries.resize(static_cast<Eigen::Index>(entries.size()), phi.cols());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto [index, value] = entries[i];
        if (index >= static_cast<std::uint32_t>(phi.rows()))
            throw std::invalid_argument("row index " + std::to_string(index) +
                                        " out of range for phi");
        if (i > 0 && index == entries[i - 1].first)
            throw std::invalid_argument("duplicate row index " + std::to_string(index));
        out.y.row_indices[i] = index;
        out.y.values[static_cast<Eigen::Index>(i)] = value;
        out.phi.entries.row(static_cast<Eigen::Index>(i)) = phi.entries.row(index);
    }
    return out;
}

}  // namespace csfall

#include "csfall/packet_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace csfall {

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char bytes[4];
    for (int i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

bool get_u32(std::istream& in, std::uint32_t& v) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    if (in.gcount() != 4) return false;
    v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
    return true;
}

bool get_u64(std::istream& in, std::uint64_t& v) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    if (in.gcount() != 8) return false;
    v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return true;
}

bool get_f64(std::istream& in, double& v) {
    std::uint64_t bits = 0;
    if (!get_u64(in, bits)) return false;
    v = std::bit_cast<double>(bits);
    return true;
}

[[noreturn]] void truncated() { throw std::runtime_error("truncated packet record"); }

}  // namespace

void write_packet(std::ostream& out, const Packet& packet) {
    if (packet.row_indices.size() != packet.values.size())
        throw std::invalid_argument("malformed packet: index/value length mismatch");
    put_u64(out, packet.frame_id);
    put_u32(out, packet.packet_seq);
    put_u64(out, packet.matrix_seed);
    put_u32(out, static_cast<std::uint32_t>(packet.row_indices.size()));
    for (std::size_t i = 0; i < packet.row_indices.size(); ++i) {
        put_u32(out, packet.row_indices[i]);
        put_f64(out, packet.values[i]);
    }
}

void write_packets(std::ostream& out, const std::vector<Packet>& packets) {
    for (const Packet& pkt : packets) write_packet(out, pkt);
    if (!out) throw std::runtime_error("packet stream write failed");
}

std::vector<Packet> read_packets(std::istream& in) {
    std::vector<Packet> packets;
    for (;;) {
        Packet pkt;
        if (!get_u64(in, pkt.frame_id)) {
            if (in.gcount() == 0) break;  // clean EOF at a record boundary
            truncated();
        }
        std::uint32_t count = 0;
        if (!get_u32(in, pkt.packet_seq) || !get_u64(in, pkt.matrix_seed) || !get_u32(in, count))
            truncated();
        pkt.row_indices.resize(count);
        pkt.values.resize(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            if (!get_u32(in, pkt.row_indices[i]) || !get_f64(in, pkt.values[i])) truncated();
        }
        packets.push_back(std::move(pkt));
    }
    return packets;
}

void write_packet_file(const std::filesystem::path& path, const std::vector<Packet>& packets) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_packets(out, packets);
}

std::vector<Packet> read_packet_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return read_packets(in);
}

}  // namespace csfall

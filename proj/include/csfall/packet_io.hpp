#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "csfall/sensing.hpp"

namespace csfall {

// Little-endian record framing, one packet per record:
//   frame_id u64, packet_seq u32, matrix_seed u64, count u32,
//   then count x (row_index u32, value f64).
// A stream is a concatenation of records.

void write_packet(std::ostream& out, const Packet& packet);
void write_packets(std::ostream& out, const std::vector<Packet>& packets);

// Reads records until EOF; throws on a truncated record.
std::vector<Packet> read_packets(std::istream& in);

void write_packet_file(const std::filesystem::path& path, const std::vector<Packet>& packets);
std::vector<Packet> read_packet_file(const std::filesystem::path& path);

}  // namespace csfall

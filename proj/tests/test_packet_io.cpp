#include <doctest.h>

#include <sstream>

#include "csfall/packet_io.hpp"
#include "csfall/rng.hpp"

using namespace csfall;

TEST_CASE("packet record bytes are frozen little-endian framing") {
    Packet pkt;
    pkt.frame_id = 1;
    pkt.packet_seq = 2;
    pkt.matrix_seed = 3;
    pkt.row_indices = {4};
    pkt.values = {1.5};

    std::ostringstream out(std::ios::binary);
    write_packet(out, pkt);
    const std::string bytes = out.str();

    const unsigned char expected[] = {
        1, 0, 0, 0, 0, 0, 0, 0,              // frame_id u64
        2, 0, 0, 0,                          // packet_seq u32
        3, 0, 0, 0, 0, 0, 0, 0,              // matrix_seed u64
        1, 0, 0, 0,                          // count u32
        4, 0, 0, 0,                          // row_index u32
        0, 0, 0, 0, 0, 0, 0xF8, 0x3F,        // 1.5 as f64
    };
    REQUIRE(bytes.size() == sizeof(expected));
    for (std::size_t i = 0; i < sizeof(expected); ++i)
        CHECK(static_cast<unsigned char>(bytes[i]) == expected[i]);
}

TEST_CASE("packet streams roundtrip") {
    std::mt19937_64 engine(314);
    std::vector<Packet> packets;
    for (int i = 0; i < 20; ++i) {
        Packet pkt;
        pkt.frame_id = engine() % 5;
        pkt.packet_seq = static_cast<std::uint32_t>(i);
        pkt.matrix_seed = engine();
        const int count = static_cast<int>(engine() % 7);  // zero-length payloads legal
        for (int j = 0; j < count; ++j) {
            pkt.row_indices.push_back(static_cast<std::uint32_t>(engine() % 1000));
            pkt.values.push_back((uniform01(engine) - 0.5) * 1e6);
        }
        packets.push_back(std::move(pkt));
    }

    std::stringstream stream(std::ios::in | std::ios::out | std::ios::binary);
    write_packets(stream, packets);
    const auto back = read_packets(stream);
    REQUIRE(back.size() == packets.size());
    for (std::size_t i = 0; i < packets.size(); ++i) {
        CHECK(back[i].frame_id == packets[i].frame_id);
        CHECK(back[i].packet_seq == packets[i].packet_seq);
        CHECK(back[i].matrix_seed == packets[i].matrix_seed);
        CHECK(back[i].row_indices == packets[i].row_indices);
        CHECK(back[i].values == packets[i].values);
    }
}

TEST_CASE("truncated records are rejected") {
    Packet pkt;
    pkt.frame_id = 7;
    pkt.packet_seq = 0;
    pkt.matrix_seed = 9;
    pkt.row_indices = {1, 2};
    pkt.values = {0.5, -0.5};

    std::ostringstream out(std::ios::binary);
    write_packet(out, pkt);
    const std::string bytes = out.str();

    for (const std::size_t cut : {bytes.size() - 1, bytes.size() - 9, std::size_t{5}}) {
        std::istringstream in(bytes.substr(0, cut), std::ios::binary);
        CHECK_THROWS_AS(read_packets(in), std::runtime_error);
    }
}

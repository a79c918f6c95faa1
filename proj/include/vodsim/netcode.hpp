#pragma once

// Cooperative peer repair with unstructured random linear network coding.
//
// A GOP is a DAG of frames; frame i is split into B_i native packets of
// exactly W bits. Coded packets carry their coefficient vector over all
// native positions of the GOP, so a receiver can reduce every arrival
// against its echelon matrix and recover natives once they span.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "vodsim/error.hpp"
#include "vodsim/gf256.hpp"
#include "vodsim/graph.hpp"
#include "vodsim/rng.hpp"

namespace vodsim {

using Bytes = std::vector<std::uint8_t>;
using StreamId = std::uint32_t;
using GopId = std::uint32_t;

struct Frame {
    std::uint32_t packet_count = 1;
    double distortion_reduction = 0.0;
    /// Index of the frame used for motion compensation; empty for the I-frame.
    std::optional<std::size_t> reference;

    friend bool operator==(const Frame&, const Frame&) = default;
};

struct Gop {
    std::vector<Frame> frames;
    std::uint32_t packet_width_bits = 0;
    double repair_epoch_seconds = 0.0;

    /// Throws InvalidGop unless frame 0 is the only unreferenced frame, all
    /// references point backwards, every B_i >= 1 and W > 0.
    void validate() const {
        auto bad = [](const std::string& why) { return Error(ErrorCode::InvalidGop, why); };
        if (frames.empty()) throw bad("GOP has no frames");
        if (packet_width_bits == 0) throw bad("packet width must be positive");
        for (std::size_t i = 0; i < frames.size(); ++i) {
            const Frame& f = frames[i];
            if (f.packet_count == 0) throw bad("frame " + std::to_string(i) + " has no packets");
            if (f.distortion_reduction < 0.0) throw bad("negative distortion reduction");
            if (i == 0 && f.reference) throw bad("the I-frame cannot reference another frame");
            if (i > 0 && (!f.reference || *f.reference >= i)) {
                throw bad("frame " + std::to_string(i) + " must reference an earlier frame");
            }
        }
        if (total_packets() > 0xFFFF) throw bad("more than 65535 packets in one GOP");
    }

    /// |P*| = sum of B_i.
    std::size_t total_packets() const {
        std::size_t n = 0;
        for (const auto& f : frames) n += f.packet_count;
        return n;
    }

    std::size_t payload_bytes() const { return (packet_width_bits + 7) / 8; }

    /// Position of packet 0 of frame i within P*.
    std::size_t first_position(std::size_t frame) const {
        std::size_t pos = 0;
        for (std::size_t i = 0; i < frame; ++i) pos += frames[i].packet_count;
        return pos;
    }

    std::size_t position(std::size_t frame, std::size_t packet) const { return first_position(frame) + packet; }
};

struct NativePacket {
    std::size_t frame = 0;
    std::size_t index = 0;
    Bytes payload;
};

/// Raw encoded frame; bit_length counts meaningful bits from the MSB of
/// bytes[0].
struct FrameBlob {
    Bytes bytes;
    std::size_t bit_length = 0;
};

namespace detail {

inline bool get_bit(const Bytes& b, std::size_t i) { return (b[i / 8] >> (7 - i % 8)) & 1U; }
inline void set_bit(Bytes& b, std::size_t i) { b[i / 8] |= static_cast<std::uint8_t>(0x80U >> (i % 8)); }

}  // namespace detail

/// Splits each frame into exactly B_i packets of W bits, zero-padding the
/// tail of the last packet. Output is in P* position order.
inline std::vector<NativePacket> packetize(const Gop& gop, const std::vector<FrameBlob>& blobs) {
    gop.validate();
    if (blobs.size() != gop.frames.size()) {
        throw Error(ErrorCode::SizeMismatch, "expected " + std::to_string(gop.frames.size()) + " frame blobs");
    }
    const std::size_t w = gop.packet_width_bits;
    std::vector<NativePacket> out;
    out.reserve(gop.total_packets());
    for (std::size_t i = 0; i < blobs.size(); ++i) {
        const auto& blob = blobs[i];
        const std::size_t count = gop.frames[i].packet_count;
        if (blob.bit_length > blob.bytes.size() * 8 || blob.bit_length <= (count - 1) * w ||
            blob.bit_length > count * w) {
            throw Error(ErrorCode::SizeMismatch, "frame " + std::to_string(i) + " has " +
                                                     std::to_string(blob.bit_length) + " bits, not consistent with " +
                                                     std::to_string(count) + " packets of " + std::to_string(w));
        }
        for (std::size_t j = 0; j < count; ++j) {
            NativePacket p{i, j, Bytes(gop.payload_bytes(), 0)};
            const std::size_t begin = j * w;
            const std::size_t end = std::min(blob.bit_length, begin + w);
            for (std::size_t bit = begin; bit < end; ++bit) {
                if (detail::get_bit(blob.bytes, bit)) detail::set_bit(p.payload, bit - begin);
            }
            out.push_back(std::move(p));
        }
    }
    return out;
}

struct NcPacket {
    StreamId stream = 0;
    GopId gop = 0;
    /// Native coefficients c_{i,j}, one per P* position.
    Bytes coefficients;
    Bytes payload;

    friend bool operator==(const NcPacket&, const NcPacket&) = default;
};

/// stream (1 byte) | GOP id (2) | |P*| (2) | coefficients | payload.
/// Counters are big-endian.
inline Bytes encode_nc_packet(const NcPacket& pkt) {
    if (pkt.stream > 0xFF || pkt.gop > 0xFFFF || pkt.coefficients.size() > 0xFFFF) {
        throw Error(ErrorCode::MalformedPacket, "field does not fit its wire width");
    }
    Bytes out;
    out.reserve(5 + pkt.coefficients.size() + pkt.payload.size());
    out.push_back(static_cast<std::uint8_t>(pkt.stream));
    out.push_back(static_cast<std::uint8_t>(pkt.gop >> 8));
    out.push_back(static_cast<std::uint8_t>(pkt.gop));
    out.push_back(static_cast<std::uint8_t>(pkt.coefficients.size() >> 8));
    out.push_back(static_cast<std::uint8_t>(pkt.coefficients.size()));
    out.insert(out.end(), pkt.coefficients.begin(), pkt.coefficients.end());
    out.insert(out.end(), pkt.payload.begin(), pkt.payload.end());
    return out;
}

inline NcPacket decode_nc_packet(std::span<const std::uint8_t> bytes, std::uint32_t width_bits) {
    if (bytes.size() < 5) throw Error(ErrorCode::MalformedPacket, "short header");
    NcPacket pkt;
    pkt.stream = bytes[0];
    pkt.gop = static_cast<GopId>(bytes[1] << 8 | bytes[2]);
    const std::size_t k = static_cast<std::size_t>(bytes[3] << 8 | bytes[4]);
    const std::size_t payload = (width_bits + 7) / 8;
    if (bytes.size() != 5 + k + payload) {
        throw Error(ErrorCode::WidthMismatch, "packet length " + std::to_string(bytes.size()) +
                                                  " does not match |P*|=" + std::to_string(k) +
                                                  " and W=" + std::to_string(width_bits));
    }
    pkt.coefficients.assign(bytes.begin() + 5, bytes.begin() + 5 + static_cast<std::ptrdiff_t>(k));
    pkt.payload.assign(bytes.begin() + 5 + static_cast<std::ptrdiff_t>(k), bytes.end());
    return pkt;
}

/// Incremental Gauss-Jordan decoder over GF(2^8). Rows stay in reduced row
/// echelon form, so native position p is recovered exactly when some row
/// equals the unit vector e_p.
class RlncDecoder {
public:
    RlncDecoder(std::size_t total_packets, std::size_t payload_bytes)
        : total_(total_packets), payload_bytes_(payload_bytes), pivot_row_(total_packets, kNone) {}

    std::size_t total_packets() const { return total_; }
    std::size_t payload_bytes() const { return payload_bytes_; }
    std::size_t rank() const { return rows_.size(); }
    bool full_rank() const { return rows_.size() == total_; }

    /// Returns true iff the row was innovative (rank increased).
    bool add(std::span<const std::uint8_t> coefficients, std::span<const std::uint8_t> payload) {
        if (coefficients.size() != total_ || payload.size() != payload_bytes_) {
            throw Error(ErrorCode::WidthMismatch, "row shape " + std::to_string(coefficients.size()) + "x" +
                                                      std::to_string(payload.size()) + " vs decoder " +
                                                      std::to_string(total_) + "x" + std::to_string(payload_bytes_));
        }
        Row row{0, Bytes(coefficients.begin(), coefficients.end()), Bytes(payload.begin(), payload.end())};
        for (const Row& r : rows_) {
            const auto c = row.coefficients[r.pivot];
            if (c != 0) eliminate(row, r, c);
        }
        auto lead = std::find_if(row.coefficients.begin(), row.coefficients.end(), [](auto c) { return c != 0; });
        if (lead == row.coefficients.end()) return false;

        row.pivot = static_cast<std::size_t>(lead - row.coefficients.begin());
        const auto norm = gf256::inv(*lead);
        gf256::scale(row.coefficients, norm);
        gf256::scale(row.payload, norm);
        for (Row& r : rows_) {
            const auto c = r.coefficients[row.pivot];
            if (c != 0) eliminate(r, row, c);
        }
        pivot_row_[row.pivot] = rows_.size();
        rows_.push_back(std::move(row));
        return true;
    }

    bool is_recovered(std::size_t position) const {
        const std::size_t idx = pivot_row_.at(position);
        if (idx == kNone) return false;
        const auto& c = rows_[idx].coefficients;
        for (std::size_t k = 0; k < total_; ++k) {
            if (k != position && c[k] != 0) return false;
        }
        return true;
    }

    std::set<std::size_t> recovered_positions() const {
        std::set<std::size_t> out;
        for (std::size_t p = 0; p < total_; ++p) {
            if (is_recovered(p)) out.insert(p);
        }
        return out;
    }

    /// Payload of a recovered native position; nullopt otherwise.
    std::optional<Bytes> native_payload(std::size_t position) const {
        if (!is_recovered(position)) return std::nullopt;
        return rows_[pivot_row_[position]].payload;
    }

private:
    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

    struct Row {
        std::size_t pivot;
        Bytes coefficients;
        Bytes payload;
    };

    static void eliminate(Row& target, const Row& by, std::uint8_t factor) {
        gf256::axpy(target.coefficients, by.coefficients, factor);
        gf256::axpy(target.payload, by.payload, factor);
    }

    std::size_t total_;
    std::size_t payload_bytes_;
    std::vector<Row> rows_;
    std::vector<std::size_t> pivot_row_;
};

struct GopKey {
    StreamId stream = 0;
    GopId gop = 0;

    friend auto operator<=>(const GopKey&, const GopKey&) = default;
};

/// Everything one peer holds for one GOP of one stream.
struct GopBuffer {
    GopBuffer(std::size_t total_packets, std::uint32_t width_bits)
        : width_bits(width_bits), decoder(total_packets, (width_bits + 7) / 8) {}

    std::uint32_t width_bits;
    /// G_n: natives received from the media source, by P* position.
    std::map<std::size_t, Bytes> natives;
    /// Q_n: coded packets received through repair. Only innovative arrivals
    /// are kept; the rest lie in the span already.
    std::vector<NcPacket> coded;
    RlncDecoder decoder;

    bool holds_any() const { return !natives.empty() || !coded.empty(); }
    std::size_t total_packets() const { return decoder.total_packets(); }
};

struct ReceiveResult {
    bool innovative = false;
    std::size_t rank = 0;
};

class PeerState {
public:
    PeerState(NodeId id, StreamId watched) : id_(id), watched_(watched) {}

    NodeId id() const { return id_; }
    /// S(n).
    StreamId watched() const { return watched_; }

    void track(StreamId stream, GopId gop, std::size_t total_packets, std::uint32_t width_bits) {
        buffers_.try_emplace(GopKey{stream, gop}, total_packets, width_bits);
    }

    bool tracks(StreamId stream, GopId gop) const { return buffers_.contains(GopKey{stream, gop}); }

    void drop(StreamId stream, GopId gop) { buffers_.erase(GopKey{stream, gop}); }

    const GopBuffer& buffer(StreamId stream, GopId gop) const {
        auto it = buffers_.find(GopKey{stream, gop});
        if (it == buffers_.end()) throw unknown(stream, gop);
        return it->second;
    }

    GopBuffer& buffer(StreamId stream, GopId gop) {
        auto it = buffers_.find(GopKey{stream, gop});
        if (it == buffers_.end()) throw unknown(stream, gop);
        return it->second;
    }

    /// A native packet of the watched stream delivered by the media source.
    ReceiveResult receive_native(GopId gop, std::size_t position, const Bytes& payload) {
        GopBuffer& buf = buffer(watched_, gop);
        Bytes unit(buf.total_packets(), 0);
        unit.at(position) = 1;
        const bool innovative = buf.decoder.add(unit, payload);
        if (innovative) buf.natives.emplace(position, payload);
        return {innovative, buf.decoder.rank()};
    }

    ReceiveResult receive_nc(const NcPacket& pkt) {
        GopBuffer& buf = buffer(pkt.stream, pkt.gop);
        const bool innovative = buf.decoder.add(pkt.coefficients, pkt.payload);
        if (innovative) buf.coded.push_back(pkt);
        return {innovative, buf.decoder.rank()};
    }

    /// A_n restricted to the GOP under repair for each stream: streams of
    /// which this peer holds at least one packet.
    std::vector<StreamId> repairable_streams(const std::map<StreamId, GopId>& under_repair) const {
        std::vector<StreamId> out;
        for (auto [stream, gop] : under_repair) {
            auto it = buffers_.find(GopKey{stream, gop});
            if (it != buffers_.end() && it->second.holds_any()) out.push_back(stream);
        }
        return out;
    }

private:
    static Error unknown(StreamId stream, GopId gop) {
        return Error(ErrorCode::UnknownGop,
                     "stream " + std::to_string(stream) + " GOP " + std::to_string(gop) + " is not tracked");
    }

    NodeId id_;
    StreamId watched_;
    std::map<GopKey, GopBuffer> buffers_;
};

/// Combines natives and coded packets with explicit coefficients:
/// q = sum a_p p + sum b_m q_m, with the native coefficient vector expanded.
/// native_coefs follows G_n in ascending position order; coded_coefs follows
/// the order of buffer.coded. Either list may be shorter than its source,
/// in which case the tail is skipped.
inline NcPacket combine(const GopBuffer& buffer, StreamId stream, GopId gop, std::span<const std::uint8_t> native_coefs,
                        std::span<const std::uint8_t> coded_coefs) {
    NcPacket out{stream, gop, Bytes(buffer.total_packets(), 0), Bytes((buffer.width_bits + 7) / 8, 0)};
    std::size_t k = 0;
    for (const auto& [position, payload] : buffer.natives) {
        if (k >= native_coefs.size()) break;
        const auto a = native_coefs[k++];
        out.coefficients[position] ^= a;
        gf256::axpy(out.payload, payload, a);
    }
    for (std::size_t m = 0; m < buffer.coded.size() && m < coded_coefs.size(); ++m) {
        gf256::axpy(out.coefficients, buffer.coded[m].coefficients, coded_coefs[m]);
        gf256::axpy(out.payload, buffer.coded[m].payload, coded_coefs[m]);
    }
    return out;
}

namespace detail {

inline NcPacket draw_combination(const GopBuffer& buffer, StreamId stream, GopId gop, bool with_natives, Rng& rng) {
    const std::size_t natives = with_natives ? buffer.natives.size() : 0;
    for (int attempt = 0; attempt < 2; ++attempt) {
        Bytes a(natives), b(buffer.coded.size());
        for (auto& x : a) x = rng.byte();
        for (auto& x : b) x = rng.byte();
        NcPacket pkt = combine(buffer, stream, gop, a, b);
        if (std::any_of(pkt.coefficients.begin(), pkt.coefficients.end(), [](auto c) { return c != 0; })) {
            return pkt;
        }
    }
    throw Error(ErrorCode::NothingToEncode, "coefficient draw was all-zero twice");
}

}  // namespace detail

/// Coded packet for the peer's own stream: natives and coded packets mixed.
inline NcPacket encode_watching(const PeerState& peer, GopId gop, Rng& rng) {
    const GopBuffer& buf = peer.buffer(peer.watched(), gop);
    if (!buf.holds_any()) throw Error(ErrorCode::NothingToEncode, "peer holds no packets of its stream");
    return detail::draw_combination(buf, peer.watched(), gop, true, rng);
}

/// Coded packet for a stream the peer only relays: coded packets only.
inline NcPacket encode_relay(const PeerState& peer, StreamId stream, GopId gop, Rng& rng) {
    if (stream == peer.watched()) {
        throw Error(ErrorCode::InvalidConfig, "encode_relay called for the peer's own stream");
    }
    if (!peer.tracks(stream, gop) || peer.buffer(stream, gop).coded.empty()) {
        throw Error(ErrorCode::StreamNotHeld, "no coded packets of stream " + std::to_string(stream));
    }
    return detail::draw_combination(peer.buffer(stream, gop), stream, gop, false, rng);
}

struct DecodeReport {
    std::set<std::size_t> decoded;
    std::set<std::size_t> decodable_frames;
    double distortion_reduction_total = 0.0;

    double decode_ratio(std::size_t total_packets) const {
        return total_packets == 0 ? 1.0 : static_cast<double>(decoded.size()) / static_cast<double>(total_packets);
    }
};

/// Frame i is decodable iff all of its packets are recovered and (for
/// P-frames) its reference frame is decodable.
inline DecodeReport decode_gop(const RlncDecoder& decoder, const Gop& gop) {
    if (decoder.total_packets() != gop.total_packets()) {
        throw Error(ErrorCode::SizeMismatch, "decoder spans " + std::to_string(decoder.total_packets()) +
                                                 " packets, GOP has " + std::to_string(gop.total_packets()));
    }
    DecodeReport report;
    report.decoded = decoder.recovered_positions();
    std::vector<bool> ok(gop.frames.size(), false);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < gop.frames.size(); ++i) {
        const Frame& f = gop.frames[i];
        bool received = true;
        for (std::size_t j = 0; j < f.packet_count; ++j) received = received && report.decoded.contains(pos + j);
        pos += f.packet_count;
        ok[i] = received && (!f.reference || ok[*f.reference]);
        if (ok[i]) {
            report.decodable_frames.insert(i);
            report.distortion_reduction_total += f.distortion_reduction;
        }
    }
    return report;
}

inline DecodeReport decode_gop(const PeerState& peer, StreamId stream, GopId gop_id, const Gop& gop) {
    return decode_gop(peer.buffer(stream, gop_id).decoder, gop);
}

}  // namespace vodsim

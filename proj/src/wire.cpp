#include "muckle/wire.hpp"

#include "muckle/errors.hpp"

namespace muckle {

namespace {

std::size_t expected_fields(MessageType t) {
    switch (t) {
        case MessageType::m1: return 4;
        case MessageType::m2: return 3;
        default: return 1;
    }
}

void put_be(Bytes& out, std::uint64_t v, std::size_t width) {
    for (std::size_t i = width; i-- > 0;) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_be(ByteView in, std::size_t pos, std::size_t width) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < width; ++i) v = (v << 8) | in[pos + i];
    return v;
}

}  // namespace

std::size_t fields_size(const std::vector<std::size_t>& field_lens) {
    std::size_t n = 0;
    for (auto l : field_lens) n += kFieldLenBytes + l;
    return n;
}

Bytes encode_fields(const std::vector<Bytes>& fields) {
    Bytes out;
    for (const auto& f : fields) {
        if (f.size() > kMaxFieldLen) throw EncodingError("field of " + std::to_string(f.size()) + " bytes is too long");
        put_be(out, f.size(), kFieldLenBytes);
        append(out, f);
    }
    return out;
}

std::vector<Bytes> decode_fields(ByteView data) {
    std::vector<Bytes> fields;
    std::size_t pos = 0;
    while (pos < data.size()) {
        if (data.size() - pos < kFieldLenBytes) throw EncodingError("truncated field length");
        auto len = static_cast<std::size_t>(get_be(data, pos, kFieldLenBytes));
        pos += kFieldLenBytes;
        if (data.size() - pos < len) throw EncodingError("field length exceeds remaining bytes");
        fields.emplace_back(data.begin() + static_cast<std::ptrdiff_t>(pos),
                            data.begin() + static_cast<std::ptrdiff_t>(pos + len));
        pos += len;
    }
    return fields;
}

MessageType peek_type(ByteView wire) {
    if (wire.empty()) throw EncodingError("empty message");
    if (wire[0] < 1 || wire[0] > 8) throw EncodingError("unknown message type " + std::to_string(wire[0]));
    return static_cast<MessageType>(wire[0]);
}

Bytes encode_message(const HandshakeMessage& m) {
    if (m.fields.size() != expected_fields(m.type))
        throw EncodingError("m" + std::to_string(message_index(m.type)) + " needs " +
                            std::to_string(expected_fields(m.type)) + " fields");
    Bytes body;
    if (is_record(m.type)) put_be(body, m.sequence, kSequenceLen);
    append(body, encode_fields(m.fields));
    if (body.size() > kMaxBodyLen) throw EncodingError("message body too long");

    Bytes out;
    out.reserve(kHeaderLen + body.size());
    out.push_back(static_cast<std::uint8_t>(m.type));
    put_be(out, body.size(), 3);
    append(out, body);
    return out;
}

HandshakeMessage decode_message(ByteView wire) {
    HandshakeMessage m;
    m.type = peek_type(wire);
    if (wire.size() < kHeaderLen) throw EncodingError("truncated header");
    auto body_len = static_cast<std::size_t>(get_be(wire, 1, 3));
    if (wire.size() - kHeaderLen != body_len)
        throw EncodingError(wire.size() - kHeaderLen < body_len ? "truncated body" : "trailing bytes after body");
    auto body = wire.subspan(kHeaderLen);
    if (is_record(m.type)) {
        if (body.size() < kSequenceLen) throw EncodingError("truncated record sequence number");
        m.sequence = get_be(body, 0, kSequenceLen);
        body = body.subspan(kSequenceLen);
    }
    m.fields = decode_fields(body);
    if (m.fields.size() != expected_fields(m.type))
        throw EncodingError("m" + std::to_string(message_index(m.type)) + " has " + std::to_string(m.fields.size()) +
                            " fields, expected " + std::to_string(expected_fields(m.type)));
    return m;
}

}  // namespace muckle

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "muckle/bytes.hpp"

namespace muckle {

/// Wire layout (big-endian):
///   message = msg_type(1) || body_len(3) || body
///   field   = field_len(2) || field_bytes
///   m1 body = [pk_c, pk_pq, n_I, qkd_key_id]
///   m2 body = [ct_c, ct_pq, n_R]
///   m3..m8  = seq(8, unframed) || [aead_ciphertext]
enum class MessageType : std::uint8_t { m1 = 1, m2, m3, m4, m5, m6, m7, m8 };

inline constexpr std::size_t kHeaderLen = 4;
inline constexpr std::size_t kFieldLenBytes = 2;
inline constexpr std::size_t kSequenceLen = 8;
inline constexpr std::size_t kMaxFieldLen = 0xffff;
inline constexpr std::size_t kMaxBodyLen = 0xffffff;

inline int message_index(MessageType t) { return static_cast<int>(t); }
inline bool is_record(MessageType t) { return message_index(t) >= 3; }

struct HandshakeMessage {
    MessageType type = MessageType::m1;
    /// Only meaningful for m3..m8.
    std::uint64_t sequence = 0;
    /// m1: 4 fields, m2: 3 fields, m3..m8: exactly the AEAD ciphertext.
    std::vector<Bytes> fields;

    bool operator==(const HandshakeMessage&) const = default;
};

/// Throws EncodingError if a field or the body exceeds its length prefix.
Bytes encode_message(const HandshakeMessage& m);

/// Strict decoder: unknown type, wrong field count, short reads and trailing
/// bytes all throw EncodingError.
HandshakeMessage decode_message(ByteView wire);

/// Reads only the type byte; throws EncodingError for unknown types.
MessageType peek_type(ByteView wire);

/// Length-prefixed field list, also used for certificates and record payloads.
Bytes encode_fields(const std::vector<Bytes>& fields);
/// Consumes the whole input; throws EncodingError otherwise.
std::vector<Bytes> decode_fields(ByteView data);

/// Exact encoded size of a field list with the given field lengths.
std::size_t fields_size(const std::vector<std::size_t>& field_lens);

}  // namespace muckle

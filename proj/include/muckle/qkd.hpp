#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "muckle/bytes.hpp"
#include "muckle/random.hpp"

namespace httplib {
class Server;
}

namespace muckle {

inline constexpr std::size_t kQkdKeyLen = 32;
inline constexpr std::size_t kQkdKeyIdLen = 16;

enum class QkdErrc { unavailable, not_found, already_consumed, unauthorized };

std::string_view to_string(QkdErrc code);

class QkdError : public std::runtime_error {
public:
    QkdError(QkdErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    QkdErrc code() const { return code_; }

private:
    QkdErrc code_;
};

struct QkdKey {
    Bytes key_id;  // 16 bytes
    Bytes key;     // 32 bytes
};

struct QkdKeyRecord {
    Bytes key_id;
    Bytes key;
    std::pair<std::string, std::string> owner_pair;  // (encryptor, decryptor)
    std::set<std::string> consumed_by;
    std::chrono::system_clock::time_point created_at;
};

struct CorruptionEvent {
    Bytes key_id;
    std::pair<std::string, std::string> owner_pair;
};

/// GetKey as seen by one party. get_key hands out a fresh key plus its id;
/// the partner retrieves the same key with get_key_by_id. Failures throw
/// QkdError.
class QkdClient {
public:
    virtual ~QkdClient() = default;
    virtual const std::string& self_id() const = 0;
    virtual QkdKey get_key(const std::string& partner) = 0;
    virtual Bytes get_key_by_id(const std::string& partner, ByteView key_id) = 0;
};

/// Simulated key-management service. Links are unordered party pairs; keys
/// come from a seeded generator rather than QKD hardware. All methods are
/// thread-safe and each key is delivered at most once per side.
class KeyManagementService {
public:
    struct Options {
        std::uint64_t seed = 0;
        /// Keys each link may issue; unlimited when unset.
        std::optional<std::size_t> pool_size;
        /// Emulated key rate; 0 means unlimited. get_key blocks to honour it.
        double keys_per_second = 0.0;
    };

    KeyManagementService() : KeyManagementService(Options{}) {}
    explicit KeyManagementService(Options options);

    void add_link(const std::string& a, const std::string& b);
    bool has_link(const std::string& a, const std::string& b) const;

    QkdKey get_key(const std::string& requester, const std::string& partner);
    Bytes get_key_by_id(const std::string& requester, const std::string& partner, ByteView key_id);

    /// Leaks a key without marking it consumed; the event is logged.
    Bytes corrupt_key(ByteView key_id);

    std::vector<CorruptionEvent> corruption_log() const;
    std::optional<QkdKeyRecord> record(ByteView key_id) const;
    std::size_t issued(const std::string& a, const std::string& b) const;

private:
    using Link = std::pair<std::string, std::string>;
    static Link link_of(const std::string& a, const std::string& b);
    void wait_for_rate_slot();

    Options options_;
    mutable std::mutex mutex_;
    DeterministicRandom rng_;
    std::map<Link, std::size_t> links_;  // link -> keys issued
    std::map<Bytes, QkdKeyRecord> records_;
    std::vector<CorruptionEvent> corruptions_;
    std::chrono::steady_clock::time_point next_slot_{};
};

class InProcessQkdClient final : public QkdClient {
public:
    InProcessQkdClient(std::shared_ptr<KeyManagementService> kms, std::string self_id)
        : kms_(std::move(kms)), self_(std::move(self_id)) {}

    const std::string& self_id() const override { return self_; }
    QkdKey get_key(const std::string& partner) override { return kms_->get_key(self_, partner); }
    Bytes get_key_by_id(const std::string& partner, ByteView key_id) override {
        return kms_->get_key_by_id(self_, partner, key_id);
    }

private:
    std::shared_ptr<KeyManagementService> kms_;
    std::string self_;
};

/// Client for the HTTP/JSON key-delivery service. The requester identity is
/// sent in the X-SAE-ID header.
class HttpQkdClient final : public QkdClient {
public:
    /// endpoint: "http://host:port".
    HttpQkdClient(std::string endpoint, std::string self_id);

    const std::string& self_id() const override { return self_; }
    QkdKey get_key(const std::string& partner) override;
    Bytes get_key_by_id(const std::string& partner, ByteView key_id) override;

private:
    std::string endpoint_;
    std::string self_;
};

/// Serves a KeyManagementService over HTTP with ETSI GS QKD 014 style
/// endpoints:
///   GET /api/v1/keys/{partner}/enc_keys              -> {"keys":[{"key_ID":..,"key":..}]}
///   GET /api/v1/keys/{partner}/dec_keys?key_ID=<id>   -> same shape
class KmsHttpServer {
public:
    explicit KmsHttpServer(std::shared_ptr<KeyManagementService> kms);
    ~KmsHttpServer();
    KmsHttpServer(const KmsHttpServer&) = delete;
    KmsHttpServer& operator=(const KmsHttpServer&) = delete;

    /// Binds and serves on a background thread; port 0 picks a free port.
    /// Returns the bound port.
    int start(const std::string& host, int port);
    /// Serves on the calling thread until stop() is called.
    bool listen(const std::string& host, int port);
    void stop();

private:
    std::shared_ptr<KeyManagementService> kms_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
};

/// 16-byte key id <-> canonical 8-4-4-4-12 UUID text.
std::string key_id_to_uuid(ByteView key_id);
Bytes key_id_from_uuid(std::string_view uuid);

std::string base64_encode(ByteView data);
Bytes base64_decode(std::string_view text);

}  // namespace muckle

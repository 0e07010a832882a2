#include "muckle/qkd.hpp"

#include <openssl/evp.h>

#include <nlohmann/json.hpp>

#include "httplib.h"

namespace muckle {

std::string_view to_string(QkdErrc code) {
    switch (code) {
        case QkdErrc::unavailable: return "unavailable";
        case QkdErrc::not_found: return "not-found";
        case QkdErrc::already_consumed: return "already-consumed";
        case QkdErrc::unauthorized: return "unauthorized";
    }
    return "unknown";
}

// ---- simulator ----

KeyManagementService::KeyManagementService(Options options)
    : options_(options), rng_(options.seed, "qkd-kms") {}

KeyManagementService::Link KeyManagementService::link_of(const std::string& a, const std::string& b) {
    return a < b ? Link{a, b} : Link{b, a};
}

void KeyManagementService::add_link(const std::string& a, const std::string& b) {
    if (a == b) throw std::invalid_argument("QKD link needs two distinct parties");
    std::lock_guard lock(mutex_);
    links_.emplace(link_of(a, b), 0);
}

bool KeyManagementService::has_link(const std::string& a, const std::string& b) const {
    std::lock_guard lock(mutex_);
    return links_.count(link_of(a, b)) != 0;
}

std::size_t KeyManagementService::issued(const std::string& a, const std::string& b) const {
    std::lock_guard lock(mutex_);
    auto it = links_.find(link_of(a, b));
    return it == links_.end() ? 0 : it->second;
}

void KeyManagementService::wait_for_rate_slot() {
    if (options_.keys_per_second <= 0.0) return;
    const auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / options_.keys_per_second));
    std::chrono::steady_clock::time_point slot;
    {
        std::lock_guard lock(mutex_);
        slot = std::max(std::chrono::steady_clock::now(), next_slot_);
        next_slot_ = slot + interval;
    }
    std::this_thread::sleep_until(slot);
}

QkdKey KeyManagementService::get_key(const std::string& requester, const std::string& partner) {
    {
        std::lock_guard lock(mutex_);
        if (requester == partner || links_.count(link_of(requester, partner)) == 0)
            throw QkdError(QkdErrc::unavailable, "no QKD link between '" + requester + "' and '" + partner + "'");
    }
    wait_for_rate_slot();

    std::lock_guard lock(mutex_);
    auto& count = links_.at(link_of(requester, partner));
    if (options_.pool_size && count >= *options_.pool_size)
        throw QkdError(QkdErrc::unavailable, "QKD key pool exhausted");
    ++count;

    QkdKeyRecord rec;
    do {
        rec.key_id = rng_.bytes(kQkdKeyIdLen);
    } while (records_.count(rec.key_id) != 0);
    rec.key = rng_.bytes(kQkdKeyLen);
    rec.owner_pair = {requester, partner};
    rec.consumed_by.insert(requester);
    rec.created_at = std::chrono::system_clock::now();

    QkdKey out{rec.key_id, rec.key};
    records_.emplace(rec.key_id, std::move(rec));
    return out;
}

Bytes KeyManagementService::get_key_by_id(const std::string& requester, const std::string& partner,
                                          ByteView key_id) {
    std::lock_guard lock(mutex_);
    auto it = records_.find(Bytes(key_id.begin(), key_id.end()));
    if (it == records_.end()) throw QkdError(QkdErrc::not_found, "unknown QKD key id");
    auto& rec = it->second;
    if (link_of(requester, partner) != link_of(rec.owner_pair.first, rec.owner_pair.second))
        throw QkdError(QkdErrc::unauthorized, "QKD key id was not issued to this party pair");
    if (rec.consumed_by.count(requester) != 0)
        throw QkdError(QkdErrc::already_consumed, "QKD key already delivered to '" + requester + "'");
    rec.consumed_by.insert(requester);
    return rec.key;
}

Bytes KeyManagementService::corrupt_key(ByteView key_id) {
    std::lock_guard lock(mutex_);
    auto it = records_.find(Bytes(key_id.begin(), key_id.end()));
    if (it == records_.end()) throw QkdError(QkdErrc::not_found, "unknown QKD key id");
    corruptions_.push_back({it->second.key_id, it->second.owner_pair});
    return it->second.key;
}

std::vector<CorruptionEvent> KeyManagementService::corruption_log() const {
    std::lock_guard lock(mutex_);
    return corruptions_;
}

std::optional<QkdKeyRecord> KeyManagementService::record(ByteView key_id) const {
    std::lock_guard lock(mutex_);
    auto it = records_.find(Bytes(key_id.begin(), key_id.end()));
    if (it == records_.end()) return std::nullopt;
    return it->second;
}

// ---- encodings ----

std::string key_id_to_uuid(ByteView key_id) {
    if (key_id.size() != kQkdKeyIdLen) throw std::invalid_argument("key id must be 16 bytes");
    auto hex = to_hex(key_id);
    return hex.substr(0, 8) + "-" + hex.substr(8, 4) + "-" + hex.substr(12, 4) + "-" + hex.substr(16, 4) + "-" +
           hex.substr(20);
}

Bytes key_id_from_uuid(std::string_view uuid) {
    std::string hex;
    for (char c : uuid)
        if (c != '-') hex.push_back(c);
    if (uuid.size() != 36 || hex.size() != 32) throw std::invalid_argument("malformed key id");
    return from_hex(hex);
}

std::string base64_encode(ByteView data) {
    std::string out(4 * ((data.size() + 2) / 3) + 1, '\0');
    int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(), static_cast<int>(data.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

Bytes base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) throw std::invalid_argument("malformed base64");
    Bytes out(3 * text.size() / 4 + 1);
    int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                            static_cast<int>(text.size()));
    if (n < 0) throw std::invalid_argument("malformed base64");
    // EVP_DecodeBlock keeps padding bytes in its count.
    std::size_t pad = 0;
    if (!text.empty() && text.back() == '=') ++pad;
    if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

// ---- HTTP client ----

namespace {

using nlohmann::json;

QkdErrc errc_from_status(int status) {
    switch (status) {
        case 404: return QkdErrc::not_found;
        case 409: return QkdErrc::already_consumed;
        case 401: return QkdErrc::unauthorized;
        default: return QkdErrc::unavailable;
    }
}

int status_from_errc(QkdErrc code) {
    switch (code) {
        case QkdErrc::not_found: return 404;
        case QkdErrc::already_consumed: return 409;
        case QkdErrc::unauthorized: return 401;
        case QkdErrc::unavailable: return 503;
    }
    return 500;
}

json key_container(const Bytes& key_id, const Bytes& key) {
    return json{{"keys", json::array({json{{"key_ID", key_id_to_uuid(key_id)}, {"key", base64_encode(key)}}})}};
}

QkdKey parse_key_container(const std::string& body) {
    try {
        auto j = json::parse(body);
        const auto& k = j.at("keys").at(0);
        QkdKey out{key_id_from_uuid(k.at("key_ID").get<std::string>()), base64_decode(k.at("key").get<std::string>())};
        if (out.key.size() != kQkdKeyLen) throw QkdError(QkdErrc::unavailable, "KMS returned a key of wrong length");
        return out;
    } catch (const QkdError&) {
        throw;
    } catch (const std::exception& e) {
        throw QkdError(QkdErrc::unavailable, std::string("malformed KMS response: ") + e.what());
    }
}

QkdKey http_get(const std::string& endpoint, const std::string& self, const std::string& path) {
    httplib::Client cli(endpoint);
    cli.set_connection_timeout(5);
    cli.set_read_timeout(30);
    auto res = cli.Get(path, httplib::Headers{{"X-SAE-ID", self}});
    if (!res) throw QkdError(QkdErrc::unavailable, "KMS unreachable at " + endpoint);
    if (res->status != 200) {
        std::string msg = "KMS returned HTTP " + std::to_string(res->status);
        try {
            msg += ": " + json::parse(res->body).at("message").get<std::string>();
        } catch (...) {
        }
        throw QkdError(errc_from_status(res->status), msg);
    }
    return parse_key_container(res->body);
}

}  // namespace

HttpQkdClient::HttpQkdClient(std::string endpoint, std::string self_id)
    : endpoint_(std::move(endpoint)), self_(std::move(self_id)) {}

QkdKey HttpQkdClient::get_key(const std::string& partner) {
    return http_get(endpoint_, self_, "/api/v1/keys/" + partner + "/enc_keys");
}

Bytes HttpQkdClient::get_key_by_id(const std::string& partner, ByteView key_id) {
    auto k = http_get(endpoint_, self_,
                      "/api/v1/keys/" + partner +
                          "/dec_keys?key_ID=" + key_id_to_uuid(key_id));
    if (!equal_ct(k.key_id, key_id)) throw QkdError(QkdErrc::unavailable, "KMS answered with a different key id");
    return k.key;
}

// ---- HTTP server ----

KmsHttpServer::KmsHttpServer(std::shared_ptr<KeyManagementService> kms)
    : kms_(std::move(kms)), server_(std::make_unique<httplib::Server>()) {
    auto fail = [](httplib::Response& res, int status, const std::string& message) {
        res.status = status;
        res.set_content(json{{"message", message}}.dump(), "application/json");
    };
    auto requester = [](const httplib::Request& req) { return req.get_header_value("X-SAE-ID"); };

    server_->Get(R"(/api/v1/keys/([^/]+)/enc_keys)", [this, fail, requester](const httplib::Request& req,
                                                                             httplib::Response& res) {
        auto self = requester(req);
        if (self.empty()) return fail(res, 400, "missing X-SAE-ID header");
        try {
            auto k = kms_->get_key(self, req.matches[1].str());
            res.set_content(key_container(k.key_id, k.key).dump(), "application/json");
        } catch (const QkdError& e) {
            fail(res, status_from_errc(e.code()), e.what());
        }
    });

    server_->Get(R"(/api/v1/keys/([^/]+)/dec_keys)", [this, fail, requester](const httplib::Request& req,
                                                                             httplib::Response& res) {
        auto self = requester(req);
        if (self.empty()) return fail(res, 400, "missing X-SAE-ID header");
        if (!req.has_param("key_ID")) return fail(res, 400, "missing key_ID");
        Bytes id;
        try {
            id = key_id_from_uuid(req.get_param_value("key_ID"));
        } catch (const std::exception&) {
            return fail(res, 400, "malformed key_ID");
        }
        try {
            auto key = kms_->get_key_by_id(self, req.matches[1].str(), id);
            res.set_content(key_container(id, key).dump(), "application/json");
        } catch (const QkdError& e) {
            fail(res, status_from_errc(e.code()), e.what());
        }
    });
}

KmsHttpServer::~KmsHttpServer() { stop(); }

int KmsHttpServer::start(const std::string& host, int port) {
    int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw std::runtime_error("KMS: cannot bind " + host + ":" + std::to_string(port));
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return bound;
}

bool KmsHttpServer::listen(const std::string& host, int port) { return server_->listen(host, port); }

void KmsHttpServer::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace muckle

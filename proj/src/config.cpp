#include "muckle/config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

#include "muckle/vectors.hpp"

namespace muckle {

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

SuiteIds suite_from_json(const json& j) {
    if (j.is_string()) return builtin_suite(j.get<std::string>());
    if (!j.is_object()) throw std::runtime_error("config: 'suite' must be a name or an object");
    SuiteIds ids;
    const auto take = [&](const char* key, std::string& field) {
        if (j.contains(key)) field = j.at(key).get<std::string>();
    };
    take("classical_kem", ids.classical_kem);
    take("pq_kem", ids.pq_kem);
    take("auth_kem", ids.auth_kem);
    take("hash", ids.hash);
    take("prf", ids.prf);
    take("mac", ids.mac);
    take("aead", ids.aead);
    Suite::resolve(ids);
    return ids;
}

std::string required_string(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_string()) throw std::runtime_error(std::string("config: missing '") + key + "'");
    return j.at(key).get<std::string>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

VectorFile read_vectors(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return VectorFile::read(in);
}

void write_vectors(const std::filesystem::path& path, const VectorFile& v) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    v.write(out);
}

}  // namespace

LabelBinding parse_label_binding(const std::string& text) {
    if (text == "table") return LabelBinding::table;
    if (text == "figure") return LabelBinding::figure;
    throw std::invalid_argument("label binding must be 'table' or 'figure', got '" + text + "'");
}

RatsMode parse_rats_mode(const std::string& text) {
    if (text == "figure") return RatsMode::figure;
    if (text == "uniform") return RatsMode::uniform;
    throw std::invalid_argument("RATS mode must be 'figure' or 'uniform', got '" + text + "'");
}

std::string_view to_string(LabelBinding b) { return b == LabelBinding::table ? "table" : "figure"; }
std::string_view to_string(RatsMode m) { return m == RatsMode::figure ? "figure" : "uniform"; }

SuiteIds parse_suite(const std::string& json_or_name) {
    const auto first = json_or_name.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && json_or_name[first] == '{') return suite_from_json(json::parse(json_or_name));
    return builtin_suite(json_or_name);
}

PartyConfig parse_party_config(const std::string& json_text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw std::runtime_error("config: top level must be an object");

    PartyConfig out;
    auto& s = out.session;
    if (!j.contains("suite")) throw std::runtime_error("config: missing 'suite'");
    s.suite = suite_from_json(j.at("suite"));
    out.suite_name = j.at("suite").is_string() ? j.at("suite").get<std::string>() : s.suite.describe();
    s.self_id = required_string(j, "self_id");
    s.peer_id = required_string(j, "peer_id");
    s.credential = read_credential(resolve(base_dir, required_string(j, "credential")));

    if (j.contains("trust")) {
        std::vector<Certificate> pinned;
        for (const auto& entry : j.at("trust")) pinned.push_back(read_certificate(resolve(base_dir, entry.get<std::string>())));
        s.trust_store = TrustStore::pinned(std::move(pinned));
    } else if (j.contains("issuer_key")) {
        const auto key = from_hex(j.at("issuer_key").get<std::string>());
        const std::string issuer_id = s.credential.certificate.issuer_id;
        const std::size_t att_len = s.credential.certificate.attestation.size();
        s.trust_store = TrustStore::with_verifier(SimulatedIssuer(issuer_id, key, att_len).verifier());
    } else {
        throw std::runtime_error("config: need 'trust' or 'issuer_key'");
    }

    if (j.contains("qkd_endpoint")) out.qkd_endpoint = j.at("qkd_endpoint").get<std::string>();
    if (j.contains("label_binding")) s.schedule.label_binding = parse_label_binding(j.at("label_binding").get<std::string>());
    if (j.contains("rats_mode")) s.schedule.rats_mode = parse_rats_mode(j.at("rats_mode").get<std::string>());
    return out;
}

PartyConfig load_party_config(const std::filesystem::path& path) {
    return parse_party_config(read_file(path), path.has_parent_path() ? path.parent_path() : ".");
}

void write_credential(const std::filesystem::path& path, const Credential& credential) {
    VectorFile v;
    v.set("certificate", credential.certificate.encode());
    v.set("secret_key", credential.secret_key);
    write_vectors(path, v);
}

Credential read_credential(const std::filesystem::path& path) {
    const auto v = read_vectors(path);
    return Credential{Certificate::decode(v.at("certificate")), v.at("secret_key")};
}

void write_certificate(const std::filesystem::path& path, const Certificate& certificate) {
    VectorFile v;
    v.set("certificate", certificate.encode());
    write_vectors(path, v);
}

Certificate read_certificate(const std::filesystem::path& path) {
    return Certificate::decode(read_vectors(path).at("certificate"));
}

}  // namespace muckle

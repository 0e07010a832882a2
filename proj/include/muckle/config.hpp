#pragma once

#include <filesystem>
#include <string>

#include "muckle/certificate.hpp"
#include "muckle/key_schedule.hpp"
#include "muckle/registry.hpp"
#include "muckle/session.hpp"

namespace muckle {

/// One party's deployment settings, read from a JSON file:
///
///   {
///     "suite": "x25519-hybrid" | {"classical_kem": "...", "pq_kem": "...", ...},
///     "self_id": "alice",
///     "peer_id": "bob",
///     "credential": "alice.cred",
///     "trust": ["bob.cert"],            // pinned certificates, or
///     "issuer_key": "<hex>",            // verify simulated-CA attestations
///     "qkd_endpoint": "http://127.0.0.1:8020" | "inproc",
///     "label_binding": "table" | "figure",
///     "rats_mode": "figure" | "uniform"
///   }
///
/// Relative paths resolve against the config file's directory.
struct PartyConfig {
    SessionConfig session;
    std::string suite_name;  // as written, or the suite description
    std::string qkd_endpoint = "inproc";
};

/// Throws std::runtime_error with the offending key on any problem.
PartyConfig load_party_config(const std::filesystem::path& path);
PartyConfig parse_party_config(const std::string& json_text, const std::filesystem::path& base_dir);

/// A built-in suite name or a JSON object of algorithm ids.
SuiteIds parse_suite(const std::string& json_or_name);

LabelBinding parse_label_binding(const std::string& text);
RatsMode parse_rats_mode(const std::string& text);
std::string_view to_string(LabelBinding b);
std::string_view to_string(RatsMode m);

/// Credential files hold `certificate` and `secret_key` entries in the
/// vector-file format; certificate files only `certificate`.
void write_credential(const std::filesystem::path& path, const Credential& credential);
Credential read_credential(const std::filesystem::path& path);
void write_certificate(const std::filesystem::path& path, const Certificate& certificate);
Certificate read_certificate(const std::filesystem::path& path);

}  // namespace muckle

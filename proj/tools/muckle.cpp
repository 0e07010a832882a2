// Command-line front end: TCP initiator/responder, in-process loopback,
// benchmarks, test vectors, credentials and a simulated key-delivery service.

#include <CLI11.hpp>
#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include "muckle/bench.hpp"
#include "muckle/config.hpp"
#include "muckle/node.hpp"
#include "muckle/qkd.hpp"
#include "muckle/random.hpp"
#include "muckle/transport.hpp"

using namespace muckle;

namespace {

void log_line(const std::string& line) { std::cerr << line << '\n'; }

struct ScheduleFlags {
    std::string rats_mode;
    std::string label_binding;

    void add(CLI::App* app) {
        app->add_option("--rats-mode", rats_mode, "RATS source: figure | uniform")->check(CLI::IsMember({"figure", "uniform"}));
        app->add_option("--label-binding", label_binding, "label indices: table | figure")
            ->check(CLI::IsMember({"table", "figure"}));
    }
    void apply(KeyScheduleOptions& o) const {
        if (!rats_mode.empty()) o.rats_mode = parse_rats_mode(rats_mode);
        if (!label_binding.empty()) o.label_binding = parse_label_binding(label_binding);
    }
};

void print_report(const bench::BenchReport& report, const std::string& json_path) {
    std::cout << report.to_table() << '\n' << report.to_json() << '\n';
    if (!json_path.empty()) {
        std::ofstream out(json_path);
        if (!out) throw std::runtime_error("cannot write " + json_path);
        out << report.to_json() << '\n';
    }
}

std::vector<std::string> suite_names(const std::string& which) {
    std::vector<std::string> out;
    if (which != "all") return {which};
    for (const auto& s : builtin_suites()) out.push_back(s.name);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    std::signal(SIGPIPE, SIG_IGN);
    CLI::App app{"Muckle# hybrid authenticated key exchange"};
    app.require_subcommand(1);

    // responder
    std::string config_path, listen = "127.0.0.1:4433", connect = "127.0.0.1:4433", qkd_endpoint, report_path;
    int stages = 1, runs = 1, max_connections = 0;
    ScheduleFlags schedule_flags;
    auto* responder = app.add_subcommand("responder", "serve handshakes on a TCP listener");
    responder->add_option("--config", config_path, "party config (JSON)")->required()->check(CLI::ExistingFile);
    responder->add_option("--listen", listen, "host:port to listen on");
    responder->add_option("--qkd-endpoint", qkd_endpoint, "key-delivery service URL (overrides config)");
    responder->add_option("--max-connections", max_connections, "exit after this many connections (0 = never)");
    schedule_flags.add(responder);

    // initiator
    auto* initiator = app.add_subcommand("initiator", "run handshakes against a responder");
    initiator->add_option("--config", config_path, "party config (JSON)")->required()->check(CLI::ExistingFile);
    initiator->add_option("--connect", connect, "responder host:port");
    initiator->add_option("--stages", stages, "stages per session")->check(CLI::PositiveNumber);
    initiator->add_option("--bench", runs, "number of sessions to run and report")->check(CLI::PositiveNumber);
    initiator->add_option("--qkd-endpoint", qkd_endpoint, "key-delivery service URL (overrides config)");
    initiator->add_option("--report", report_path, "also write the JSON report here");
    schedule_flags.add(initiator);

    // loopback
    std::string suite_name = "toy-hybrid";
    std::uint64_t seed = 1;
    auto* loopback = app.add_subcommand("loopback", "initiator and responder in one process over TCP");
    loopback->add_option("--suite", suite_name, "built-in suite name or JSON object");
    loopback->add_option("--stages", stages, "stages per session")->check(CLI::PositiveNumber);
    loopback->add_option("--bench", runs, "number of sessions")->check(CLI::PositiveNumber);
    loopback->add_option("--seed", seed, "seed for the simulated credentials and QKD keys");
    loopback->add_option("--report", report_path, "also write the JSON report here");
    schedule_flags.add(loopback);

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "in-memory benchmark without sockets");
    bench_cmd->add_option("--suite", suite_name, "built-in suite name, JSON object, or 'all'");
    bench_cmd->add_option("--stages", stages, "stages per session")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--bench", runs, "number of sessions")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--seed", seed, "seed");
    bench_cmd->add_option("--report", report_path, "also write the JSON report here");
    schedule_flags.add(bench_cmd);

    // vectors
    std::string vectors_path;
    bool dump_secrets = false;
    auto* vectors = app.add_subcommand("vectors", "write a deterministic full-handshake vector file");
    vectors->add_option("--vectors", vectors_path, "output path ('-' for stdout)")->required();
    vectors->add_option("--seed", seed, "seed");
    vectors->add_option("--suite", suite_name, "built-in suite name or JSON object");
    vectors->add_flag("--dump-secrets", dump_secrets, "required: the file contains every secret of the stage");
    schedule_flags.add(vectors);

    // keygen
    std::string subject, issuer_id = "demo-ca", issuer_key_hex, cred_out, cert_out;
    std::size_t attestation_len = 32;
    auto* keygen = app.add_subcommand("keygen", "issue a long-term credential from a simulated CA");
    keygen->add_option("--suite", suite_name, "suite whose long-term KEM to use");
    keygen->add_option("--subject", subject, "party identity")->required();
    keygen->add_option("--issuer-id", issuer_id, "simulated CA name");
    keygen->add_option("--issuer-key", issuer_key_hex, "simulated CA key, 64 hex digits")->required();
    keygen->add_option("--attestation-len", attestation_len, "attestation size in bytes (>= 32)");
    keygen->add_option("--out", cred_out, "credential file")->required();
    keygen->add_option("--cert-out", cert_out, "certificate file for peers' trust lists");

    // kms
    std::vector<std::string> links;
    std::size_t pool = 0;
    double rate = 0;
    std::string kms_listen = "127.0.0.1:8020";
    auto* kms = app.add_subcommand("kms", "serve a simulated QKD key-delivery API over HTTP");
    kms->add_option("--listen", kms_listen, "host:port");
    kms->add_option("--link", links, "party pair 'a:b' (repeatable)")->required();
    kms->add_option("--seed", seed, "key generator seed");
    kms->add_option("--pool", pool, "keys per link (0 = unlimited)");
    kms->add_option("--rate", rate, "keys per second (0 = unlimited)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*responder) {
            auto cfg = load_party_config(config_path);
            schedule_flags.apply(cfg.session.schedule);
            const std::string endpoint = qkd_endpoint.empty() ? cfg.qkd_endpoint : qkd_endpoint;
            make_qkd_client(endpoint, cfg.session.self_id);  // fail fast on a bad endpoint
            const auto [host, port] = parse_endpoint(listen);
            TcpListener listener(host, port);
            log_line("listening on " + host + ":" + std::to_string(listener.port()) + " suite " + cfg.suite_name);
            serve_responder(
                listener, cfg.session, [&] { return make_qkd_client(endpoint, cfg.session.self_id); }, max_connections,
                log_line);
            return 0;
        }
        if (*initiator) {
            auto cfg = load_party_config(config_path);
            schedule_flags.apply(cfg.session.schedule);
            const std::string endpoint = qkd_endpoint.empty() ? cfg.qkd_endpoint : qkd_endpoint;
            InitiatorOptions opts;
            std::tie(opts.host, opts.port) = parse_endpoint(connect);
            opts.stages = stages;
            opts.runs = runs;
            opts.suite_name = cfg.suite_name;
            auto report = run_initiator(
                cfg.session, opts, [&] { return make_qkd_client(endpoint, cfg.session.self_id); }, log_line);
            print_report(report, report_path);
            return 0;
        }
        if (*loopback) {
            KeyScheduleOptions options;
            schedule_flags.apply(options);
            const SuiteIds ids = parse_suite(suite_name);
            auto d = bench::make_local_deployment(ids, seed, options);
            TcpListener listener("127.0.0.1", 0);
            std::exception_ptr server_error;
            std::thread server([&] {
                try {
                    serve_responder(
                        listener, d.responder, [&] { return make_qkd_client("inproc", "bob", d.kms); }, runs, log_line);
                } catch (...) {
                    server_error = std::current_exception();
                }
            });
            InitiatorOptions opts{"127.0.0.1", listener.port(), stages, runs, suite_name};
            bench::BenchReport report;
            try {
                report = run_initiator(
                    d.initiator, opts, [&] { return make_qkd_client("inproc", "alice", d.kms); }, log_line);
            } catch (...) {
                listener.shutdown();
                server.join();
                throw;
            }
            server.join();
            if (server_error) std::rethrow_exception(server_error);
            print_report(report, report_path);
            return 0;
        }
        if (*bench_cmd) {
            KeyScheduleOptions options;
            schedule_flags.apply(options);
            for (const auto& name : suite_names(suite_name)) {
                auto report = bench::run_local_bench(parse_suite(name), runs, stages, seed, options);
                report.suite = name;
                print_report(report, report_path);
            }
            return 0;
        }
        if (*vectors) {
            if (!dump_secrets) {
                std::cerr << "refusing to write secret material without --dump-secrets\n";
                return 2;
            }
            KeyScheduleOptions options;
            schedule_flags.apply(options);
            const auto file = bench::emit_vectors(seed, parse_suite(suite_name), options);
            if (vectors_path == "-") {
                file.write(std::cout);
            } else {
                std::ofstream out(vectors_path);
                if (!out) throw std::runtime_error("cannot write " + vectors_path);
                out << "# suite " << suite_name << ", seed " << seed << ", label binding "
                    << to_string(options.label_binding) << ", RATS " << to_string(options.rats_mode) << '\n';
                file.write(out);
            }
            return 0;
        }
        if (*keygen) {
            const Suite suite = Suite::resolve(parse_suite(suite_name));
            SimulatedIssuer issuer(issuer_id, from_hex(issuer_key_hex), attestation_len);
            SystemRandom rng;
            const auto cred = make_credential(subject, *suite.auth, issuer, rng);
            write_credential(cred_out, cred);
            if (!cert_out.empty()) write_certificate(cert_out, cred.certificate);
            std::cerr << "wrote credential for " << subject << " (" << suite.auth->id() << ")\n";
            return 0;
        }
        if (*kms) {
            KeyManagementService::Options o;
            o.seed = seed;
            if (pool) o.pool_size = pool;
            o.keys_per_second = rate;
            auto service = std::make_shared<KeyManagementService>(o);
            for (const auto& link : links) {
                const auto colon = link.find(':');
                if (colon == std::string::npos) throw std::invalid_argument("--link expects a:b, got " + link);
                service->add_link(link.substr(0, colon), link.substr(colon + 1));
            }
            const auto [host, port] = parse_endpoint(kms_listen);
            KmsHttpServer server(service);
            log_line("key delivery on http://" + host + ":" + std::to_string(port));
            return server.listen(host, port) ? 0 : 1;
        }
    } catch (const ProtocolError& e) {
        std::cerr << "handshake rejected: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

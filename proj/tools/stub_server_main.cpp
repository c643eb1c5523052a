// Standalone provider stub: serves the /embed and /generate wire contracts on
// localhost, backed by the deterministic mock embedding. Useful for manual
// end-to-end runs without model weights.

#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "citeguard/stub_server.hpp"

namespace {

citeguard::StubProviderServer* g_server = nullptr;

void handle_signal(int) {
    if (g_server) g_server->request_stop();
}

std::vector<std::string> load_script(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw citeguard::Error(citeguard::Errc::io_error, "cannot open " + path);
    std::vector<std::string> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            nlohmann::json j = nlohmann::json::parse(line);
            out.push_back(j.at("text").get<std::string>());
        } catch (const nlohmann::json::exception& e) {
            throw citeguard::Error(citeguard::Errc::malformed_record,
                                   path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"provider stub implementing the embed/generate wire contracts"};
    int port = 9090;
    std::size_t dim = 64;
    std::string script_path;
    std::string require_key;
    int fail_first = 0;
    app.add_option("--port", port, "port on 127.0.0.1");
    app.add_option("--dim", dim, "mock embedding dimension")->check(CLI::Range(8, 65536));
    app.add_option("--scripted", script_path,
                   "JSONL of {\"text\": ...} generation responses served by request ordinal");
    app.add_option("--require-key", require_key, "reject requests without this bearer token");
    app.add_option("--fail-first", fail_first, "answer 503 to the first N requests");
    CLI11_PARSE(app, argc, argv);

    try {
        citeguard::StubProviderServer::Options opts;
        opts.dim = dim;
        opts.fail_first = fail_first;
        if (!script_path.empty()) opts.scripted = load_script(script_path);
        if (!require_key.empty()) opts.require_bearer = require_key;

        citeguard::StubProviderServer server(opts);
        g_server = &server;
        std::signal(SIGINT, handle_signal);
        std::signal(SIGTERM, handle_signal);

        server.start(port);
        std::cout << "stub provider listening on " << server.base_url() << " (dim " << dim
                  << ", " << (script_path.empty() ? "extractive" : "scripted")
                  << " generation)\n";
        server.wait();
        return 0;
    } catch (const citeguard::Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
}

// citeguard: ingest fiscal/regulatory document extracts, build an exact
// vector index, and answer questions with enforced citations or an explicit
// abstention. Exit codes: 0 answered/ok, 1 error, 2 usage, 3 abstained.

#include <CLI11.hpp>

#include "citeguard/cli.hpp"

namespace {

template <typename T>
std::optional<T> opt_of(const CLI::Option* o, const T& value) {
    if (o && o->count() > 0) return value;
    return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"source-first, citation-enforced retrieval QA over document corpora"};
    app.require_subcommand(1);

    // --- ingest ---
    citeguard::IngestOptions ingest;
    auto* cmd_ingest = app.add_subcommand("ingest", "validate DIF files and build a chunk store");
    cmd_ingest->add_option("--in", ingest.input_dir, "directory of DIF .json files")->required();
    cmd_ingest->add_option("--store", ingest.store_dir, "store directory to create")->required();
    cmd_ingest->add_flag("--lenient", ingest.lenient, "ignore unknown DIF keys");
    cmd_ingest->add_option("--target-len", ingest.chunking.target_len, "chunk target length");
    cmd_ingest->add_option("--max-len", ingest.chunking.max_len, "chunk maximum length");
    cmd_ingest->add_option("--overlap-len", ingest.chunking.overlap_len, "chunk overlap");
    cmd_ingest->add_option("--min-len", ingest.chunking.min_len, "chunk minimum length");

    // --- index ---
    citeguard::IndexOptions index;
    std::string index_model;
    std::size_t index_mock_dim = 0;
    auto* cmd_index = app.add_subcommand("index", "embed chunks and build the vector index");
    cmd_index->add_option("--store", index.store_dir, "store directory")->required();
    auto* provider_opt =
        cmd_index->add_option("--provider", index.provider, "\"mock\" or embedding service URL");
    (void)provider_opt;
    auto* index_model_opt = cmd_index->add_option("--model", index_model, "embedding model id");
    auto* mock_dim_opt =
        cmd_index->add_option("--mock-dim", index_mock_dim, "mock embedding dimension");
    cmd_index->add_flag("--force", index.force, "rebuild even if the dimension changed");

    // --- query ---
    citeguard::QueryOptions query;
    double query_tau = 0.55;
    std::size_t query_k = 5;
    std::string query_embed, query_llm, query_model;
    auto* cmd_query = app.add_subcommand("query", "answer one question against a store");
    cmd_query->add_option("--store", query.store_dir, "store directory")->required();
    cmd_query->add_option("question", query.question, "the question to answer")->required();
    auto* k_opt = cmd_query->add_option("--k", query_k, "evidence chunks to retrieve")
                      ->check(CLI::Range(std::size_t{1}, std::size_t{1000}));
    auto* tau_opt = cmd_query->add_option("--tau", query_tau, "abstention threshold")
                        ->check(CLI::Range(-1.0, 1.0));
    cmd_query->add_flag("--json", query.json, "emit the machine-readable response body");
    auto* q_embed = cmd_query->add_option("--embed-url", query_embed, "\"mock\" or embed URL");
    auto* q_llm = cmd_query->add_option("--llm-url", query_llm, "\"mock\" or generation URL");
    auto* q_model = cmd_query->add_option("--model", query_model, "model id override");

    // --- serve ---
    citeguard::ServeOptions serve;
    double serve_tau = 0.55;
    std::size_t serve_k = 5;
    std::string serve_embed, serve_llm, serve_model;
    auto* cmd_serve = app.add_subcommand("serve", "run the read-only HTTP query service");
    cmd_serve->add_option("--store", serve.store_dir, "store directory")->required();
    cmd_serve->add_option("--port", serve.port, "port on 127.0.0.1")->required();
    auto* s_tau = cmd_serve->add_option("--tau", serve_tau, "abstention threshold")
                      ->check(CLI::Range(-1.0, 1.0));
    auto* s_k = cmd_serve->add_option("--k", serve_k, "evidence chunks to retrieve")
                    ->check(CLI::Range(std::size_t{1}, std::size_t{1000}));
    auto* s_embed = cmd_serve->add_option("--embed-url", serve_embed, "\"mock\" or embed URL");
    auto* s_llm = cmd_serve->add_option("--llm-url", serve_llm, "\"mock\" or generation URL");
    auto* s_model = cmd_serve->add_option("--model", serve_model, "model id override");

    // --- eval run / eval report ---
    auto* cmd_eval = app.add_subcommand("eval", "run query sets and compute metrics");
    cmd_eval->require_subcommand(1);

    citeguard::EvalRunOptions eval_run;
    double run_tau = 0.55;
    std::size_t run_k = 5;
    std::string run_embed, run_llm, run_model;
    auto* cmd_run = cmd_eval->add_subcommand("run", "run a query set, write records.jsonl");
    cmd_run->add_option("--store", eval_run.store_dir, "store directory")->required();
    cmd_run->add_option("--queries", eval_run.queries_path, "queries.jsonl")->required();
    cmd_run->add_option("--out", eval_run.out_path, "output records path");
    cmd_run->add_flag("--timings", eval_run.timings,
                      "record wall-clock times (breaks byte reproducibility)");
    auto* r_tau = cmd_run->add_option("--tau", run_tau, "abstention threshold")
                      ->check(CLI::Range(-1.0, 1.0));
    auto* r_k = cmd_run->add_option("--k", run_k, "evidence chunks to retrieve")
                    ->check(CLI::Range(std::size_t{1}, std::size_t{1000}));
    auto* r_embed = cmd_run->add_option("--embed-url", run_embed, "\"mock\" or embed URL");
    auto* r_llm = cmd_run->add_option("--llm-url", run_llm, "\"mock\" or generation URL");
    auto* r_model = cmd_run->add_option("--model", run_model, "model id override");

    citeguard::EvalReportOptions eval_report;
    std::string labels_path;
    auto* cmd_report = cmd_eval->add_subcommand("report", "compute metrics from records");
    cmd_report->add_option("--records", eval_report.records_path, "records.jsonl")->required();
    auto* labels_opt = cmd_report->add_option("--labels", labels_path, "labels.jsonl");
    cmd_report->add_option("--out", eval_report.out_path, "output report path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return citeguard::kExitUsage;
    }

    if (cmd_ingest->parsed()) return citeguard::cmd_ingest(ingest);
    if (cmd_index->parsed()) {
        index.model = opt_of(index_model_opt, index_model);
        index.mock_dim = opt_of(mock_dim_opt, index_mock_dim);
        return citeguard::cmd_index(index);
    }
    if (cmd_query->parsed()) {
        query.k = opt_of(k_opt, query_k);
        query.tau = opt_of(tau_opt, query_tau);
        query.embed_url = opt_of(q_embed, query_embed);
        query.llm_url = opt_of(q_llm, query_llm);
        query.model = opt_of(q_model, query_model);
        return citeguard::cmd_query(query);
    }
    if (cmd_serve->parsed()) {
        serve.k = opt_of(s_k, serve_k);
        serve.tau = opt_of(s_tau, serve_tau);
        serve.embed_url = opt_of(s_embed, serve_embed);
        serve.llm_url = opt_of(s_llm, serve_llm);
        serve.model = opt_of(s_model, serve_model);
        return citeguard::cmd_serve(serve);
    }
    if (cmd_run->parsed()) {
        eval_run.k = opt_of(r_k, run_k);
        eval_run.tau = opt_of(r_tau, run_tau);
        eval_run.embed_url = opt_of(r_embed, run_embed);
        eval_run.llm_url = opt_of(r_llm, run_llm);
        eval_run.model = opt_of(r_model, run_model);
        return citeguard::cmd_eval_run(eval_run);
    }
    if (cmd_report->parsed()) {
        eval_report.labels_path = opt_of(labels_opt, labels_path);
        return citeguard::cmd_eval_report(eval_report);
    }
    return citeguard::kExitUsage;
}

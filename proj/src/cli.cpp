#include "jurirag/cli.hpp"

#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "jurirag/service.hpp"

namespace jurirag {

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
            HttpTransport& transport, const EnvLookup& env) {
    CLI::App app{"Jurisdiction-aware retrieval and answering over AI policy documents", "jurirag"};
    app.require_subcommand(1);

    std::string config_file, manifest, index, addr, question, queries, report;
    long long k = -1;
    bool offline = false;
    bool as_json = false;

    app.add_option("--config", config_file, "JSON configuration file");
    app.add_option("--manifest", manifest, "Corpus manifest (line-delimited JSON)");
    app.add_option("--index", index, "Index base path");
    app.add_flag("--offline", offline, "Reference embedder and stub generator; no network");

    auto* ingest = app.add_subcommand("ingest", "Chunk, embed and index the corpus");

    auto* query = app.add_subcommand("query", "Answer one question");
    query->add_option("question", question, "Question text")->required();
    query->add_option("--k", k, "Number of contexts");
    query->add_flag("--json", as_json, "Print the full result as JSON");

    auto* eval = app.add_subcommand("eval", "Score a query file");
    eval->add_option("--queries", queries, "Query file (line-delimited JSON)")->required();
    eval->add_option("--report", report, "Where to write the JSON report")->required();

    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    serve->add_option("--addr", addr, "host:port to listen on");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return 2;
    }

    ConfigOverrides flags;
    if (!config_file.empty()) flags.config_file = config_file;
    if (!manifest.empty()) flags.manifest_path = manifest;
    if (!index.empty()) flags.index_path = index;
    if (!addr.empty()) flags.listen_addr = addr;
    flags.offline = offline;

    std::optional<std::size_t> k_flag;
    if (*query && k != -1) {
        if (k < 1) {
            err << "usage error: --k must be at least 1\n";
            return 2;
        }
        k_flag = static_cast<std::size_t>(k);
    }

    AppConfig config;
    try {
        config = resolve_config(flags, env);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    if (*ingest) return cmd_ingest(config, out, err, transport);
    if (*query) return cmd_query(config, question, k_flag, as_json, out, err, transport);
    if (*eval) return cmd_eval(config, queries, report, out, err, transport);
    if (*serve) return run_service(config, out, err, transport);
    return 2;
}

}  // namespace jurirag

#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "jurirag/cli.hpp"
#include "jurirag/file_io.hpp"
#include "jurirag/service.hpp"
#include "test_support.hpp"

using namespace jurirag;
using jurirag::testing::FakeTransport;
using jurirag::testing::TempDir;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliRun {
    int code = -1;
    std::string out;
    std::string err;
};

EnvLookup env_of(std::map<std::string, std::string> vars) {
    return [vars = std::move(vars)](const std::string& name) -> std::optional<std::string> {
        const auto it = vars.find(name);
        if (it == vars.end()) return std::nullopt;
        return it->second;
    };
}

CliRun cli(std::vector<std::string> args, HttpTransport& transport, const EnvLookup& env = env_of({})) {
    args.insert(args.begin(), "jurirag");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    CliRun r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err, transport, env);
    r.out = out.str();
    r.err = err.str();
    return r;
}

/// Fixture corpus ingested once into a scratch directory.
struct Ingested {
    TempDir dir;
    fs::path index = dir / "idx" / "fixture";
    std::string ingest_out;

    Ingested() {
        FakeTransport t;
        const auto r = cli({"--offline", "--manifest", jurirag::testing::fixture_manifest().string(),
                            "--index", index.string(), "ingest"},
                           t);
        EXPECT_EQ(r.code, 0) << r.err;
        ingest_out = r.out;
    }

    std::vector<std::string> base() const {
        return {"--offline", "--manifest", jurirag::testing::fixture_manifest().string(), "--index",
                index.string()};
    }

    AppConfig config() const {
        ConfigOverrides o;
        o.manifest_path = jurirag::testing::fixture_manifest();
        o.index_path = index;
        o.offline = true;
        return resolve_config(o, env_of({}));
    }
};

const Ingested& ingested() {
    static const Ingested i;
    return i;
}

std::vector<std::string> with(std::vector<std::string> a, std::initializer_list<std::string> more) {
    a.insert(a.end(), more);
    return a;
}

std::string read_all(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

const Engine& engine() {
    static FakeTransport t;
    static const Engine e(ingested().config(), t);
    return e;
}

}  // namespace

TEST(Config, Defaults) {
    const auto c = resolve_config({}, env_of({}));
    EXPECT_EQ(c.manifest_path, fs::path("corpus/manifest.jsonl"));
    EXPECT_EQ(c.pipeline.k, 5u);
    EXPECT_EQ(c.embedder.backend, EmbedBackend::reference);
    EXPECT_EQ(c.llm.api_key_env, "LLM_API_KEY");
    EXPECT_FALSE(c.offline);
}

TEST(Config, FlagsOverEnvOverFileOverDefaults) {
    TempDir tmp;
    write_file_atomic(tmp / "c.json", R"({"manifest": "file.jsonl", "index": "file-idx", "addr": "0.0.0.0:9000",
        "pipeline": {"k": 7}, "llm": {"endpoint": "http://file/llm", "model": "file-model"},
        "embedder": {"endpoint": "http://file/embed"}})");
    ConfigOverrides flags;
    flags.config_file = tmp / "c.json";
    auto c = resolve_config(flags, env_of({}));
    EXPECT_EQ(c.manifest_path, fs::path("file.jsonl"));
    EXPECT_EQ(c.pipeline.k, 7u);
    EXPECT_EQ(c.llm.model_name, "file-model");
    EXPECT_EQ(c.listen_addr, "0.0.0.0:9000");
    EXPECT_EQ(c.embedder.backend, EmbedBackend::remote);

    c = resolve_config(flags, env_of({{"LLM_MODEL", "env-model"}, {"LLM_ENDPOINT", "http://env/llm"}}));
    EXPECT_EQ(c.llm.model_name, "env-model");
    EXPECT_EQ(c.llm.endpoint, "http://env/llm");

    flags.manifest_path = "flag.jsonl";
    flags.k = 2;
    flags.offline = true;
    c = resolve_config(flags, env_of({{"LLM_MODEL", "env-model"}}));
    EXPECT_EQ(c.manifest_path, fs::path("flag.jsonl"));
    EXPECT_EQ(c.pipeline.k, 2u);
    EXPECT_TRUE(c.offline);
    EXPECT_EQ(c.embedder.backend, EmbedBackend::reference);

    EXPECT_TRUE(resolve_config({}, env_of({{"OFFLINE", "1"}})).offline);
    EXPECT_FALSE(resolve_config({}, env_of({{"OFFLINE", "0"}})).offline);

    write_file_atomic(tmp / "bad.json", "{not json");
    ConfigOverrides bad;
    bad.config_file = tmp / "bad.json";
    EXPECT_THROW(resolve_config(bad, env_of({})), Error);
    ConfigOverrides zero;
    zero.k = 0;
    EXPECT_THROW(resolve_config(zero, env_of({})), Error);
}

TEST(Config, ListenAddress) {
    const auto hp = parse_listen_addr("127.0.0.1:8080");
    EXPECT_EQ(hp.host, "127.0.0.1");
    EXPECT_EQ(hp.port, 8080);
    EXPECT_THROW(parse_listen_addr("localhost"), Error);
    EXPECT_THROW(parse_listen_addr("h:99999"), Error);
    EXPECT_THROW(parse_listen_addr("h:8o"), Error);
}

TEST(CliIngest, ReportsCounts) {
    const auto& out = ingested().ingest_out;
    EXPECT_NE(out.find("documents: 12\n"), std::string::npos) << out;
    EXPECT_NE(out.find("chunks: 30\n"), std::string::npos) << out;
    EXPECT_NE(out.find("structured: 18\n"), std::string::npos) << out;
    EXPECT_NE(out.find("unstructured: 12\n"), std::string::npos) << out;
    EXPECT_TRUE(fs::exists(ingested().index.parent_path()));
}

TEST(CliIngest, RebuildIsByteIdentical) {
    TempDir tmp;
    FakeTransport t;
    const auto idx = (tmp / "again").string();
    ASSERT_EQ(cli({"--offline", "--manifest", jurirag::testing::fixture_manifest().string(), "--index",
                   idx, "ingest"},
                  t)
                  .code,
              0);
    for (const auto& entry : fs::directory_iterator(ingested().index.parent_path())) {
        const auto name = entry.path().filename().string();
        const auto other = tmp.path() / ("again" + name.substr(std::string("fixture").size()));
        ASSERT_TRUE(fs::exists(other)) << name;
        EXPECT_EQ(read_all(entry.path()), read_all(other)) << name;
    }
}

TEST(CliIngest, ErrorExitCodes) {
    TempDir tmp;
    FakeTransport t;
    auto r = cli({"--offline", "--manifest", (tmp / "nope.jsonl").string(), "--index",
                  (tmp / "i").string(), "ingest"},
                 t);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("manifest not found"), std::string::npos);

    fs::copy(jurirag::testing::fixture_manifest().parent_path(), tmp / "corpus", fs::copy_options::recursive);
    const auto manifest = tmp / "corpus" / "manifest.jsonl";
    auto text = read_all(manifest);
    const auto second = text.find('\n') + 1;
    text += text.substr(second, text.find('\n', second) + 1 - second);  // duplicate first document
    write_file_atomic(manifest, text);
    r = cli({"--offline", "--manifest", manifest.string(), "--index", (tmp / "i").string(), "ingest"}, t);
    EXPECT_EQ(r.code, 3) << r.err;
    EXPECT_NE(r.err.find("validation failed"), std::string::npos);
    EXPECT_FALSE(fs::exists(tmp / "i.jrix"));
}

TEST(CliQuery, JsonSingleEntity) {
    FakeTransport t;
    const auto r = cli(with(ingested().base(), {"query", "--json", "What are Japan's AI governance guidelines?"}), t);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_EQ(j["route"], "PathB");
    EXPECT_EQ(j["entities"], json::array({"Japan"}));
    ASSERT_FALSE(j["contexts"].empty());
    for (const auto& c : j["contexts"]) EXPECT_EQ(c["entity"], "Japan");
    EXPECT_TRUE(j["answer"].is_string());
    EXPECT_EQ(j["citations"].size(), j["contexts"].size());
}

TEST(CliQuery, JsonComparisonCoverage) {
    FakeTransport t;
    auto r = cli(with(ingested().base(), {"query", "--json", "Compare the UK and Canada's approaches to AI regulation."}), t);
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = json::parse(r.out);
    EXPECT_EQ(j["route"], "PathC");
    EXPECT_EQ(j["entities_covered"], json::array({"Canada", "United Kingdom"}));
    EXPECT_TRUE(j["coverage_note"].is_null());

    r = cli(with(ingested().base(), {"query", "--json", "Compare India and Japan's national AI strategies."}), t);
    j = json::parse(r.out);
    EXPECT_TRUE(j["coverage_note"].is_string());
}

TEST(CliQuery, HumanReadableWithArticleRefs) {
    FakeTransport t;
    const auto r = cli(with(ingested().base(), {"query", "What does Article 17 of the GDPR say?"}), t);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("Sources:"), std::string::npos);
    EXPECT_NE(r.out.find("General Data Protection Regulation (2016), Article 17  <eu-gdpr#3>"), std::string::npos)
        << r.out;
}

TEST(CliQuery, UsageErrors) {
    FakeTransport t;
    EXPECT_EQ(cli(with(ingested().base(), {"query", "--k", "0", "What is Japan's strategy?"}), t).code, 2);
    EXPECT_EQ(cli(with(ingested().base(), {"query"}), t).code, 2);
    EXPECT_EQ(cli({"frobnicate"}, t).code, 2);
    EXPECT_EQ(cli(with(ingested().base(), {"query", "--k", "2", "--json", "What is Japan's strategy?"}), t).code, 0);
    TempDir tmp;
    const auto r = cli({"--offline", "--manifest", jurirag::testing::fixture_manifest().string(), "--index",
                        (tmp / "missing").string(), "query", "x"},
                       t);
    EXPECT_EQ(r.code, 1);
}

TEST(CliQuery, KOverride) {
    FakeTransport t;
    const auto r = cli(with(ingested().base(), {"query", "--json", "--k", "2", "What do transparency obligations require?"}), t);
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(json::parse(r.out)["contexts"].size(), 2u);
}

TEST(CliEval, WritesReportAndTables) {
    TempDir tmp;
    FakeTransport t;
    const auto report = tmp / "report.json";
    const auto r = cli(with(ingested().base(), {"eval", "--queries", jurirag::testing::fixture_queries().string(),
                                                "--report", report.string()}),
                       t);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("Avg. Faithfulness"), std::string::npos);
    const auto j = json::parse(read_all(report));
    EXPECT_EQ(j["records"].size(), 6u);
    EXPECT_EQ(j["aggregates"]["overall"]["n_faithfulness"], 5);

    const auto again = tmp / "again.json";
    cli(with(ingested().base(), {"eval", "--queries", jurirag::testing::fixture_queries().string(),
                                 "--report", again.string()}),
        t);
    EXPECT_EQ(read_all(report), read_all(again));
}

TEST(CliEval, UnwritableReport) {
    TempDir tmp;
    FakeTransport t;
    const auto report = tmp / "no" / "such" / "dir" / "report.json";
    const auto r = cli(with(ingested().base(), {"eval", "--queries", jurirag::testing::fixture_queries().string(),
                                                "--report", report.string()}),
                       t);
    EXPECT_EQ(r.code, 5) << r.err;
    EXPECT_FALSE(fs::exists(tmp / "no"));
}

TEST(Offline, NoNetworkEvenWithEndpointsConfigured) {
    TempDir tmp;
    FakeTransport fake([](const HttpRequest&) { return HttpResponse{200, "{}"}; });
    CountingTransport counting(fake);
    const auto env = env_of({{"LLM_ENDPOINT", "http://llm.invalid/v1"},
                             {"JUDGE_ENDPOINT", "http://judge.invalid/v1"},
                             {"EMBED_ENDPOINT", "http://embed.invalid/v1"}});
    const auto idx = (tmp / "i").string();
    const std::vector<std::string> base{"--offline", "--manifest",
                                        jurirag::testing::fixture_manifest().string(), "--index", idx};
    EXPECT_EQ(cli(with(base, {"ingest"}), counting, env).code, 0);
    EXPECT_EQ(cli(with(base, {"query", "Compare the UK and Canada's approaches to AI regulation."}), counting, env).code, 0);
    EXPECT_EQ(cli(with(base, {"query", "How is AI regulated?"}), counting, env).code, 0);
    EXPECT_EQ(cli(with(base, {"eval", "--queries", jurirag::testing::fixture_queries().string(), "--report",
                              (tmp / "r.json").string()}),
                  counting, env)
                  .code,
              0);
    EXPECT_EQ(counting.calls(), 0u);
    EXPECT_TRUE(fake.requests.empty());
}

TEST(LiveMode, UnreachableGeneratorStillPrintsContexts) {
    FakeTransport down;  // every request fails at the transport level
    std::vector<std::string> args{"--manifest", jurirag::testing::fixture_manifest().string(), "--index",
                                  ingested().index.string(), "query", "What are Japan's AI governance guidelines?"};
    const auto r = cli(args, down, env_of({{"LLM_ENDPOINT", "http://127.0.0.1:9/v1/chat/completions"}}));
    EXPECT_EQ(r.code, 4) << r.err;
    EXPECT_NE(r.out.find("jp-governance-guidelines"), std::string::npos) << r.out;
    EXPECT_FALSE(down.requests.empty());

    args.insert(args.end() - 1, "--json");
    const auto j = cli(args, down, env_of({{"LLM_ENDPOINT", "http://127.0.0.1:9/v1/chat/completions"}}));
    EXPECT_EQ(j.code, 4);
    const auto parsed = json::parse(j.out);
    EXPECT_TRUE(parsed["answer"].is_null());
    EXPECT_FALSE(parsed["contexts"].empty());
    EXPECT_TRUE(parsed.contains("error"));
}

TEST(LiveMode, ModelAnswerUsed) {
    FakeTransport llm([](const HttpRequest&) {
        return HttpResponse{200, R"({"choices":[{"message":{"content":"Japan relies on soft-law guidelines [1]."}}]})"};
    });
    const auto r = cli({"--manifest", jurirag::testing::fixture_manifest().string(), "--index",
                        ingested().index.string(), "query", "--json", "What are Japan's AI governance guidelines?"},
                       llm, env_of({{"LLM_ENDPOINT", "http://llm.local/v1"}}));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out)["answer"], "Japan relies on soft-law guidelines [1].");
    ASSERT_EQ(llm.requests.size(), 1u);
    EXPECT_NE(llm.requests[0].body.find("[1] Japan"), std::string::npos);
}

TEST(Engine, DimensionMismatchRejected) {
    auto c = ingested().config();
    c.embedder.dim = 64;
    FakeTransport t;
    try {
        Engine e(c, t);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
    }
}

TEST(ServiceHandlers, Health) {
    const auto r = handle_health(engine());
    EXPECT_EQ(r.status, 200);
    const auto j = json::parse(r.body);
    EXPECT_EQ(j["status"], "ok");
    EXPECT_EQ(j["chunks"], 30);
}

TEST(ServiceHandlers, BadRequests) {
    for (const std::string body : {"", "{", "[]", "{}", R"({"question": ""})", R"({"question": 5})",
                                   R"({"question": "x", "k": 0})", R"({"question": "x", "k": "3"})"}) {
        const auto r = handle_query(engine(), body);
        EXPECT_EQ(r.status, 400) << body;
        const auto j = json::parse(r.body);
        EXPECT_EQ(j["error"]["code"], "bad_request") << body;
        EXPECT_TRUE(j["error"]["message"].is_string());
    }
}

TEST(ServiceHandlers, ArticleQueryCarriesStructuralRefs) {
    const auto r = handle_query(engine(), R"({"question": "What does Article 17 of the GDPR say?"})");
    ASSERT_EQ(r.status, 200);
    const auto j = json::parse(r.body);
    EXPECT_EQ(j["route"], "PathA");
    ASSERT_EQ(j["citations"].size(), 2u);
    for (const auto& c : j["citations"]) EXPECT_EQ(c["structural_ref"], "Article 17");
}

TEST(ServiceHandlers, GeneratorDownIs503WithContexts) {
    auto c = ingested().config();
    c.offline = false;
    c.llm.endpoint = "http://127.0.0.1:9/v1";
    FakeTransport down;
    const Engine live(c, down);
    const auto r = handle_query(live, R"({"question": "What are Japan's AI governance guidelines?"})");
    EXPECT_EQ(r.status, 503);
    const auto j = json::parse(r.body);
    EXPECT_FALSE(j["contexts"].empty());
}

TEST(ServiceHandlers, SameResultAsCli) {
    const std::string q = "Compare the UK and Canada's approaches to AI regulation.";
    FakeTransport t;
    const auto c = cli(with(ingested().base(), {"query", "--json", q}), t);
    ASSERT_EQ(c.code, 0);
    const auto h = handle_query(engine(), json{{"question", q}}.dump());
    ASSERT_EQ(h.status, 200);
    EXPECT_EQ(json::parse(c.out), json::parse(h.body));
}

TEST(ServiceSocket, ServesOverHttp) {
    Service service(engine());
    const int port = service.bind("127.0.0.1", 0);
    ASSERT_GT(port, 0);
    std::thread server([&] { service.listen_after_bind(); });
    struct Joiner {
        Service& s;
        std::thread& t;
        ~Joiner() {
            s.stop();
            t.join();
        }
    } joiner{service, server};

    httplib::Client client("127.0.0.1", port);
    client.set_connection_timeout(5);
    auto health = client.Get("/v1/health");
    ASSERT_TRUE(health);
    EXPECT_EQ(health->status, 200);
    EXPECT_EQ(json::parse(health->body)["chunks"], 30);

    const std::string q = "What is Denmark's national AI strategy?";
    auto res = client.Post("/v1/query", json{{"question", q}, {"k", 3}}.dump(), "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    const auto j = json::parse(res->body);
    EXPECT_EQ(j["fallback_applied"], "eu_expansion");
    EXPECT_EQ(j["contexts"].size(), 3u);
    EXPECT_EQ(j, json::parse(handle_query(engine(), json{{"question", q}, {"k", 3}}.dump()).body));

    auto bad = client.Post("/v1/query", "{}", "application/json");
    ASSERT_TRUE(bad);
    EXPECT_EQ(bad->status, 400);

    // concurrent requests see identical results
    std::vector<std::thread> clients;
    std::atomic<int> mismatches{0};
    const auto expected = j;
    for (int i = 0; i < 4; ++i) {
        clients.emplace_back([&] {
            httplib::Client c("127.0.0.1", port);
            for (int n = 0; n < 3; ++n) {
                auto r = c.Post("/v1/query", json{{"question", q}, {"k", 3}}.dump(), "application/json");
                if (!r || json::parse(r->body) != expected) ++mismatches;
            }
        });
    }
    for (auto& c : clients) c.join();
    EXPECT_EQ(mismatches.load(), 0);
}

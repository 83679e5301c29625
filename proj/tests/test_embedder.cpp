#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include <nlohmann/json.hpp>

#include "jurirag/embedder.hpp"
#include "test_support.hpp"

using namespace jurirag;
using jurirag::testing::FakeTransport;
using nlohmann::json;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorCode::Io;
}

bool bit_equal(const Vector& a, const Vector& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

double cosine(const Vector& a, const Vector& b) { return dot(a, b) / (l2_norm(a) * l2_norm(b)); }

EmbedderConfig remote_config(std::size_t dim, std::size_t batch) {
    EmbedderConfig c;
    c.dim = dim;
    c.backend = EmbedBackend::remote;
    c.remote_endpoint = "http://embed.test/v1/embed";
    c.batch_size = batch;
    c.api_key = "secret";
    return c;
}

/// Service double returning unnormalized vectors [len(text), 1, 0, ...].
HttpResponse echo_lengths(const HttpRequest& req, std::size_t dim) {
    const auto body = json::parse(req.body);
    json vectors = json::array();
    for (const auto& t : body.at("texts")) {
        std::vector<double> v(dim, 0.0);
        v[0] = static_cast<double>(t.get<std::string>().size());
        if (dim > 1) v[1] = 1.0;
        vectors.push_back(v);
    }
    return {200, json{{"vectors", vectors}}.dump()};
}

}  // namespace

TEST(L2Normalize, AnalyticCases) {
    const auto v = l2_normalize(std::vector<float>{3.0f, 4.0f});
    EXPECT_NEAR(v[0], 0.6f, 1e-7);
    EXPECT_NEAR(v[1], 0.8f, 1e-7);
    const std::vector<float> unit{0.0f, 1.0f, 0.0f};
    EXPECT_TRUE(bit_equal(l2_normalize(unit), unit));
    EXPECT_EQ(code_of([] { l2_normalize(std::vector<float>{0.0f, 0.0f}); }), ErrorCode::ZeroVector);
}

TEST(L2Normalize, RandomVectorsHaveUnitNorm) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<float> u(-100.0f, 100.0f);
    for (int i = 0; i < 200; ++i) {
        std::vector<float> v(1 + i % 97);
        for (auto& x : v) x = u(rng);
        EXPECT_NEAR(l2_norm(l2_normalize(v)), 1.0, 1e-6);
    }
}

TEST(ReferenceEmbed, SingleTokenMatchesHashOracle) {
    // bucket and sign computed independently (FNV-1a over seed bytes then
    // token bytes, splitmix64 finalizer): governance/0 -> +709,
    // governance/7 -> -482, japan/0 -> -480
    auto v = reference_embed("Governance.", 768, 0);
    for (std::size_t d = 0; d < 768; ++d) EXPECT_EQ(v[d], d == 709 ? 1.0f : 0.0f) << d;
    v = reference_embed("governance", 768, 7);
    EXPECT_EQ(v[482], -1.0f);
    v = reference_embed("Japan's", 768, 0);
    EXPECT_EQ(v[480], -1.0f);
}

TEST(ReferenceEmbed, DeterministicAndBagOfTokens) {
    const std::string s = "the provider shall document the risk management system for every model";
    EXPECT_TRUE(bit_equal(reference_embed(s, 768, 0), reference_embed(s, 768, 0)));
    std::vector<std::string> tokens{"the", "provider", "shall", "document", "the", "risk",
                                    "management", "system", "for", "every"};
    const auto joined = [](const std::vector<std::string>& t) {
        std::string out;
        for (const auto& w : t) out += w + " ";
        return out;
    };
    const auto base = reference_embed(joined(tokens), 768, 0);
    std::mt19937 rng(11);
    for (int i = 0; i < 20; ++i) {
        std::shuffle(tokens.begin(), tokens.end(), rng);
        EXPECT_TRUE(bit_equal(reference_embed(joined(tokens), 768, 0), base));
    }
    EXPECT_FALSE(bit_equal(reference_embed(s, 768, 1), reference_embed(s, 768, 0)));
}

TEST(ReferenceEmbed, EmptyAfterTokenizationIsZeroVector) {
    EXPECT_EQ(code_of([] { reference_embed("   \n\t ", 64, 0); }), ErrorCode::ZeroVector);
    EXPECT_EQ(code_of([] { reference_embed("text", 0, 0); }), ErrorCode::InvalidArgument);
}

TEST(ReferenceEmbed, NearDuplicateCloserThanUnrelated) {
    const std::string a = "Personal data shall be processed lawfully, fairly and in a transparent manner.";
    const std::string near = a + " Always.";
    const std::string unrelated = "Die Strategie setzt auf Forschung und Transfer in die Wirtschaft.";
    const auto va = reference_embed(a, 768, 0);
    EXPECT_GT(cosine(va, reference_embed(near, 768, 0)), cosine(va, reference_embed(unrelated, 768, 0)));
}

TEST(ReferenceEmbed, DistinctFixtureSentencesFrozenSimilarity) {
    const ReferenceEmbedder e(768, 0);
    const auto a = e.embed("What are Japan's AI governance guidelines?");
    const auto b = e.embed("The guidelines follow a risk-based and agile governance approach.");
    const double cos = dot(a, b);
    EXPECT_LT(cos, 1.0);
    // shared tokens: "guidelines" and "governance" (2 of 6 and 2 of 9)
    EXPECT_NEAR(cos, 2.0 / std::sqrt(6.0 * 9.0), 1e-6);
}

TEST(EmbedBatch, RejectsEmptyTextAndKeepsOrder) {
    const ReferenceEmbedder e(32, 0);
    const std::vector<std::string> texts{"alpha", "beta gamma", "alpha"};
    const auto out = e.embed_batch(texts);
    ASSERT_EQ(out.size(), 3u);
    EXPECT_TRUE(bit_equal(out[0], out[2]));
    EXPECT_TRUE(bit_equal(out[1], reference_embed("beta gamma", 32, 0)));
    for (const auto& v : out) EXPECT_NEAR(l2_norm(v), 1.0, 1e-6);
    EXPECT_EQ(code_of([&] { e.embed_batch(std::vector<std::string>{"ok", ""}); }), ErrorCode::EmptyText);
    EXPECT_EQ(code_of([] { embed_batch(std::vector<std::string>{""}, EmbedderConfig{}); }),
              ErrorCode::EmptyText);
}

TEST(EmbedderConfig, Validation) {
    EmbedderConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.dim, 768u);
    EXPECT_EQ(c.batch_size, 32u);
    c.dim = 0;
    EXPECT_THROW(c.validate(), Error);
    c = {};
    c.batch_size = 0;
    EXPECT_THROW(c.validate(), Error);
    c = {};
    c.backend = EmbedBackend::remote;
    EXPECT_THROW(c.validate(), Error);
}

TEST(RemoteEmbedder, BatchesSequentiallyAndNormalizes) {
    FakeTransport t([](const HttpRequest& r) { return echo_lengths(r, 4); });
    const RemoteEmbedder e(remote_config(4, 2), t);
    std::vector<std::string> texts{"a", "bb", "ccc", "dddd", "eeeee"};
    const auto out = e.embed_batch(texts);
    ASSERT_EQ(t.requests.size(), 3u);
    EXPECT_EQ(json::parse(t.requests[0].body).at("texts"), json({"a", "bb"}));
    EXPECT_EQ(json::parse(t.requests[2].body).at("texts"), json({"eeeee"}));
    EXPECT_EQ(t.requests[0].url, "http://embed.test/v1/embed");
    const auto& headers = t.requests[0].headers;
    EXPECT_NE(std::find(headers.begin(), headers.end(),
                        std::pair<std::string, std::string>{"Authorization", "Bearer secret"}),
              headers.end());
    ASSERT_EQ(out.size(), 5u);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double len = static_cast<double>(i + 1);
        EXPECT_NEAR(out[i][0], len / std::sqrt(len * len + 1.0), 1e-6);
        EXPECT_NEAR(l2_norm(out[i]), 1.0, 1e-6);
    }
}

TEST(RemoteEmbedder, ErrorsAreDistinct) {
    const std::vector<std::string> texts{"one", "two"};
    {
        FakeTransport t;  // no handler: transport failure
        const RemoteEmbedder e(remote_config(4, 8), t);
        EXPECT_EQ(code_of([&] { e.embed_batch(texts); }), ErrorCode::Transport);
    }
    {
        FakeTransport t([](const HttpRequest&) { return HttpResponse{503, "busy"}; });
        const RemoteEmbedder e(remote_config(4, 8), t);
        EXPECT_EQ(code_of([&] { e.embed_batch(texts); }), ErrorCode::HttpStatus);
    }
    {
        FakeTransport t([](const HttpRequest& r) { return echo_lengths(r, 3); });
        const RemoteEmbedder e(remote_config(4, 8), t);
        EXPECT_EQ(code_of([&] { e.embed_batch(texts); }), ErrorCode::DimensionMismatch);
    }
    {
        FakeTransport t([](const HttpRequest&) {
            return HttpResponse{200, R"({"vectors": [[1, 0, 0, 0]]})"};
        });
        const RemoteEmbedder e(remote_config(4, 8), t);
        EXPECT_EQ(code_of([&] { e.embed_batch(texts); }), ErrorCode::LengthMismatch);
    }
    {
        FakeTransport t([](const HttpRequest&) { return HttpResponse{200, "<html>"}; });
        const RemoteEmbedder e(remote_config(4, 8), t);
        EXPECT_EQ(code_of([&] { e.embed_batch(texts); }), ErrorCode::BadFormat);
    }
    {
        FakeTransport t([](const HttpRequest&) {
            return HttpResponse{200, R"({"vectors": [[0, 0, 0, 0], [1, 0, 0, 0]]})"};
        });
        const RemoteEmbedder e(remote_config(4, 8), t);
        EXPECT_EQ(code_of([&] { e.embed_batch(texts); }), ErrorCode::ZeroVector);
    }
}

TEST(MakeEmbedder, SelectsBackend) {
    const auto ref = make_embedder(EmbedderConfig{}, nullptr);
    EXPECT_EQ(ref->dim(), 768u);
    FakeTransport t([](const HttpRequest& r) { return echo_lengths(r, 4); });
    const auto remote = make_embedder(remote_config(4, 1), &t);
    remote->embed("x");
    EXPECT_EQ(t.requests.size(), 1u);
    EXPECT_THROW(make_embedder(remote_config(4, 1), nullptr), Error);
}

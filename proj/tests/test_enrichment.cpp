#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "bugenrich/corpus.hpp"
#include "bugenrich/enrichment.hpp"
#include "bugenrich/error.hpp"

using namespace bugenrich;

namespace {

std::vector<VocabularyEntry> hover_vocabulary() {
    return {{"Javadoc", "Documentation generated for Java code", VocabSource::glossary},
            {"BindingLinkedLabelComposer", "Used for composing labels", VocabSource::api_doc},
            {"Annotation", "Describes an annotation object", VocabSource::glossary},
            {"Null-analysis", "Java library for analyzing null data", VocabSource::glossary},
            {"Module", "A unit of Java code", VocabSource::glossary}};
}

ProviderChain chain_of(std::span<const VocabularyEntry> entries) {
    ProviderChain c;
    c.add(std::make_shared<VocabularyIndex>(entries));
    return c;
}

// Counts calls and answers from a fixed map.
class CountingProvider final : public ExplanationProvider {
public:
    explicit CountingProvider(std::string answer) : answer_(std::move(answer)) {}
    std::optional<std::string> explain(const std::string&) const override {
        ++calls;
        return answer_;
    }
    std::string_view name() const noexcept override { return "counting"; }
    mutable std::atomic<int> calls{0};

private:
    std::string answer_;
};

// Local HTTP stub for the remote protocol.
class StubServer {
public:
    explicit StubServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
        server_.Post("/explain", [handler](const httplib::Request& req, httplib::Response& res) { handler(req, res); });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer() {
        server_.stop();
        thread_.join();
    }
    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/explain"; }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

}  // namespace

TEST(VocabularyIndex, LookupOrder) {
    const std::vector<VocabularyEntry> v{{"java.io", "Provides for system input and output", VocabSource::api_doc},
                                         {"thread", "unit of execution", VocabSource::glossary}};
    const VocabularyIndex index(v);
    EXPECT_EQ(lookup_explanation("java.io", index), "Provides for system input and output");
    EXPECT_EQ(lookup_explanation("Java.IO", index), "Provides for system input and output");
    EXPECT_EQ(lookup_explanation("threads", index), "unit of execution");
    EXPECT_EQ(lookup_explanation("qwerty123", index), std::nullopt);
}

TEST(FindTerm, WholeWordCaseInsensitiveFlexibleSeparators) {
    EXPECT_EQ(find_term("the Javadoc hover", "javadoc"), (std::pair<std::size_t, std::size_t>{4, 11}));
    EXPECT_EQ(find_term("javadocs", "javadoc"), std::nullopt);
    EXPECT_EQ(find_term("enabled annotation based null analysis", "Null-analysis"),
              (std::pair<std::size_t, std::size_t>{25, 38}));
    EXPECT_EQ(find_term("java.io.File", "java.io"), (std::pair<std::size_t, std::size_t>{0, 7}));
}

TEST(EnrichText, JavadocExample) {
    const std::vector<VocabularyEntry> v{{"Javadoc", "documentation generated for Java code", VocabSource::glossary}};
    const std::vector<std::string> terms{"Javadoc"};
    const auto e = enrich_text("r", "Javadoc hovers fail", terms, chain_of(v));
    EXPECT_EQ(e.enriched_text, "Javadoc (documentation generated for Java code) hovers fail");
    EXPECT_EQ(e.original_text(), "Javadoc hovers fail");
}

TEST(EnrichText, HoverReportReconstruction) {
    const std::string original =
        "When I enabled annotation based null analysis, Javadoc hovers use BindingLinkedLabelComposer. In that "
        "context, Javadoc hover for a module does not show the module name because the BindingLinkedLabelComposer "
        "knows nothing about modules.";
    const std::vector<std::string> terms{"Javadoc", "BindingLinkedLabelComposer", "Annotation", "Null-analysis",
                                         "Module"};
    const auto v = hover_vocabulary();
    const auto e = enrich_text("r", original, terms, chain_of(v));
    const std::string expected =
        "When I enabled annotation (Describes an annotation object) based null analysis (Java library for analyzing "
        "null data), Javadoc (Documentation generated for Java code) hovers use BindingLinkedLabelComposer (Used for "
        "composing labels). In that context, Javadoc hover for a module (A unit of Java code) does not show the module "
        "name because the BindingLinkedLabelComposer knows nothing about modules.";
    EXPECT_EQ(e.enriched_text, expected);
    EXPECT_EQ(e.explained_terms.size(), 5u);
    EXPECT_TRUE(e.unexplained_terms.empty());
    EXPECT_EQ(e.original_text(), original);
}

TEST(EnrichText, EmptyTermsIsIdentity) {
    const auto e = enrich_text("r", "some text", {}, chain_of(hover_vocabulary()));
    EXPECT_EQ(e.enriched_text, "some text");
    EXPECT_TRUE(e.insertions.empty());
}

TEST(EnrichText, AbsentTermGoesToGlossary) {
    const std::vector<VocabularyEntry> v{{"nullanalysis", "static null checking", VocabSource::glossary}};
    const std::vector<std::string> terms{"nullanalysis"};
    const auto e = enrich_text("r", "NPE on save", terms, chain_of(v));
    EXPECT_EQ(e.enriched_text, "NPE on save\nGlossary: nullanalysis \xE2\x80\x94 static null checking");
    EXPECT_EQ(e.original_text(), "NPE on save");
}

TEST(EnrichText, UnexplainedTermsAreListed) {
    const std::vector<std::string> terms{"qwerty", "Javadoc", "Javadoc"};
    const auto e = enrich_text("r", "Javadoc", terms, chain_of(hover_vocabulary()));
    EXPECT_EQ(e.unexplained_terms, (std::vector<std::string>{"qwerty"}));
    EXPECT_EQ(e.explained_terms.size(), 1u);
    EXPECT_EQ(e.enriched_text, "Javadoc (Documentation generated for Java code)");
}

TEST(EnrichReport, RecordSplitsAtSummaryBoundary) {
    BugReport r{"r1", "Javadoc broken", "hover on module", 1, std::nullopt, std::nullopt, "p", std::nullopt};
    const std::vector<std::string> terms{"javadoc", "module"};
    const auto v = hover_vocabulary();
    const auto e = enrich_report(r, terms, chain_of(v));
    const auto rec = to_enriched_record(r, e);
    EXPECT_EQ(rec.summary, "Javadoc (Documentation generated for Java code) broken");
    EXPECT_EQ(rec.description, "hover on module (A unit of Java code)");
    ASSERT_TRUE(rec.explained_terms);
    EXPECT_EQ(rec.explained_terms->size(), 2u);
    EXPECT_EQ(rec.text(), e.enriched_text);
}

TEST(EnrichReport, TermEndingSummaryStaysInSummary) {
    BugReport r{"r1", "Broken Javadoc", "hover", 1, std::nullopt, std::nullopt, "p", std::nullopt};
    const std::vector<std::string> terms{"javadoc"};
    const auto rec = to_enriched_record(r, enrich_report(r, terms, chain_of(hover_vocabulary())));
    EXPECT_EQ(rec.summary, "Broken Javadoc (Documentation generated for Java code)");
    EXPECT_EQ(rec.description, "hover");
}

TEST(ProviderChain, VocabularyHitSuppressesLaterProvider) {
    const auto v = hover_vocabulary();
    auto counting = std::make_shared<CountingProvider>("fallback");
    ProviderChain chain;
    chain.add(std::make_shared<VocabularyIndex>(v));
    chain.add(counting);
    EXPECT_EQ(chain.explain("Javadoc"), "Documentation generated for Java code");
    EXPECT_EQ(counting->calls.load(), 0);
    EXPECT_EQ(chain.explain("unknownterm"), "fallback");
    EXPECT_EQ(counting->calls.load(), 1);
}

TEST(RemoteProtocol, RequestBodyShape) {
    EXPECT_EQ(explanation_request_body("JVM"), R"({"prompt":"explain the technical term: JVM","term":"JVM"})");
    EXPECT_EQ(parse_explanation_response(R"({"explanation":"  a   b "})"), "a b");
    EXPECT_EQ(parse_explanation_response(R"({"explanation":"   "})"), std::nullopt);
    EXPECT_THROW(parse_explanation_response("[1]"), ParseError);
    EXPECT_THROW(parse_explanation_response("nope"), ParseError);
}

TEST(RemoteProtocol, StubServerEcho) {
    StubServer server([](const httplib::Request& req, httplib::Response& res) {
        const auto body = nlohmann::json::parse(req.body);
        res.set_content(nlohmann::json{{"explanation", "about " + body["term"].get<std::string>()}}.dump(),
                        "application/json");
    });
    RemoteExplainer remote({server.endpoint(), 5.0, 1});
    EXPECT_EQ(remote.explain("jvm"), "about jvm");
    EXPECT_EQ(remote.explain("jvm"), "about jvm");  // cached
    EXPECT_EQ(remote.calls(), 2u);
    EXPECT_EQ(remote.requests(), 1u);
    EXPECT_EQ(remote.warnings(), 0u);
}

TEST(RemoteProtocol, EmptyExplanationIsAbsent) {
    StubServer server([](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"explanation":""})", "application/json");
    });
    RemoteExplainer remote({server.endpoint(), 5.0, 1});
    EXPECT_EQ(remote.explain("x"), std::nullopt);
}

TEST(RemoteProtocol, RetriesOnceThenSucceeds) {
    std::atomic<int> hits{0};
    StubServer server([&](const httplib::Request&, httplib::Response& res) {
        if (hits++ == 0) {
            res.status = 500;
            return;
        }
        res.set_content(R"({"explanation":"second try"})", "application/json");
    });
    RemoteExplainer remote({server.endpoint(), 5.0, 1});
    EXPECT_EQ(remote.explain("x"), "second try");
    EXPECT_EQ(remote.requests(), 2u);
}

TEST(RemoteProtocol, UnreachableEndpointDegradesWithWarning) {
    // Bind then release a port so nothing is listening on it.
    int port;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }
    RemoteExplainer remote({"http://127.0.0.1:" + std::to_string(port) + "/explain", 0.5, 1});
    testing::internal::CaptureStderr();
    EXPECT_EQ(remote.explain("x"), std::nullopt);
    const auto log = testing::internal::GetCapturedStderr();
    EXPECT_NE(log.find("[warn]"), std::string::npos);
    EXPECT_EQ(remote.warnings(), 1u);
    EXPECT_EQ(remote.requests(), 2u);
}

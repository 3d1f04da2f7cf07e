#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "pri/config.hpp"
#include "pri/error.hpp"
#include "pri/report.hpp"
#include "pri/runner.hpp"

using namespace pri;

namespace {

const std::string kRoot = PRI_SOURCE_DIR;

CampaignConfig small_campaign(std::uint64_t seed) {
    CampaignConfig c = campaign_from_entries(parse_config_file(kRoot + "/configs/campaign.conf"));
    c.master_seed = seed;
    c.scripts_per_topic = 1;
    c.repetitions = 6;
    c.train_repetitions = 2;
    c.hygiene_sessions = 4;
    return c;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("the example script runs with unclicked probes") {
    const auto script = parse_script_file(kRoot + "/data/examples/table4_location.script");
    const auto cats = default_categories();
    const auto kw = default_keywords();
    EngineConfig ec;
    const auto pools = build_ad_pools(kw, cats, ec, 7);
    Engine engine(ec, pools, cats, kw);
    const TermFilter filter;
    const auto policy = ClickPolicy::for_keywords(kw.at("location"), filter);
    QueryScript s = script;
    s.topic = "location";
    const auto trace = run_session(engine, s, policy, "example", filter);
    CHECK(trace.interactions.size() == script.query_count());
    CHECK(trace.probes().size() == 4);
    std::size_t clicks = 0;
    for (std::size_t i = 0; i < trace.interactions.size(); ++i) {
        const auto& it = trace.interactions[i];
        CHECK(it.step == i + 1);
        if (it.is_probe) CHECK(it.clicked.empty());
        clicks += it.clicked.size();
    }
    CHECK(clicks > 0);
    CHECK_NOTHROW(validate_trace(trace));
}

TEST_CASE("run_session checks the script topic and handles scripts without probes") {
    const auto cats = default_categories();
    const auto kw = default_keywords();
    EngineConfig ec;
    const auto pools = build_ad_pools(kw, cats, ec, 7);
    const TermFilter filter;
    const auto policy = ClickPolicy::for_keywords(kw.at("gay"), filter);
    QueryScript s;
    s.entries = {{EntryKind::query, "gay bars", 0}, {EntryKind::wait, "", 3}, {EntryKind::query, "gay pride", 0}};
    {
        Engine engine(ec, pools, cats, kw);
        CHECK_THROWS_AS(run_session(engine, s, policy, "x", filter), ValidationError);
    }
    s.topic = "nosuch";
    {
        Engine engine(ec, pools, cats, kw);
        CHECK_THROWS_AS(run_session(engine, s, policy, "x", filter), ValidationError);
    }
    s.topic = "gay";
    Engine engine(ec, pools, cats, kw);
    const auto trace = run_session(engine, s, policy, "x", filter);
    CHECK(trace.interactions.size() == 2);
    CHECK(trace.probes().empty());
}

TEST_CASE("session planning splits by repetition with derived seeds") {
    const auto c = small_campaign(5);
    const auto specs = plan_sessions(c);
    CHECK(specs.size() == 12 * 6);
    std::set<std::string> ids;
    std::set<std::uint64_t> seeds;
    std::size_t train = 0;
    for (const auto& s : specs) {
        ids.insert(s.id);
        seeds.insert(s.seed);
        CHECK(s.training == (s.repetition < 2));
        train += s.training;
    }
    CHECK(ids.size() == specs.size());
    CHECK(seeds.size() == specs.size());
    CHECK(train == 12 * 2);
}

TEST_CASE("campaign reports have one row per reference topic") {
    const auto c = small_campaign(3);
    const auto r = run_campaign(c);
    CHECK(r.training.size() == 24);
    CHECK(r.testing.size() == 48);
    CHECK(r.evaluation.heatmap.size() == 12);
    CHECK(r.evaluation.confusion.topics.size() == 11);
    CHECK(r.evaluation.confusion.sensitivity.sensitive_sessions == 44);
    CHECK(r.evaluation.confusion.sensitivity.other_sessions == 4);
    for (const auto& t : r.evaluation.confusion.topics) {
        CHECK(t.true_detect_rate() + t.false_other_rate() == doctest::Approx(1.0));
        CHECK(t.true_other_rate() + t.false_detect_rate() == doctest::Approx(1.0));
    }
    CHECK_NOTHROW(audit_split(r));

    std::ostringstream topics;
    write_topics(topics, r.evaluation, c.categories, ReportFormat::csv);
    std::size_t lines = 0;
    for (char ch : topics.str()) lines += ch == '\n';
    CHECK(lines == 12);
}

TEST_CASE("the leakage audit catches contaminated splits") {
    const auto c = small_campaign(4);
    auto r = run_campaign(c);
    auto leaked = r;
    leaked.model_sessions.insert(r.testing.front().session_id);
    CHECK_THROWS_AS(audit_split(leaked), ValidationError);
    auto dup = r;
    dup.testing.push_back(r.training.front());
    CHECK_THROWS_AS(audit_split(dup), ValidationError);
}

TEST_CASE("campaigns are reproducible and independent of thread count") {
    auto c = small_campaign(9);
    const auto a = run_campaign(c);
    c.threads = 4;
    const auto b = run_campaign(c);
    std::ostringstream ca, cb;
    write_capture(ca, a.testing);
    write_capture(cb, b.testing);
    CHECK(ca.str() == cb.str());
    std::ostringstream ma, mb;
    write_model(ma, a.model);
    write_model(mb, b.model);
    CHECK(ma.str() == mb.str());

    c.master_seed = 10;
    const auto other = run_campaign(c);
    std::ostringstream co;
    write_capture(co, other.testing);
    CHECK(co.str() != ca.str());
}

TEST_CASE("report bundles are byte-identical for the same seed") {
    namespace fs = std::filesystem;
    const auto c = small_campaign(2);
    const auto base = fs::temp_directory_path() / "pri_bundle_test";
    fs::remove_all(base);
    for (const char* sub : {"a", "b"}) {
        const auto r = run_campaign(c);
        ReportExtras extras;
        extras.hygiene = run_hygiene(c, r.model, r.baseline);
        write_campaign_bundle((base / sub).string(), c, r, extras);
    }
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(base / "a")) {
        ++files;
        CHECK_MESSAGE(slurp(entry.path()) == slurp(base / "b" / entry.path().filename()), entry.path());
    }
    CHECK(files >= 10);
    const auto summary = slurp(base / "a" / "summary.md");
    CHECK(summary.find("Per-topic detection") != std::string::npos);
    fs::remove_all(base);
}

TEST_CASE("evaluate rejects incomplete sessions and unknown topics") {
    const auto c = small_campaign(6);
    const auto r = run_campaign(c);
    auto traces = r.testing;
    traces[0].topic = "nosuch";
    CHECK_THROWS_AS(evaluate(r.model, r.baseline, traces, c.detector), ValidationError);
    traces = r.testing;
    auto& its = traces[0].interactions;
    std::vector<Interaction> kept;
    std::size_t probes = 0;
    for (auto& it : its)
        if (!it.is_probe || ++probes <= 2) kept.push_back(it);
    its = kept;
    CHECK_THROWS_AS(evaluate(r.model, r.baseline, traces, c.detector), ValidationError);
}

TEST_CASE("config files resolve includes, overrides and errors") {
    const auto entries = parse_config_file(kRoot + "/configs/google-like.conf");
    const auto c = campaign_from_entries(entries);
    CHECK(c.engine.adaptation_lag == 1);
    CHECK(c.engine.pool_diversity == 3.3);
    CHECK_FALSE(c.engine.fill_slots);
    CHECK(c.engine.prior_knowledge == std::map<std::string, double>{{"other", 1.0}});
    REQUIRE(c.engine.shared_pools.size() == 2);
    CHECK(c.engine.shared_pools[0].members == std::vector<std::string>{"bankrupt", "payday"});
    CHECK(c.engine.shared_pools[0].weight == 0.3);

    const auto bing = campaign_from_entries(parse_config_file(kRoot + "/configs/campaign-bing.conf"));
    CHECK(bing.engine.adaptation_lag == 7);
    CHECK(bing.engine.fill_slots);
    CHECK(bing.repetitions == 7);

    auto later = parse_config_text("engine.adaptation_lag = 2\nengine.adaptation_lag = 4 # last wins\n", "t");
    CHECK(campaign_from_entries(later).engine.adaptation_lag == 4);

    const auto probes = campaign_from_entries(parse_config_text("campaign.probe.gay = where to go\n", "t"));
    CHECK(probes.probe_for("gay") == "where to go");
    CHECK(probes.probe_for("diabetes") == "symptoms and causes");
    CHECK(probes.probe_for("divorce") == "help and advice");

    auto message = [](const std::string& text) {
        try {
            campaign_from_entries(parse_config_text(text, "cfg"));
        } catch (const ValidationError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("\n\nengine.nosuch = 1\n") == "cfg:3: engine.nosuch: unknown key");
    CHECK(message("engine.click_boost = lots\n").find("cfg:1: engine.click_boost") == 0);
    CHECK(message("just words\n").find("cfg:1") == 0);
    CHECK(message("engine.shared_pool = bankrupt payday\n").find("engine.shared_pool") != std::string::npos);
    CHECK(message("engine.click_boost = 0.5\n").find("click_boost") != std::string::npos);
    CHECK(message("campaign.probe.nosuch = x\n").find("nosuch") != std::string::npos);
    CHECK(message("include does/not/exist.conf\n").find("cannot open") != std::string::npos);
}

TEST_CASE("every documented config key is accepted") {
    for (const auto& key : known_config_keys()) {
        if (key.find('<') != std::string::npos || key.rfind("campaign.keywords", 0) == 0 ||
            key == "campaign.trending" || key == "campaign.catchall")
            continue;
        CampaignConfig c;
        std::string value = "1";
        if (key == "engine.prior") value = "other:1";
        if (key == "engine.shared_pool") value = "bankrupt payday : 0.2";
        if (key == "engine.shared_pools") value = "none";
        if (key == "campaign.hygiene_probes" || key == "campaign.default_probe") value = "help and advice";
        CHECK_NOTHROW(apply_setting(c, {key, value, "t:1"}));
    }
}

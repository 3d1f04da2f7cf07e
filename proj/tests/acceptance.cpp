// Acceptance checks, one PASS/FAIL line per criterion. An optional first
// argument overrides the master seed of the campaign criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <thread>
#include <string>
#include <vector>

#include "pri/config.hpp"
#include "pri/estimator.hpp"
#include "pri/probes.hpp"
#include "pri/report.hpp"
#include "pri/runner.hpp"
#include "support/synthetic.hpp"

using namespace pri;

namespace {

namespace fs = std::filesystem;

const std::string kRoot = PRI_SOURCE_DIR;
constexpr std::uint64_t kDefaultSeed = 1;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

CampaignConfig load(const std::string& file, std::uint64_t seed) {
    auto c = campaign_from_entries(parse_config_file(kRoot + "/configs/" + file));
    c.master_seed = seed;
    c.threads = std::max(1u, std::thread::hardware_concurrency());
    return c;
}

Outcome golden() {
    Outcome o;
    const auto t0 = Clock::now();
    const CategorySet cats({"prostate"}, "other");
    const auto m = train(load_corpus_file(kRoot + "/data/examples/worked_corpus.tsv", cats), cats, TermFilter());
    const auto& ex = *m.exact_stats();
    struct Cell {
        const char* term;
        Rational total, prostate, other;
    };
    const Rational z(0), q512(5, 12), q16(1, 6), q14(1, 4);
    const std::vector<Cell> table{
        {"prostat", q512, q512, z}, {"cancer", q512, q512, z},  {"possibl", q16, q16, z},
        {"risk", q512, q16, q14},   {"learn", q16, q16, z},     {"here", q16, q16, z},
        {"suffer", q512, q14, q16}, {"treat", q512, q14, q16},  {"diabet", q512, z, q512},
        {"discov", q512, z, q512},  {"revers", q16, z, q16},    {"natur", q16, z, q16},
        {"lifetim", q14, z, q14}};
    o.require(m.dictionary().size() == table.size(), "dictionary size");
    for (const auto& cell : table) {
        const auto id = m.dictionary().find(cell.term);
        if (!id) {
            o.require(false, std::string("missing term ") + cell.term);
            continue;
        }
        o.require(ex.total[*id] == cell.total, std::string("total[") + cell.term + "]");
        o.require(ex.per_category[0][*id] == cell.prostate, std::string("prostate[") + cell.term + "]");
        o.require(ex.per_category[1][*id] == cell.other, std::string("other[") + cell.term + "]");
    }
    const auto s = score_exact(m, {{"patient choose safer treatment here", 0}});
    o.require(s[0] == Rational(8, 25), "M(prostate) != 8/25");
    o.require(s[1] == Rational(2, 25), "M(other) != 2/25");
    const double t = seconds_since(t0);
    o.require(t < 1.0, "runtime " + fmt("%.3fs", t));
    if (o.pass) o.detail = "M(prostate)=8/25 M(other)=2/25, 39 table cells exact, " + fmt("%.3fs", t);
    return o;
}

Outcome oracle() {
    Outcome o;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(20140101);
    const TermFilter filter;
    double worst = 0;
    for (int i = 0; i < 200; ++i) {
        const auto sc = testing::make_synthetic(rng, 5, 30, 40);
        const auto m = train(sc.corpus, sc.categories, filter);
        o.require(m.dictionary().size() <= 40, "dictionary too large");
        const auto fast = score(m, sc.page).scores;
        const auto slow = testing::brute_force_score(sc, filter);
        for (std::size_t c = 0; c < fast.size(); ++c) worst = std::max(worst, std::abs(fast[c] - slow[c]));
    }
    const double t = seconds_since(t0);
    o.require(worst <= 1e-12, "max deviation " + fmt("%.3g", worst));
    o.require(t < 10.0, "runtime " + fmt("%.2fs", t));
    if (o.pass) o.detail = "200 cases, max |diff| " + fmt("%.3g", worst) + ", " + fmt("%.2fs", t);
    return o;
}

Outcome detection(const CampaignConfig& c, const CampaignResult& r, double runtime) {
    Outcome o;
    const auto& ev = r.evaluation;
    const auto& s = ev.confusion.sensitivity;
    std::vector<std::size_t> per_topic(c.categories.size(), 0);
    for (auto t : ev.truth) ++per_topic[t];
    for (std::size_t t = 0; t < per_topic.size(); ++t)
        o.require(per_topic[t] >= 10, c.categories.labels()[t] + " has " + std::to_string(per_topic[t]) + " test sessions");
    o.require(c.detector.session_probe_count == 5, "session rule is not 5 probes");
    o.require(s.detection_rate() >= 0.95, "detection " + fmt("%.3f", s.detection_rate()));
    o.require(s.false_positive_rate() <= 0.05, "false positives " + fmt("%.3f", s.false_positive_rate()));
    double min_td = 1, max_fo = 0;
    for (std::size_t i = 0; i < ev.confusion.topics.size(); ++i) {
        const auto& t = ev.confusion.topics[i];
        min_td = std::min(min_td, t.true_detect_rate());
        max_fo = std::max(max_fo, t.false_other_rate());
        o.require(t.true_detect_rate() >= 0.90, c.categories.sensitive()[i] + " true detect " + fmt("%.3f", t.true_detect_rate()));
        o.require(t.false_other_rate() <= 0.10, c.categories.sensitive()[i] + " false other " + fmt("%.3f", t.false_other_rate()));
    }
    o.require(runtime < 120.0, "runtime " + fmt("%.1fs", runtime));
    if (o.pass)
        o.detail = "detection " + fmt("%.1f%%", 100 * s.detection_rate()) + ", FP " +
                   fmt("%.1f%%", 100 * s.false_positive_rate()) + ", min TD " + fmt("%.1f%%", 100 * min_td) +
                   ", max FO " + fmt("%.1f%%", 100 * max_fo) + ", " + fmt("%.2fs", runtime);
    return o;
}

Outcome confusion(const CampaignConfig& c, const CampaignResult& r) {
    Outcome o;
    const auto& h = r.evaluation.heatmap;
    const auto p = c.categories.require_index("payday");
    const auto b = c.categories.require_index("bankrupt");
    bool linked = false;
    for (const auto& sp : c.engine.shared_pools)
        linked = linked || (std::count(sp.members.begin(), sp.members.end(), "payday") &&
                            std::count(sp.members.begin(), sp.members.end(), "bankrupt"));
    o.require(linked, "no shared pool links payday and bankrupt");
    double max_p = 0, max_b = 0;
    for (std::size_t x = 0; x < c.categories.size(); ++x) {
        if (x == p || x == b) continue;
        max_p = std::max(max_p, h[p][x]);
        max_b = std::max(max_b, h[b][x]);
    }
    o.require(h[p][b] > max_p, "payday->bankrupt " + fmt("%.3f", h[p][b]) + " <= " + fmt("%.3f", max_p));
    o.require(h[b][p] > max_b, "bankrupt->payday " + fmt("%.3f", h[b][p]) + " <= " + fmt("%.3f", max_b));
    if (o.pass)
        o.detail = "payday->bankrupt " + fmt("%.3f", h[p][b]) + " vs max unrelated " + fmt("%.3f", max_p) +
                   "; bankrupt->payday " + fmt("%.3f", h[b][p]) + " vs " + fmt("%.3f", max_b);
    return o;
}

Outcome clicks(const CampaignConfig& c, const CampaignResult& r) {
    Outcome o;
    const auto ce = click_effect(c, r);
    double min_gain = INFINITY;
    for (std::size_t t = 0; t < c.categories.size(); ++t) {
        min_gain = std::min(min_gain, ce.with_clicks[t] - ce.without_clicks[t]);
        o.require(ce.with_clicks[t] > ce.without_clicks[t],
                  c.categories.labels()[t] + " " + fmt("%.4f", ce.with_clicks[t]) + " <= " + fmt("%.4f", ce.without_clicks[t]));
    }
    if (o.pass) o.detail = "all 12 topics higher with clicks, smallest gain " + fmt("%.4f", min_gain);
    return o;
}

double expected_run_or_zero(const LagStatistics& lag) { return lag.expected_run.value_or(0.0); }

double run_length_stderr(const LagStatistics& lag) {
    if (lag.runs < 2) return 0.0;
    double m1 = 0, m2 = 0;
    for (const auto& [j, p] : lag.run_length_dist) {
        m1 += static_cast<double>(j) * p;
        m2 += static_cast<double>(j * j) * p;
    }
    return std::sqrt(std::max(0.0, m2 - m1 * m1) / static_cast<double>(lag.runs));
}

Outcome lag(const CampaignConfig& google, const CampaignResult& r, std::uint64_t seed) {
    Outcome o;
    const auto& lg = r.evaluation.lag;
    const double ex = expected_run_or_zero(lg);
    const double y1 = lg.first_error_dist.count(1) ? lg.first_error_dist.at(1) : 0.0;
    o.require(lg.expected_run.has_value(), "google E[X] absent");
    o.require(ex >= 0.9 && ex <= 1.2, "google E[X] " + fmt("%.3f", ex));
    o.require(y1 >= 0.9, "google Pr(Y=1) " + fmt("%.3f", y1));

    const auto bing_cfg = load("campaign-bing.conf", seed);
    const auto bing = run_campaign(bing_cfg).evaluation.lag;
    const double bx = expected_run_or_zero(bing);
    o.require(bx >= 1.5 && bx <= 2.0, "bing E[X] " + fmt("%.3f", bx));

    // E[X] is estimated from a few dozen runs per campaign, so neighbouring
    // lags may only differ by sampling noise: a step down is accepted when it
    // is within two standard errors of the difference.
    std::string series;
    bool strict = true;
    double prev = -1, prev_se = 0, at_one = 0, at_nine = 0;
    for (std::size_t L : {0, 1, 2, 3, 5, 7, 9}) {
        const auto stats = lag_at(google, L);
        const double x = expected_run_or_zero(stats);
        const double se = run_length_stderr(stats);
        series += (series.empty() ? "" : " ") + std::to_string(L) + ":" + fmt("%.2f", x);
        if (x < prev) {
            strict = false;
            o.require(prev - x <= 2 * std::sqrt(se * se + prev_se * prev_se),
                      "E[X] drops beyond sampling error at lag " + std::to_string(L));
        }
        if (L == 1) at_one = x;
        if (L == 9) at_nine = x;
        prev = x;
        prev_se = se;
    }
    o.require(at_nine > at_one, "E[X] at lag 9 not above lag 1");
    series += strict ? " (strictly nondecreasing)" : " (nondecreasing within sampling error)";
    if (o.pass)
        o.detail = "google E[X] " + fmt("%.3f", ex) + " Pr(Y=1) " + fmt("%.3f", y1) + ", bing E[X] " + fmt("%.3f", bx) +
                   ", E[X] by lag " + series;
    else
        o.detail += " (E[X] by lag " + series + ")";
    return o;
}

Outcome hygiene(const CampaignConfig& c, const CampaignResult& r) {
    Outcome o;
    const auto h = run_hygiene(c, r.model, r.baseline);
    o.require(h.flagged_sessions == 0,
              std::to_string(h.flagged_sessions) + " of " + std::to_string(h.traces.size()) + " sessions flagged");
    std::ifstream in(kRoot + "/data/examples/ambiguity_google.csv");
    const auto report = read_ambiguity_csv(in);
    struct Row {
        const char* topic;
        const char* symptoms;
        const char* help;
    };
    const std::vector<Row> published{{"anorexia", "3%", "6%"},   {"bankrupt", "0%", "56%"}, {"diabetes", "25%", "43%"},
                                     {"disabled", "5%", "31%"},  {"divorce", "6%", "43%"},  {"gambling", "1%", "30%"},
                                     {"gay", "1%", "15%"},       {"location", "4%", "19%"}, {"payday", "65%", "9%"},
                                     {"prostate", "18%", "15%"}, {"unemployed", "1%", "88%"}};
    std::size_t matched = 0;
    for (const auto& row : published) {
        const auto* s = report.find(row.topic, "symptoms and causes");
        const auto* hp = report.find(row.topic, "help and advice");
        const bool ok = s && hp && format_percent(s->ratio) == row.symptoms && format_percent(hp->ratio) == row.help;
        o.require(ok, std::string("ratio mismatch for ") + row.topic);
        matched += ok ? 2 : 0;
    }
    if (o.pass)
        o.detail = "0 of " + std::to_string(h.traces.size()) + " non-sensitive sessions flagged; " + std::to_string(matched) +
                   "/22 ratio percentages match";
    return o;
}

std::string read_all(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome determinism(const CampaignConfig& c, const CampaignResult& first) {
    Outcome o;
    const auto base = fs::temp_directory_path() / ("pri_acceptance_" + std::to_string(c.master_seed));
    fs::remove_all(base);
    write_campaign_bundle((base / "a").string(), c, first);
    auto single = c;
    single.threads = 1;
    const auto second = run_campaign(single);
    write_campaign_bundle((base / "b").string(), c, second);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(base / "a")) {
        ++files;
        o.require(read_all(e.path()) == read_all(base / "b" / e.path().filename()),
                  e.path().filename().string() + " differs");
    }
    fs::remove_all(base);
    try {
        audit_split(first);
        audit_split(second);
    } catch (const std::exception& e) {
        o.require(false, e.what());
    }
    if (o.pass)
        o.detail = std::to_string(files) + " bundle files byte-identical across reruns; " +
                   std::to_string(first.training.size()) + " train / " + std::to_string(first.testing.size()) +
                   " test sessions disjoint";
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : kDefaultSeed;
    int failures = 0;
    auto report = [&](int n, const char* name, const std::function<Outcome()>& fn) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", n, name, o.detail.c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    };

    report(1, "golden estimator", golden);
    report(2, "oracle equivalence", oracle);

    const auto google = load("campaign.conf", seed);
    const auto t0 = Clock::now();
    const auto result = run_campaign(google);
    const double runtime = seconds_since(t0);

    report(3, "detection campaign", [&] { return detection(google, result, runtime); });
    report(4, "topic confusion", [&] { return confusion(google, result); });
    report(5, "click effect", [&] { return clicks(google, result); });
    report(6, "lag statistics", [&] { return lag(google, result, seed); });
    report(7, "probe hygiene", [&] { return hygiene(google, result); });
    report(8, "determinism and leakage", [&] { return determinism(google, result); });
    std::printf("seed %llu: %d of 8 criteria failed\n", static_cast<unsigned long long>(seed), failures);
    return failures == 0 ? 0 : 1;
}

#pragma once

// Executes scripts against an engine and runs train / calibrate / test
// campaigns over simulated sessions.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pri/corpus.hpp"
#include "pri/detector.hpp"
#include "pri/estimator.hpp"
#include "pri/scripts.hpp"
#include "pri/simulator.hpp"

namespace pri {

struct RunOptions {
    bool clicks = true;
    // Sleep through wait directives and click dwell instead of advancing
    // virtual time only.
    bool real_time = false;
};

// Runs every script entry in order on the engine. Probe responses are never
// clicked; user-query items are clicked per the policy.
SessionTrace run_session(Engine& engine, const QueryScript& script, const ClickPolicy& policy,
                         const std::string& session_id, const TermFilter& filter = TermFilter(),
                         const RunOptions& options = RunOptions());

struct CampaignConfig {
    CategorySet categories = default_categories();
    KeywordSet keywords = default_keywords();
    std::string default_probe = "help and advice";
    std::map<std::string, std::string> probes;  // per-topic overrides
    std::size_t scripts_per_topic = 2;
    std::size_t repetitions = 7;
    std::size_t train_repetitions = 2;  // repetitions [0, train) train, the rest test
    ScriptBounds bounds;
    EngineConfig engine;
    DetectorConfig detector;
    double click_threshold = 0.1;
    bool train_clicks = true;
    bool test_clicks = true;
    bool train_on_probe_steps = true;
    std::size_t hygiene_sessions = 24;
    std::vector<std::string> hygiene_probes{"help and advice", "symptoms and causes"};
    std::uint64_t master_seed = 0;
    std::size_t threads = 1;

    CampaignConfig();
    const std::string& probe_for(const std::string& topic) const;
    void validate() const;
};

struct SessionSpec {
    std::string id;
    std::string topic;
    std::size_t script = 0;
    std::size_t repetition = 0;
    bool training = false;
    std::uint64_t seed = 0;
};

// Sessions of a campaign in canonical order (topic, script, repetition).
std::vector<SessionSpec> plan_sessions(const CampaignConfig& config);
std::vector<QueryScript> campaign_scripts(const CampaignConfig& config, const std::string& topic);
AdPool campaign_pools(const CampaignConfig& config);

// Runs the given sessions on fresh engines; output order follows specs.
std::vector<SessionTrace> simulate_sessions(const CampaignConfig& config, const AdPool& pools,
                                            const std::vector<SessionSpec>& specs, bool clicks);

// Adverts of the training traces labelled with each trace's topic.
std::vector<LabeledAdvert> training_corpus(const std::vector<SessionTrace>& traces, bool include_probe_steps);

struct Evaluation {
    std::vector<std::string> session_ids;
    std::vector<std::size_t> truth;                    // category index per session
    std::vector<std::vector<ScoreVector>> scores;      // all probes
    std::vector<std::vector<ProbeVerdict>> verdicts;   // first n probes
    std::vector<SessionVerdict> sessions;
    ConfusionReport confusion;
    std::vector<std::vector<double>> heatmap;          // [session topic][category] mean score
    std::vector<std::size_t> heatmap_probes;           // probes per session topic
    LagStatistics lag;
    std::vector<double> recall_by_probe;               // per probe index, sensitive sessions
};

Evaluation evaluate(const PriModel& model, const TopicBaseline& baseline, const std::vector<SessionTrace>& traces,
                    const DetectorConfig& config);

struct CampaignResult {
    std::vector<SessionSpec> specs;
    std::vector<SessionTrace> training;
    std::vector<SessionTrace> testing;
    std::set<std::string> model_sessions;  // sessions whose text reached the model or baseline
    PriModel model;
    TopicBaseline baseline;
    Evaluation evaluation;
};

CampaignResult run_campaign(const CampaignConfig& config);

// Throws if any test session contributed to the model or baseline, or if a
// session id appears on both sides.
void audit_split(const CampaignResult& result);

// Catch-all sessions made only of trending queries with injected probes,
// evaluated against a trained model.
struct HygieneResult {
    std::vector<SessionTrace> traces;
    Evaluation evaluation;
    std::size_t flagged_sessions = 0;
};
HygieneResult run_hygiene(const CampaignConfig& config, const PriModel& model, const TopicBaseline& baseline);

// Mean session-topic score per topic on the test sessions with and without
// clicking, same seeds and model.
struct ClickEffect {
    std::vector<double> with_clicks;
    std::vector<double> without_clicks;
};
ClickEffect click_effect(const CampaignConfig& config, const CampaignResult& result);

// Lag statistics of a campaign at a given adaptation lag (train and test
// at that lag).
LagStatistics lag_at(CampaignConfig config, std::size_t adaptation_lag);

}  // namespace pri

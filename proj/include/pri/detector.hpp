#pragma once

// Confidence-interval calibration and the per-probe / per-session learning
// tests, plus the confusion and lag summaries built on them.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pri/corpus.hpp"
#include "pri/estimator.hpp"

namespace pri {

struct DetectorConfig {
    double epsilon = 1.0;
    double sigma_multiplier = 3.0;
    std::size_t session_probe_count = 5;

    void validate() const;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    // Closed interval: a score on the edge is inside.
    bool contains(double x) const { return x >= lo && x <= hi; }
};

struct TopicBaseline {
    CategorySet categories;
    std::vector<double> mean;
    std::vector<double> stddev;
    std::vector<std::size_t> samples;

    Interval interval(std::size_t category, double sigma_multiplier) const;
};

// samples[c] holds the scores M(c) observed in sessions whose topic is c.
TopicBaseline calibrate_samples(const CategorySet& categories, const std::vector<std::vector<double>>& samples);
// Scores every probe step of every trace and calibrates on the scores of
// each trace's own topic.
TopicBaseline calibrate(const PriModel& model, const std::vector<SessionTrace>& training_traces);

// Scores of the probe steps of a trace, in step order.
std::vector<ScoreVector> score_probes(const PriModel& model, const SessionTrace& trace);

struct ProbeVerdict {
    std::size_t step = 0;
    bool sensitive_flag = false;
    std::set<std::size_t> detected_topics;  // category indices
};

ProbeVerdict classify_probe(const ScoreVector& scores, const TopicBaseline& baseline, const DetectorConfig& config);

struct SessionVerdict {
    bool sensitive = false;
    std::map<std::size_t, std::size_t> topics;  // category index -> count
};

SessionVerdict detect_session(const std::vector<ProbeVerdict>& verdicts, const DetectorConfig& config);

// Sensitive categories whose score exceeds e^epsilon.
std::set<std::size_t> epsilon_violation(const ScoreVector& scores, const CategorySet& categories,
                                        const DetectorConfig& config);

struct SensitivityTable {
    std::size_t sensitive_sessions = 0;
    std::size_t sensitive_detected = 0;
    std::size_t other_sessions = 0;
    std::size_t other_detected = 0;

    double detection_rate() const;
    double false_positive_rate() const;
};

struct TopicConfusion {
    std::size_t true_detect = 0;   // session on c, c detected
    std::size_t false_other = 0;   // session on c, c not detected
    std::size_t true_other = 0;    // session not on c, c not detected
    std::size_t false_detect = 0;  // session not on c, c detected

    double true_detect_rate() const;
    double false_other_rate() const;
    double true_other_rate() const;
    double false_detect_rate() const;
};

struct ConfusionReport {
    SensitivityTable sensitivity;
    std::vector<TopicConfusion> topics;  // one per sensitive category
};

// ground_truth[i] is the category index of session i.
ConfusionReport confusion_matrix(const std::vector<SessionVerdict>& verdicts, const std::vector<std::size_t>& ground_truth,
                                 const CategorySet& categories);

struct LagStatistics {
    std::map<std::size_t, double> run_length_dist;   // Pr(X = j)
    std::map<std::size_t, double> first_error_dist;  // Pr(Y = j), j is 1-based
    std::optional<double> expected_run;              // E[X]
    std::size_t runs = 0;
    std::size_t sessions_with_errors = 0;
    std::size_t sessions = 0;
};

// Whether a probe verdict disagrees with the session's topic: for a
// sensitive topic t, t was not detected; for the catch-all, the probe was
// flagged sensitive.
bool probe_misclassified(const ProbeVerdict& verdict, std::size_t truth, const CategorySet& categories);

LagStatistics lag_statistics(const std::vector<std::vector<bool>>& misclassified);
LagStatistics lag_statistics(const std::vector<std::vector<ProbeVerdict>>& verdicts_per_session,
                             const std::vector<std::size_t>& ground_truth, const CategorySet& categories);

inline constexpr std::string_view kBaselineHeader = "#pri-baseline v1";
void write_baseline(std::ostream& out, const TopicBaseline& baseline);
TopicBaseline read_baseline(std::istream& in);

}  // namespace pri

#include "pri/detector.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "pri/error.hpp"
#include "pri/kernels.hpp"

namespace pri {
namespace {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

void DetectorConfig::validate() const {
    if (!(epsilon > 0)) throw ValidationError("epsilon must be positive");
    if (!(sigma_multiplier > 0)) throw ValidationError("sigma_multiplier must be positive");
    if (session_probe_count == 0) throw ValidationError("session_probe_count must be positive");
}

Interval TopicBaseline::interval(std::size_t category, double sigma_multiplier) const {
    const double half = sigma_multiplier * stddev.at(category);
    return {mean.at(category) - half, mean.at(category) + half};
}

TopicBaseline calibrate_samples(const CategorySet& categories, const std::vector<std::vector<double>>& samples) {
    if (samples.size() != categories.size()) throw ValidationError("one sample list per category required");
    TopicBaseline b{categories, {}, {}, {}};
    std::vector<std::string> short_of;
    for (std::size_t c = 0; c < categories.size(); ++c) {
        const auto& x = samples[c];
        b.samples.push_back(x.size());
        if (x.size() < 2) {
            short_of.push_back(categories.labels()[c] + " (" + std::to_string(x.size()) + ")");
            b.mean.push_back(0.0);
            b.stddev.push_back(0.0);
            continue;
        }
        const double n = static_cast<double>(x.size());
        const double mean = kernels::sum(x) / n;
        b.mean.push_back(mean);
        b.stddev.push_back(std::sqrt(kernels::sum_sq_dev(x, mean) / (n - 1.0)));
    }
    if (!short_of.empty()) {
        std::string msg = "calibration needs at least 2 probe scores per category; short:";
        for (const auto& s : short_of) msg += " " + s;
        throw ValidationError(msg);
    }
    return b;
}

std::vector<ScoreVector> score_probes(const PriModel& model, const SessionTrace& trace) {
    std::vector<ScoreVector> out;
    for (const auto* it : trace.probes()) out.push_back(score(model, it->page.adverts, it->step));
    return out;
}

TopicBaseline calibrate(const PriModel& model, const std::vector<SessionTrace>& training_traces) {
    const auto& cats = model.categories();
    std::vector<std::vector<double>> samples(cats.size());
    for (const auto& trace : training_traces) {
        const auto c = cats.index_of(trace.topic);
        if (!c) throw ValidationError("session '" + trace.session_id + "' has unknown topic '" + trace.topic + "'");
        for (const auto& s : score_probes(model, trace)) samples[*c].push_back(s.scores[*c]);
    }
    return calibrate_samples(cats, samples);
}

ProbeVerdict classify_probe(const ScoreVector& scores, const TopicBaseline& baseline, const DetectorConfig& config) {
    const auto& cats = baseline.categories;
    if (scores.scores.size() != cats.size()) throw ValidationError("score vector does not match baseline categories");
    ProbeVerdict v;
    v.step = scores.step;
    const std::size_t other = cats.catchall_index();
    v.sensitive_flag = !baseline.interval(other, config.sigma_multiplier).contains(scores.scores[other]);
    if (v.sensitive_flag)
        for (std::size_t c = 0; c < other; ++c)
            if (baseline.interval(c, config.sigma_multiplier).contains(scores.scores[c])) v.detected_topics.insert(c);
    return v;
}

SessionVerdict detect_session(const std::vector<ProbeVerdict>& verdicts, const DetectorConfig& config) {
    if (verdicts.size() < config.session_probe_count)
        throw ValidationError("incomplete session: " + std::to_string(verdicts.size()) + " probes, " +
                              std::to_string(config.session_probe_count) + " required");
    SessionVerdict s;
    for (std::size_t i = 0; i < config.session_probe_count; ++i) {
        s.sensitive = s.sensitive || verdicts[i].sensitive_flag;
        for (auto c : verdicts[i].detected_topics) ++s.topics[c];
    }
    return s;
}

std::set<std::size_t> epsilon_violation(const ScoreVector& scores, const CategorySet& categories,
                                        const DetectorConfig& config) {
    const double threshold = std::exp(config.epsilon);
    std::set<std::size_t> out;
    for (std::size_t c = 0; c < categories.catchall_index(); ++c)
        if (scores.scores.at(c) > threshold) out.insert(c);
    return out;
}

double SensitivityTable::detection_rate() const { return ratio(sensitive_detected, sensitive_sessions); }
double SensitivityTable::false_positive_rate() const { return ratio(other_detected, other_sessions); }
double TopicConfusion::true_detect_rate() const { return ratio(true_detect, true_detect + false_other); }
double TopicConfusion::false_other_rate() const { return ratio(false_other, true_detect + false_other); }
double TopicConfusion::true_other_rate() const { return ratio(true_other, true_other + false_detect); }
double TopicConfusion::false_detect_rate() const { return ratio(false_detect, true_other + false_detect); }

ConfusionReport confusion_matrix(const std::vector<SessionVerdict>& verdicts, const std::vector<std::size_t>& ground_truth,
                                 const CategorySet& categories) {
    if (verdicts.empty()) throw ValidationError("confusion matrix needs at least one session");
    if (verdicts.size() != ground_truth.size()) throw ValidationError("verdicts and ground truth are not aligned");
    ConfusionReport r;
    r.topics.resize(categories.catchall_index());
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        const std::size_t truth = ground_truth[i];
        if (truth >= categories.size()) throw ValidationError("ground truth index out of range");
        const bool truth_sensitive = truth != categories.catchall_index();
        if (truth_sensitive) {
            ++r.sensitivity.sensitive_sessions;
            if (verdicts[i].sensitive) ++r.sensitivity.sensitive_detected;
        } else {
            ++r.sensitivity.other_sessions;
            if (verdicts[i].sensitive) ++r.sensitivity.other_detected;
        }
        for (std::size_t c = 0; c < r.topics.size(); ++c) {
            const bool detected = verdicts[i].topics.count(c) > 0;
            auto& t = r.topics[c];
            if (truth == c)
                ++(detected ? t.true_detect : t.false_other);
            else
                ++(detected ? t.false_detect : t.true_other);
        }
    }
    return r;
}

bool probe_misclassified(const ProbeVerdict& verdict, std::size_t truth, const CategorySet& categories) {
    if (truth == categories.catchall_index()) return verdict.sensitive_flag;
    return verdict.detected_topics.count(truth) == 0;
}

LagStatistics lag_statistics(const std::vector<std::vector<bool>>& misclassified) {
    LagStatistics s;
    std::map<std::size_t, std::size_t> runs, first;
    for (const auto& session : misclassified) {
        ++s.sessions;
        std::size_t run = 0;
        bool seen = false;
        for (std::size_t i = 0; i <= session.size(); ++i) {
            if (i < session.size() && session[i]) {
                if (!seen) {
                    ++first[i + 1];
                    seen = true;
                }
                ++run;
            } else if (run > 0) {
                ++runs[run];
                ++s.runs;
                run = 0;
            }
        }
        if (seen) ++s.sessions_with_errors;
    }
    if (s.runs == 0) return s;
    double expected = 0.0;
    for (const auto& [len, n] : runs) {
        const double p = ratio(n, s.runs);
        s.run_length_dist[len] = p;
        expected += static_cast<double>(len) * p;
    }
    for (const auto& [idx, n] : first) s.first_error_dist[idx] = ratio(n, s.sessions_with_errors);
    s.expected_run = expected;
    return s;
}

LagStatistics lag_statistics(const std::vector<std::vector<ProbeVerdict>>& verdicts_per_session,
                             const std::vector<std::size_t>& ground_truth, const CategorySet& categories) {
    if (verdicts_per_session.size() != ground_truth.size()) throw ValidationError("verdicts and ground truth are not aligned");
    std::vector<std::vector<bool>> flags;
    for (std::size_t i = 0; i < verdicts_per_session.size(); ++i) {
        std::vector<bool> f;
        for (const auto& v : verdicts_per_session[i]) f.push_back(probe_misclassified(v, ground_truth[i], categories));
        flags.push_back(std::move(f));
    }
    return lag_statistics(flags);
}

void write_baseline(std::ostream& out, const TopicBaseline& baseline) {
    out << kBaselineHeader << '\n';
    out << "catchall\t" << baseline.categories.catchall() << '\n';
    for (std::size_t c = 0; c < baseline.categories.size(); ++c)
        out << "category\t" << baseline.categories.labels()[c] << '\t' << format_double(baseline.mean[c]) << '\t'
            << format_double(baseline.stddev[c]) << '\t' << baseline.samples[c] << '\n';
}

TopicBaseline read_baseline(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kBaselineHeader)
        throw ValidationError("missing baseline header '" + std::string(kBaselineHeader) + "'", 1);
    std::optional<std::string> catchall;
    std::vector<std::string> labels;
    std::vector<double> mean, sd;
    std::vector<std::size_t> n;
    std::size_t lineno = 1;
    auto number = [&](const std::string& s) {
        double v = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ValidationError("bad number '" + s + "'", lineno);
        return v;
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        for (;;) {
            const auto tab = line.find('\t', start);
            f.push_back(line.substr(start, tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (f[0] == "catchall" && f.size() == 2) {
            catchall = f[1];
        } else if (f[0] == "category" && f.size() == 5) {
            labels.push_back(f[1]);
            mean.push_back(number(f[2]));
            sd.push_back(number(f[3]));
            if (sd.back() < 0) throw ValidationError("negative standard deviation", lineno);
            n.push_back(static_cast<std::size_t>(number(f[4])));
        } else {
            throw ValidationError("unrecognized baseline line", lineno);
        }
    }
    if (!catchall || labels.empty() || labels.back() != *catchall)
        throw ValidationError("baseline must list the catch-all category last");
    labels.pop_back();
    return TopicBaseline{CategorySet(labels, *catchall), mean, sd, n};
}

}  // namespace pri

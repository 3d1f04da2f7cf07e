#include "pri/runner.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <numeric>
#include <thread>

#include "pri/error.hpp"

namespace pri {
namespace {

std::vector<SessionSpec> hygiene_specs(const CampaignConfig& config) {
    std::vector<SessionSpec> specs;
    const auto& other = config.categories.catchall();
    for (std::size_t i = 0; i < config.hygiene_sessions; ++i) {
        SessionSpec s;
        s.id = "hygiene-" + std::to_string(i);
        s.topic = other;
        s.script = i;
        s.seed = derive_seed(config.master_seed, s.id);
        specs.push_back(std::move(s));
    }
    return specs;
}

template <typename Fn>
void for_each_index(std::size_t n, std::size_t threads, Fn fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::future<void>> workers;
    const std::size_t t = std::min(threads, n);
    for (std::size_t w = 0; w < t; ++w)
        workers.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t i = w; i < n; i += t) fn(i);
        }));
    for (auto& f : workers) f.get();
}

}  // namespace

SessionTrace run_session(Engine& engine, const QueryScript& script, const ClickPolicy& policy,
                         const std::string& session_id, const TermFilter& filter, const RunOptions& options) {
    if (script.topic.empty()) throw ValidationError("script for session '" + session_id + "' names no topic");
    if (!engine.categories().contains(script.topic))
        throw ValidationError("script topic '" + script.topic + "' is not an engine category");
    SessionTrace trace{session_id, script.topic, {}};
    std::size_t step = 0;
    for (const auto& e : script.entries) {
        if (e.kind == EntryKind::wait) {
            if (options.real_time) std::this_thread::sleep_for(std::chrono::seconds(e.wait_seconds));
            continue;
        }
        Interaction it;
        it.step = ++step;
        it.query = e.text;
        it.is_probe = e.kind == EntryKind::probe;
        it.page = engine.submit_query(e.text);
        if (!it.is_probe && options.clicks) {
            for (std::size_t i = 0; i < it.page.item_count(); ++i) {
                if (!click_decision(it.page.item_text(i), policy, filter, false)) continue;
                engine.register_click(i);
                it.clicked.push_back(i);
                if (options.real_time) std::this_thread::sleep_for(std::chrono::seconds(policy.dwell_seconds));
            }
        }
        trace.interactions.push_back(std::move(it));
    }
    return trace;
}

CampaignConfig::CampaignConfig() {
    bounds.leading_probe = false;
    for (const char* medical : {"anorexia", "diabetes", "prostate"}) probes[medical] = "symptoms and causes";
}

const std::string& CampaignConfig::probe_for(const std::string& topic) const {
    const auto it = probes.find(topic);
    return it == probes.end() ? default_probe : it->second;
}

void CampaignConfig::validate() const {
    if (scripts_per_topic == 0) throw ValidationError("scripts_per_topic must be positive");
    if (repetitions == 0) throw ValidationError("repetitions must be at least 1");
    if (train_repetitions == 0 || train_repetitions >= repetitions)
        throw ValidationError("train_repetitions must leave at least one repetition on each side");
    if (!(click_threshold > 0)) throw ValidationError("click_threshold must be positive");
    bounds.validate();
    engine.validate();
    detector.validate();
    if (bounds.min_probes < detector.session_probe_count)
        throw ValidationError("scripts may have fewer probes than the session rule uses");
    for (const auto& label : categories.labels())
        if (!keywords.contains(label)) throw ValidationError("no keyword list for category '" + label + "'");
    for (const auto& [topic, probe] : probes)
        if (!categories.contains(topic)) throw ValidationError("probe given for unknown topic '" + topic + "'");
    for (const auto& [label, w] : engine.prior_knowledge)
        if (!categories.contains(label)) throw ValidationError("prior given for unknown topic '" + label + "'");
    if (hygiene_probes.empty()) throw ValidationError("hygiene_probes must not be empty");
}

std::vector<SessionSpec> plan_sessions(const CampaignConfig& config) {
    std::vector<SessionSpec> specs;
    for (const auto& topic : config.categories.labels())
        for (std::size_t s = 0; s < config.scripts_per_topic; ++s)
            for (std::size_t r = 0; r < config.repetitions; ++r) {
                SessionSpec spec;
                spec.id = topic + "-s" + std::to_string(s) + "-r" + std::to_string(r);
                spec.topic = topic;
                spec.script = s;
                spec.repetition = r;
                spec.training = r < config.train_repetitions;
                spec.seed = derive_seed(config.master_seed, spec.id);
                specs.push_back(std::move(spec));
            }
    return specs;
}

std::vector<QueryScript> campaign_scripts(const CampaignConfig& config, const std::string& topic) {
    std::vector<QueryScript> scripts;
    for (std::size_t s = 0; s < config.scripts_per_topic; ++s) {
        Rng rng(derive_seed(config.master_seed, "script/" + topic + "/" + std::to_string(s)));
        scripts.push_back(generate_script(config.keywords.at(topic), config.probe_for(topic), config.bounds, rng));
    }
    return scripts;
}

AdPool campaign_pools(const CampaignConfig& config) {
    return build_ad_pools(config.keywords, config.categories, config.engine, derive_seed(config.master_seed, "pools"));
}

std::vector<SessionTrace> simulate_sessions(const CampaignConfig& config, const AdPool& pools,
                                            const std::vector<SessionSpec>& specs, bool clicks) {
    const TermFilter filter;
    std::map<std::string, std::vector<QueryScript>> scripts;
    std::map<std::string, ClickPolicy> policies;
    for (const auto& spec : specs) {
        if (scripts.count(spec.topic)) continue;
        scripts.emplace(spec.topic, campaign_scripts(config, spec.topic));
        policies.emplace(spec.topic, ClickPolicy::for_keywords(config.keywords.at(spec.topic), filter, config.click_threshold));
    }
    std::vector<SessionTrace> traces(specs.size());
    for_each_index(specs.size(), config.threads, [&](std::size_t i) {
        const auto& spec = specs[i];
        const auto& topic_scripts = scripts.at(spec.topic);
        const auto& script = topic_scripts.at(spec.script % topic_scripts.size());
        EngineConfig ec = config.engine;
        ec.seed = spec.seed;
        Engine engine(ec, pools, config.categories, config.keywords, filter);
        RunOptions opts;
        opts.clicks = clicks;
        traces[i] = run_session(engine, script, policies.at(spec.topic), spec.id, filter, opts);
    });
    return traces;
}

std::vector<LabeledAdvert> training_corpus(const std::vector<SessionTrace>& traces, bool include_probe_steps) {
    std::vector<LabeledAdvert> corpus;
    for (const auto& trace : traces)
        for (const auto& it : trace.interactions) {
            if (it.is_probe && !include_probe_steps) continue;
            for (const auto& a : it.page.adverts) corpus.push_back({trace.topic, a.text});
        }
    return corpus;
}

Evaluation evaluate(const PriModel& model, const TopicBaseline& baseline, const std::vector<SessionTrace>& traces,
                    const DetectorConfig& config) {
    config.validate();
    const auto& cats = model.categories();
    if (!(baseline.categories == cats)) throw ValidationError("baseline and model categories differ");
    Evaluation ev;
    ev.heatmap.assign(cats.size(), std::vector<double>(cats.size(), 0.0));
    ev.heatmap_probes.assign(cats.size(), 0);
    std::vector<std::size_t> recall_hits(config.session_probe_count, 0);
    std::size_t sensitive_sessions = 0;
    for (const auto& trace : traces) {
        const auto truth = cats.index_of(trace.topic);
        if (!truth) throw ValidationError("session '" + trace.session_id + "' has unknown topic '" + trace.topic + "'");
        auto scores = score_probes(model, trace);
        std::vector<ProbeVerdict> verdicts;
        for (std::size_t k = 0; k < scores.size() && k < config.session_probe_count; ++k)
            verdicts.push_back(classify_probe(scores[k], baseline, config));
        SessionVerdict sv;
        try {
            sv = detect_session(verdicts, config);
        } catch (const ValidationError& e) {
            throw ValidationError("session '" + trace.session_id + "': " + e.what());
        }
        for (const auto& s : scores)
            for (std::size_t c = 0; c < cats.size(); ++c) ev.heatmap[*truth][c] += s.scores[c];
        ev.heatmap_probes[*truth] += scores.size();
        if (*truth != cats.catchall_index()) {
            ++sensitive_sessions;
            for (std::size_t k = 0; k < verdicts.size(); ++k)
                if (verdicts[k].detected_topics.count(*truth)) ++recall_hits[k];
        }
        ev.session_ids.push_back(trace.session_id);
        ev.truth.push_back(*truth);
        ev.scores.push_back(std::move(scores));
        ev.verdicts.push_back(std::move(verdicts));
        ev.sessions.push_back(std::move(sv));
    }
    for (std::size_t t = 0; t < cats.size(); ++t)
        if (ev.heatmap_probes[t] > 0)
            for (auto& v : ev.heatmap[t]) v /= static_cast<double>(ev.heatmap_probes[t]);
    for (auto hits : recall_hits)
        ev.recall_by_probe.push_back(sensitive_sessions ? static_cast<double>(hits) / static_cast<double>(sensitive_sessions)
                                                        : 0.0);
    ev.confusion = confusion_matrix(ev.sessions, ev.truth, cats);
    ev.lag = lag_statistics(ev.verdicts, ev.truth, cats);
    return ev;
}

CampaignResult run_campaign(const CampaignConfig& config) {
    config.validate();
    const auto specs = plan_sessions(config);
    const auto pools = campaign_pools(config);
    std::vector<SessionSpec> train_specs, test_specs;
    for (const auto& s : specs) (s.training ? train_specs : test_specs).push_back(s);

    auto training = simulate_sessions(config, pools, train_specs, config.train_clicks);
    auto testing = simulate_sessions(config, pools, test_specs, config.test_clicks);

    const TermFilter filter;
    auto model = train(training_corpus(training, config.train_on_probe_steps), config.categories, filter);
    auto baseline = calibrate(model, training);
    std::set<std::string> used;
    for (const auto& t : training) used.insert(t.session_id);
    auto evaluation = evaluate(model, baseline, testing, config.detector);
    return CampaignResult{specs,           std::move(training), std::move(testing), std::move(used),
                          std::move(model), std::move(baseline), std::move(evaluation)};
}

void audit_split(const CampaignResult& result) {
    std::set<std::string> train_ids, test_ids;
    for (const auto& t : result.training)
        if (!train_ids.insert(t.session_id).second) throw ValidationError("duplicate training session " + t.session_id);
    for (const auto& t : result.testing) {
        if (!test_ids.insert(t.session_id).second) throw ValidationError("duplicate test session " + t.session_id);
        if (train_ids.count(t.session_id)) throw ValidationError("session " + t.session_id + " is in both splits");
    }
    for (const auto& id : result.model_sessions) {
        if (test_ids.count(id)) throw ValidationError("test session " + id + " reached the model");
        if (!train_ids.count(id)) throw ValidationError("model used unknown session " + id);
    }
    for (const auto& spec : result.specs) {
        const bool in_train = train_ids.count(spec.id) > 0;
        if (in_train != spec.training) throw ValidationError("session " + spec.id + " is on the wrong side of the split");
    }
}

HygieneResult run_hygiene(const CampaignConfig& config, const PriModel& model, const TopicBaseline& baseline) {
    config.validate();
    const auto pools = campaign_pools(config);
    const auto specs = hygiene_specs(config);
    const TermFilter filter;
    const auto& other = config.categories.catchall();
    const auto policy = ClickPolicy::for_keywords(config.keywords.at(other), filter, config.click_threshold);
    HygieneResult out;
    out.traces.resize(specs.size());
    for_each_index(specs.size(), config.threads, [&](std::size_t i) {
        const auto& spec = specs[i];
        Rng rng(derive_seed(config.master_seed, "script/" + spec.id));
        const auto& probe = config.hygiene_probes[rng.index(config.hygiene_probes.size())];
        auto script = generate_script(config.keywords.at(other), probe, config.bounds, rng);
        EngineConfig ec = config.engine;
        ec.seed = spec.seed;
        Engine engine(ec, pools, config.categories, config.keywords, filter);
        out.traces[i] = run_session(engine, script, policy, spec.id, filter, RunOptions{});
    });
    out.evaluation = evaluate(model, baseline, out.traces, config.detector);
    out.flagged_sessions = static_cast<std::size_t>(
        std::count_if(out.evaluation.sessions.begin(), out.evaluation.sessions.end(), [](const auto& s) { return s.sensitive; }));
    return out;
}

ClickEffect click_effect(const CampaignConfig& config, const CampaignResult& result) {
    const auto pools = campaign_pools(config);
    std::vector<SessionSpec> test_specs;
    for (const auto& s : result.specs)
        if (!s.training) test_specs.push_back(s);
    const auto with = simulate_sessions(config, pools, test_specs, true);
    const auto without = simulate_sessions(config, pools, test_specs, false);
    const auto& cats = result.model.categories();
    auto topic_means = [&](const std::vector<SessionTrace>& traces) {
        std::vector<double> sum(cats.size(), 0.0);
        std::vector<std::size_t> n(cats.size(), 0);
        for (const auto& trace : traces) {
            const auto t = cats.require_index(trace.topic);
            for (const auto& s : score_probes(result.model, trace)) {
                sum[t] += s.scores[t];
                ++n[t];
            }
        }
        for (std::size_t c = 0; c < cats.size(); ++c)
            if (n[c]) sum[c] /= static_cast<double>(n[c]);
        return sum;
    };
    return {topic_means(with), topic_means(without)};
}

LagStatistics lag_at(CampaignConfig config, std::size_t adaptation_lag) {
    config.engine.adaptation_lag = adaptation_lag;
    return run_campaign(config).evaluation.lag;
}

}  // namespace pri

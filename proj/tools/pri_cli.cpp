#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pri/config.hpp"
#include "pri/error.hpp"
#include "pri/probes.hpp"
#include "pri/random.hpp"
#include "pri/report.hpp"
#include "pri/runner.hpp"

namespace {

using namespace pri;

constexpr int kUsage = 1;
constexpr int kValidation = 2;
constexpr int kRuntime = 3;

struct Common {
    std::string stopwords;
    std::string categories;
    std::string catchall = "other";
};

TermFilter make_filter(const Common& c) {
    return c.stopwords.empty() ? TermFilter() : TermFilter::from_file(c.stopwords);
}

CategorySet make_categories(const Common& c) {
    if (c.categories.empty()) return default_categories();
    std::vector<std::string> labels;
    std::stringstream in(c.categories);
    std::string label;
    while (std::getline(in, label, ','))
        if (!label.empty()) labels.push_back(label);
    return CategorySet(labels, c.catchall);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

// Writes to the file, or stdout when path is empty or "-".
template <typename Fn>
void with_output(const std::string& path, Fn fn) {
    if (path.empty() || path == "-") {
        fn(std::cout);
        return;
    }
    auto out = open_out(path);
    fn(out);
}

std::ifstream open_in(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw ValidationError(std::string("cannot open ") + what + ": " + path);
    return in;
}

TopicBaseline load_baseline(const std::string& path) {
    auto in = open_in(path, "baseline file");
    return read_baseline(in);
}

struct ConfigOptions {
    std::vector<std::string> files;
    std::vector<std::string> sets;
    std::size_t threads = 0;
};

void add_config_options(CLI::App* cmd, ConfigOptions& o) {
    cmd->add_option("-c,--config", o.files, "Config file(s); later files override earlier ones")->check(CLI::ExistingFile);
    cmd->add_option("--set", o.sets, "Override a config key, e.g. --set engine.adaptation_lag=3 (repeatable)");
    cmd->add_option("--threads", o.threads, "Worker threads for session simulation (0 = config value)");
}

CampaignConfig load_campaign(const ConfigOptions& o, std::uint64_t seed) {
    std::vector<ConfigEntry> entries;
    for (const auto& f : o.files) {
        auto more = parse_config_file(f);
        entries.insert(entries.end(), more.begin(), more.end());
    }
    for (const auto& s : o.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + s + "'");
        entries.push_back({s.substr(0, eq), s.substr(eq + 1), "--set"});
    }
    auto config = campaign_from_entries(entries);
    config.master_seed = seed;
    if (o.threads) config.threads = o.threads;
    return config;
}

ReportFormat parse_format(const std::string& f) { return f == "csv" ? ReportFormat::csv : ReportFormat::text; }

int run(int argc, char** argv) {
    CLI::App app{"Detect search-engine learning of sensitive topics from the adverts returned to probe queries."};
    app.require_subcommand(1);
    app.fallthrough();
    Common common;
    app.add_option("--stopwords", common.stopwords, "Stopword list replacing the bundled one")->check(CLI::ExistingFile);
    app.add_option("--categories", common.categories,
                   "Comma-separated sensitive labels (default: the eleven bundled topics)");
    app.add_option("--catchall", common.catchall, "Catch-all category label")->capture_default_str();

    // train
    auto* train_cmd = app.add_subcommand("train", "Train a model from a labelled corpus or a training capture");
    std::string corpus_path, train_capture, model_out, baseline_out;
    bool train_probe_steps = true;
    auto* src = train_cmd->add_option_group("source");
    src->add_option("--corpus", corpus_path, "Labelled corpus, label<TAB>advert text per line");
    src->add_option("--capture", train_capture, "Training capture; adverts are labelled with their session topic");
    src->require_option(1);
    train_cmd->add_option("-o,--out", model_out, "Model file to write")->required();
    train_cmd->add_option("--baseline-out", baseline_out, "With --capture: also calibrate and write the baseline");
    train_cmd->add_option("--probe-steps", train_probe_steps, "With --capture: include probe-step adverts")
        ->capture_default_str();

    // score
    auto* score_cmd = app.add_subcommand("score", "Score result pages of a capture against a model");
    std::string score_model, score_capture, score_out;
    bool score_all = false;
    score_cmd->add_option("-m,--model", score_model, "Model file")->required();
    score_cmd->add_option("--capture", score_capture, "Capture file")->required();
    score_cmd->add_option("-o,--out", score_out, "CSV output (default stdout)");
    score_cmd->add_flag("--all-steps", score_all, "Score every step, not only probe steps");

    // detect
    auto* detect_cmd = app.add_subcommand("detect", "Classify the probes and sessions of a capture");
    std::string det_model, det_baseline, det_capture, det_out, det_format = "text";
    DetectorConfig det_cfg;
    detect_cmd->add_option("-m,--model", det_model, "Model file")->required();
    detect_cmd->add_option("-b,--baseline", det_baseline, "Baseline file")->required();
    detect_cmd->add_option("--capture", det_capture, "Capture file")->required();
    detect_cmd->add_option("-o,--out", det_out, "Output (default stdout)");
    detect_cmd->add_option("--format", det_format, "text or csv")->check(CLI::IsMember({"text", "csv"}))->capture_default_str();
    detect_cmd->add_option("--sigma", det_cfg.sigma_multiplier, "Interval half-width in standard deviations")->capture_default_str();
    detect_cmd->add_option("--probes", det_cfg.session_probe_count, "Probes per session verdict")->capture_default_str();
    detect_cmd->add_option("--epsilon", det_cfg.epsilon, "Indistinguishability parameter")->capture_default_str();

    // probe-select
    auto* probe_cmd = app.add_subcommand("probe-select", "Rank candidate probe terms and pick a probe by ambiguity");
    std::string ps_capture, ps_ambiguity, ps_out;
    std::size_t ps_top = 10;
    std::vector<std::string> ps_candidates, ps_group;
    ProbePolicy ps_policy;
    probe_cmd->add_option("--capture", ps_capture, "Capture whose pages supply candidate terms");
    probe_cmd->add_option("--top", ps_top, "Number of ranked terms")->capture_default_str();
    probe_cmd->add_option("--ambiguity", ps_ambiguity, "Ambiguity CSV (topic,probe,N,Np,ratio)");
    probe_cmd->add_option("--candidate", ps_candidates, "Candidate probe in rank order (repeatable)");
    probe_cmd->add_option("--group", ps_group, "Topic that must accept the probe (repeatable)");
    probe_cmd->add_option("--min-ratio", ps_policy.min_ratio, "Smallest accepted ambiguity ratio")->capture_default_str();
    probe_cmd->add_option("-o,--out", ps_out, "Output (default stdout)");

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Run one script against the simulated engine and write its capture");
    ConfigOptions sim_cfg;
    std::uint64_t sim_seed = 0;
    std::string sim_script, sim_topic, sim_out, sim_script_out, sim_id = "session";
    bool sim_no_clicks = false;
    add_config_options(sim_cmd, sim_cfg);
    sim_cmd->add_option("--seed", sim_seed, "Master seed")->required();
    sim_cmd->add_option("--script", sim_script, "Script file (default: generate one for --topic)");
    sim_cmd->add_option("--topic", sim_topic, "Session topic when the script names none");
    sim_cmd->add_option("--session-id", sim_id, "Session id recorded in the capture")->capture_default_str();
    sim_cmd->add_option("-o,--out", sim_out, "Capture output (default stdout)");
    sim_cmd->add_option("--script-out", sim_script_out, "Also write the executed script");
    sim_cmd->add_flag("--no-clicks", sim_no_clicks, "Do not click any result");

    // campaign
    auto* camp_cmd = app.add_subcommand("campaign", "Simulated train / calibrate / test campaign with a report bundle");
    ConfigOptions camp_cfg;
    std::uint64_t camp_seed = 0;
    std::string camp_out;
    bool camp_hygiene = false, camp_clicks = false;
    add_config_options(camp_cmd, camp_cfg);
    camp_cmd->add_option("--seed", camp_seed, "Master seed (required: every random draw derives from it)")->required();
    camp_cmd->add_option("-o,--out", camp_out, "Report bundle directory")->required();
    camp_cmd->add_flag("--hygiene", camp_hygiene, "Also run non-sensitive sessions with injected probes");
    camp_cmd->add_flag("--click-effect", camp_clicks, "Also re-run test sessions without clicks");

    // report
    auto* report_cmd = app.add_subcommand("report", "Evaluate a test capture and write a report bundle");
    std::string rep_model, rep_baseline, rep_capture, rep_out, rep_title = "Detection report";
    DetectorConfig rep_cfg;
    report_cmd->add_option("-m,--model", rep_model, "Model file")->required();
    report_cmd->add_option("-b,--baseline", rep_baseline, "Baseline file")->required();
    report_cmd->add_option("--capture", rep_capture, "Test capture")->required();
    report_cmd->add_option("-o,--out", rep_out, "Report bundle directory")->required();
    report_cmd->add_option("--title", rep_title, "Summary heading")->capture_default_str();
    report_cmd->add_option("--sigma", rep_cfg.sigma_multiplier, "Interval half-width in standard deviations")->capture_default_str();
    report_cmd->add_option("--probes", rep_cfg.session_probe_count, "Probes per session verdict")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    }

    if (*train_cmd) {
        const auto filter = make_filter(common);
        const auto cats = make_categories(common);
        if (!corpus_path.empty()) {
            const auto model = train(load_corpus_file(corpus_path, cats), cats, filter);
            if (!baseline_out.empty()) throw ValidationError("--baseline-out needs --capture");
            write_model_file(model_out, model);
            for (const auto& w : model.warnings()) std::cerr << "warning: " << w << '\n';
        } else {
            const auto traces = parse_capture_file(train_capture);
            const auto model = train(training_corpus(traces, train_probe_steps), cats, filter);
            write_model_file(model_out, model);
            if (!baseline_out.empty()) {
                auto out = open_out(baseline_out);
                write_baseline(out, calibrate(model, traces));
            }
        }
        return 0;
    }
    if (*score_cmd) {
        const auto model = read_model_file(score_model);
        const auto traces = parse_capture_file(score_capture);
        const auto& cats = model.categories();
        with_output(score_out, [&](std::ostream& out) {
            out << "session,step,category,score\n";
            for (const auto& t : traces)
                for (const auto& it : t.interactions) {
                    if (!it.is_probe && !score_all) continue;
                    const auto s = score(model, it.page.adverts, it.step);
                    for (std::size_t c = 0; c < cats.size(); ++c)
                        out << t.session_id << ',' << it.step << ',' << cats.labels()[c] << ','
                            << format_number(s.scores[c]) << '\n';
                }
        });
        return 0;
    }
    if (*detect_cmd) {
        const auto model = read_model_file(det_model);
        const auto ev = evaluate(model, load_baseline(det_baseline), parse_capture_file(det_capture), det_cfg);
        const auto& cats = model.categories();
        const auto fmt = parse_format(det_format);
        with_output(det_out, [&](std::ostream& out) {
            if (fmt == ReportFormat::csv) {
                write_verdicts(out, ev, cats);
                return;
            }
            write_sensitivity(out, ev, fmt);
            out << '\n';
            write_topics(out, ev, cats, fmt);
            out << '\n';
            std::ostringstream v;
            write_verdicts(v, ev, cats);
            out << v.str();
        });
        return 0;
    }
    if (*probe_cmd) {
        if (ps_capture.empty() && ps_ambiguity.empty())
            throw ValidationError("probe-select needs --capture and/or --ambiguity");
        const auto filter = make_filter(common);
        std::vector<TermScore> ranking;
        if (!ps_capture.empty()) {
            std::vector<ResultPage> pages;
            for (const auto& t : parse_capture_file(ps_capture))
                for (const auto& it : t.interactions) pages.push_back(it.page);
            ranking = extract_candidates(pages, filter, ps_top);
        }
        with_output(ps_out, [&](std::ostream& out) {
            if (ps_ambiguity.empty()) {
                write_candidates_csv(out, ranking);
                return;
            }
            auto in = open_in(ps_ambiguity, "ambiguity file");
            const auto report = read_ambiguity_csv(in);
            if (ps_candidates.empty()) {
                out << "topic,probe,N,Np,ratio,percent\n";
                for (const auto& e : report.entries)
                    out << e.topic << ',' << e.probe << ',' << e.n_c << ',' << e.n_cp << ',' << format_number(e.ratio)
                        << ',' << format_percent(e.ratio) << '\n';
                return;
            }
            if (ps_group.empty()) throw ValidationError("--candidate needs at least one --group topic");
            std::vector<ProbeCandidate> candidates;
            for (const auto& c : ps_candidates) candidates.push_back(make_candidate(c, ranking, filter));
            const auto keywords = default_keywords(common.catchall);
            out << select_probe(candidates, report, ps_group, ps_policy, &keywords, filter).rendered << '\n';
        });
        return 0;
    }
    if (*sim_cmd) {
        const auto config = load_campaign(sim_cfg, sim_seed);
        const TermFilter filter;
        QueryScript script;
        if (!sim_script.empty()) {
            script = parse_script_file(sim_script);
        } else {
            if (sim_topic.empty()) throw ValidationError("simulate needs --script or --topic");
            Rng rng(derive_seed(sim_seed, "script/" + sim_topic));
            script = generate_script(config.keywords.at(sim_topic), config.probe_for(sim_topic), config.bounds, rng);
        }
        if (!sim_topic.empty()) script.topic = sim_topic;
        if (!sim_script_out.empty()) {
            auto out = open_out(sim_script_out);
            write_script(out, script);
        }
        EngineConfig ec = config.engine;
        ec.seed = derive_seed(sim_seed, sim_id);
        Engine engine(ec, campaign_pools(config), config.categories, config.keywords, filter);
        const auto policy = ClickPolicy::for_keywords(config.keywords.at(script.topic), filter, config.click_threshold);
        RunOptions opts;
        opts.clicks = !sim_no_clicks;
        const auto trace = run_session(engine, script, policy, sim_id, filter, opts);
        with_output(sim_out, [&](std::ostream& out) { write_capture(out, {trace}); });
        return 0;
    }
    if (*camp_cmd) {
        const auto config = load_campaign(camp_cfg, camp_seed);
        const auto result = run_campaign(config);
        audit_split(result);
        ReportExtras extras;
        if (camp_hygiene) extras.hygiene = run_hygiene(config, result.model, result.baseline);
        if (camp_clicks) extras.clicks = click_effect(config, result);
        write_campaign_bundle(camp_out, config, result, extras);
        std::ostringstream summary;
        write_sensitivity(summary, result.evaluation, ReportFormat::text);
        std::cout << summary.str() << "bundle written to " << camp_out << '\n';
        return 0;
    }
    if (*report_cmd) {
        const auto model = read_model_file(rep_model);
        const auto ev = evaluate(model, load_baseline(rep_baseline), parse_capture_file(rep_capture), rep_cfg);
        write_evaluation_bundle(rep_out, ev, model.categories(), rep_title);
        return 0;
    }
    return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const pri::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
}

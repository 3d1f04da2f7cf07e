#include "pri/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace pri {
namespace {

namespace fs = std::filesystem;

using Row = std::vector<std::string>;

void emit(std::ostream& out, const std::vector<Row>& rows, ReportFormat format) {
    if (format == ReportFormat::csv) {
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
            out << '\n';
        }
        return;
    }
    std::vector<std::size_t> width;
    for (const auto& r : rows)
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (width.size() <= i) width.push_back(0);
            width[i] = std::max(width[i], r[i].size());
        }
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& r = rows[k];
        std::string line;
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) line += "  ";
            const auto pad = std::string(width[i] - r[i].size(), ' ');
            line += i == 0 ? r[i] + pad : pad + r[i];
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out << line << '\n';
        if (k == 0) {
            std::size_t total = 0;
            for (auto w : width) total += w;
            out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
        }
    }
}

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * v);
    return buf;
}

std::string rate(double v, ReportFormat f) { return f == ReportFormat::csv ? format_number(v) : pct(v); }

void write_file(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << contents;
}

template <typename Fn>
std::string render(Fn fn) {
    std::ostringstream out;
    fn(out);
    return out.str();
}

}  // namespace

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf) == "-0.000000" ? "0.000000" : buf;
}

void write_sensitivity(std::ostream& out, const Evaluation& ev, ReportFormat f) {
    const auto& s = ev.confusion.sensitivity;
    emit(out,
         {{"session_topic", "sessions", "detected_sensitive", "rate"},
          {"sensitive", std::to_string(s.sensitive_sessions), std::to_string(s.sensitive_detected),
           rate(s.detection_rate(), f)},
          {"non_sensitive", std::to_string(s.other_sessions), std::to_string(s.other_detected),
           rate(s.false_positive_rate(), f)}},
         f);
}

void write_topics(std::ostream& out, const Evaluation& ev, const CategorySet& cats, ReportFormat f) {
    std::vector<Row> rows{{"topic", "true_detect", "false_other", "true_other", "false_detect"}};
    for (std::size_t i = 0; i < ev.confusion.topics.size(); ++i) {
        const auto& t = ev.confusion.topics[i];
        rows.push_back({cats.sensitive()[i], rate(t.true_detect_rate(), f), rate(t.false_other_rate(), f),
                        rate(t.true_other_rate(), f), rate(t.false_detect_rate(), f)});
    }
    emit(out, rows, f);
}

void write_heatmap(std::ostream& out, const Evaluation& ev, const CategorySet& cats, ReportFormat f) {
    Row header{"session_topic"};
    for (const auto& l : cats.labels()) header.push_back(l);
    std::vector<Row> rows{header};
    for (std::size_t t = 0; t < cats.size(); ++t) {
        Row r{cats.labels()[t]};
        for (std::size_t c = 0; c < cats.size(); ++c)
            r.push_back(ev.heatmap_probes[t] ? format_number(ev.heatmap[t][c]) : "");
        rows.push_back(std::move(r));
    }
    emit(out, rows, f);
}

void write_lag(std::ostream& out, const LagStatistics& lag, ReportFormat f) {
    std::size_t top = 0;
    for (const auto& [j, p] : lag.run_length_dist) top = std::max(top, j);
    for (const auto& [j, p] : lag.first_error_dist) top = std::max(top, j);
    std::vector<Row> rows{{"j", "pr_x", "pr_y"}};
    auto at = [](const std::map<std::size_t, double>& m, std::size_t j) {
        const auto it = m.find(j);
        return format_number(it == m.end() ? 0.0 : it->second);
    };
    for (std::size_t j = 1; j <= top; ++j)
        rows.push_back({std::to_string(j), at(lag.run_length_dist, j), at(lag.first_error_dist, j)});
    rows.push_back({"E[X]", lag.expected_run ? format_number(*lag.expected_run) : "absent", ""});
    rows.push_back({"runs", std::to_string(lag.runs), ""});
    rows.push_back({"sessions_with_errors", std::to_string(lag.sessions_with_errors), std::to_string(lag.sessions)});
    emit(out, rows, f);
}

void write_recall_by_probe(std::ostream& out, const Evaluation& ev, ReportFormat f) {
    std::vector<Row> rows{{"probe", "recall"}};
    for (std::size_t k = 0; k < ev.recall_by_probe.size(); ++k)
        rows.push_back({std::to_string(k + 1), rate(ev.recall_by_probe[k], f)});
    emit(out, rows, f);
}

void write_scores(std::ostream& out, const Evaluation& ev, const CategorySet& cats) {
    out << "session,step,category,score\n";
    for (std::size_t i = 0; i < ev.scores.size(); ++i)
        for (const auto& s : ev.scores[i])
            for (std::size_t c = 0; c < cats.size(); ++c)
                out << ev.session_ids[i] << ',' << s.step << ',' << cats.labels()[c] << ',' << format_number(s.scores[c])
                    << '\n';
}

void write_verdicts(std::ostream& out, const Evaluation& ev, const CategorySet& cats) {
    out << "session,topic,sensitive,detected\n";
    for (std::size_t i = 0; i < ev.sessions.size(); ++i) {
        std::string detected;
        for (const auto& [c, n] : ev.sessions[i].topics)
            detected += (detected.empty() ? "" : ";") + cats.labels()[c] + ":" + std::to_string(n);
        out << ev.session_ids[i] << ',' << cats.labels()[ev.truth[i]] << ',' << (ev.sessions[i].sensitive ? 1 : 0) << ','
            << detected << '\n';
    }
}

void write_evaluation_bundle(const std::string& dir, const Evaluation& ev, const CategorySet& cats,
                             const std::string& title, const ReportExtras& extras) {
    const fs::path root(dir);
    fs::create_directories(root);
    const auto csv = ReportFormat::csv;
    const auto txt = ReportFormat::text;
    write_file(root / "sensitivity.csv", render([&](auto& o) { write_sensitivity(o, ev, csv); }));
    write_file(root / "topics.csv", render([&](auto& o) { write_topics(o, ev, cats, csv); }));
    write_file(root / "heatmap.csv", render([&](auto& o) { write_heatmap(o, ev, cats, csv); }));
    write_file(root / "lag.csv", render([&](auto& o) { write_lag(o, ev.lag, csv); }));
    write_file(root / "recall_by_probe.csv", render([&](auto& o) { write_recall_by_probe(o, ev, csv); }));
    write_file(root / "scores.csv", render([&](auto& o) { write_scores(o, ev, cats); }));
    write_file(root / "verdicts.csv", render([&](auto& o) { write_verdicts(o, ev, cats); }));

    std::ostringstream md;
    md << "# " << title << "\n\n";
    md << "Test sessions: " << ev.session_ids.size() << "\n\n";
    md << "## Sensitive session detection\n\n```\n";
    write_sensitivity(md, ev, txt);
    md << "```\n\n## Per-topic detection\n\n```\n";
    write_topics(md, ev, cats, txt);
    md << "```\n\n## Time to learn\n\n```\n";
    write_lag(md, ev.lag, txt);
    md << "```\n\n## Recall by probe\n\n```\n";
    write_recall_by_probe(md, ev, txt);
    md << "```\n";
    if (extras.clicks) {
        std::vector<Row> rows{{"topic", "with_clicks", "without_clicks"}};
        for (std::size_t c = 0; c < cats.size(); ++c)
            rows.push_back({cats.labels()[c], format_number(extras.clicks->with_clicks[c]),
                            format_number(extras.clicks->without_clicks[c])});
        md << "\n## Click effect (mean session-topic score)\n\n```\n";
        emit(md, rows, txt);
        md << "```\n";
        write_file(root / "click_effect.csv", render([&](auto& o) { emit(o, rows, csv); }));
    }
    if (extras.hygiene) {
        const auto& h = *extras.hygiene;
        md << "\n## Probe hygiene\n\n" << h.flagged_sessions << " of " << h.traces.size()
           << " non-sensitive sessions flagged sensitive.\n";
        write_file(root / "hygiene_verdicts.csv", render([&](auto& o) { write_verdicts(o, h.evaluation, cats); }));
    }
    write_file(root / "summary.md", md.str());
}

void write_campaign_bundle(const std::string& dir, const CampaignConfig& config, const CampaignResult& result,
                           const ReportExtras& extras) {
    const fs::path root(dir);
    fs::create_directories(root);
    write_file(root / "training.capture", render([&](auto& o) { write_capture(o, result.training); }));
    write_file(root / "testing.capture", render([&](auto& o) { write_capture(o, result.testing); }));
    write_file(root / "model.txt", render([&](auto& o) { write_model(o, result.model); }));
    write_file(root / "baseline.txt", render([&](auto& o) { write_baseline(o, result.baseline); }));
    std::ostringstream title;
    title << "Campaign report (seed " << config.master_seed << ", adaptation lag " << config.engine.adaptation_lag
          << ", " << config.categories.size() << " topics)";
    write_evaluation_bundle(dir, result.evaluation, config.categories, title.str(), extras);
}

}  // namespace pri

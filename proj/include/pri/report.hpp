#pragma once

// Text and CSV renderings of evaluation results and the campaign report
// bundle written to a directory.

#include <iosfwd>
#include <optional>
#include <string>

#include "pri/runner.hpp"

namespace pri {

enum class ReportFormat { text, csv };

// Session-level sensitive / non-sensitive detection.
void write_sensitivity(std::ostream& out, const Evaluation& ev, ReportFormat format);
// Per-topic True Detect / False Other / True Other / False Detect rates.
void write_topics(std::ostream& out, const Evaluation& ev, const CategorySet& categories, ReportFormat format);
// Mean score per (session topic, category).
void write_heatmap(std::ostream& out, const Evaluation& ev, const CategorySet& categories, ReportFormat format);
// Pr(X = j), Pr(Y = j) and E[X].
void write_lag(std::ostream& out, const LagStatistics& lag, ReportFormat format);
void write_recall_by_probe(std::ostream& out, const Evaluation& ev, ReportFormat format);
// session,step,category,score for every probe step.
void write_scores(std::ostream& out, const Evaluation& ev, const CategorySet& categories);
// session,topic,sensitive,detected for every session.
void write_verdicts(std::ostream& out, const Evaluation& ev, const CategorySet& categories);

struct ReportExtras {
    std::optional<HygieneResult> hygiene;
    std::optional<ClickEffect> clicks;
};

// Writes the evaluation tables plus summary.md into dir (created if
// missing). Contents depend only on the arguments.
void write_evaluation_bundle(const std::string& dir, const Evaluation& ev, const CategorySet& categories,
                             const std::string& title, const ReportExtras& extras = {});

// Evaluation bundle plus captures, model and baseline of a campaign.
void write_campaign_bundle(const std::string& dir, const CampaignConfig& config, const CampaignResult& result,
                           const ReportExtras& extras = {});

std::string format_number(double v);

}  // namespace pri

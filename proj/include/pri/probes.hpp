#pragma once

// Probe query selection: rank candidate terms by aggregate frequency over
// collected result pages, and screen candidate probes by how much they
// narrow each topic's result count.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pri/corpus.hpp"
#include "pri/rational.hpp"
#include "pri/scripts.hpp"
#include "pri/text.hpp"

namespace pri {

struct TermScore {
    std::string term;
    Rational tf;  // sum over pages of the term's frequency within the page

    double value() const { return to_double(tf); }
};

// Terms of all page text (links and adverts) ranked by descending aggregate
// frequency, ties broken lexicographically; at most top_k entries.
std::vector<TermScore> extract_candidates(const std::vector<ResultPage>& pages, const TermFilter& filter,
                                          std::size_t top_k);

struct ProbeCandidate {
    std::vector<std::string> terms;  // filtered
    std::string rendered;
    std::vector<double> tf_scores;   // aggregate TF per term, 0 when unranked
};

// Joins words with the connective: {symptoms, causes} -> "symptoms and causes".
std::string render_probe(const std::vector<std::string>& words, const std::string& connective = "and");
ProbeCandidate make_candidate(const std::string& rendered, const std::vector<TermScore>& ranking,
                              const TermFilter& filter);

// n_cp / n_c; throws when n_c is not positive or n_cp is negative.
double ambiguity_ratio(double n_c, double n_cp);

struct AmbiguityEntry {
    std::string topic;
    std::string probe;
    double n_c = 0;
    double n_cp = 0;
    double ratio = 0;

    bool anomalous() const { return ratio > 1.0; }
};

struct AmbiguityReport {
    std::vector<AmbiguityEntry> entries;

    void add(std::string topic, std::string probe, double n_c, double n_cp);
    const AmbiguityEntry* find(const std::string& topic, const std::string& probe) const;
};

// CSV with header "topic,probe,N,Np,ratio"; the ratio column is recomputed
// on read.
AmbiguityReport read_ambiguity_csv(std::istream& in);
void write_ambiguity_csv(std::ostream& out, const AmbiguityReport& report);
// "rank,term,tf"
void write_candidates_csv(std::ostream& out, const std::vector<TermScore>& ranking);

// Whole-percent rendering used in reports: 0.0293 -> "3%".
std::string format_percent(double ratio);

struct ProbePolicy {
    double min_ratio = 0.01;
};

// First candidate (in rank order) whose ratio is at least min_ratio for every
// topic of the group and which shares no term with any group topic's
// keywords (when keywords are given). Throws ValidationError describing why
// each candidate failed when none qualifies.
const ProbeCandidate& select_probe(const std::vector<ProbeCandidate>& candidates, const AmbiguityReport& report,
                                   const std::vector<std::string>& group, const ProbePolicy& policy,
                                   const KeywordSet* keywords, const TermFilter& filter);

}  // namespace pri

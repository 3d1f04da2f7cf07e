#include "pri/probes.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "pri/error.hpp"

namespace pri {
namespace {

double parse_number(const std::string& field, std::size_t line) {
    double v = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size())
        throw ValidationError("bad number '" + field + "'", line);
    return v;
}

std::string shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::vector<TermScore> extract_candidates(const std::vector<ResultPage>& pages, const TermFilter& filter,
                                          std::size_t top_k) {
    if (pages.empty()) throw ValidationError("no pages to extract candidate terms from");
    if (top_k == 0) throw ValidationError("top_k must be positive");
    std::map<std::string, Rational> totals;
    for (const auto& page : pages) {
        TermSequence terms;
        for (std::size_t i = 0; i < page.item_count(); ++i) {
            auto item = filter.apply_text(page.item_text(i));
            terms.insert(terms.end(), std::make_move_iterator(item.begin()), std::make_move_iterator(item.end()));
        }
        if (terms.empty()) continue;
        std::map<std::string, long long> counts;
        for (const auto& t : terms) ++counts[t];
        const auto n = static_cast<long long>(terms.size());
        for (const auto& [term, count] : counts) totals[term] += Rational(count, n);
    }
    std::vector<TermScore> ranking;
    ranking.reserve(totals.size());
    for (auto& [term, tf] : totals) ranking.push_back({term, tf});
    std::stable_sort(ranking.begin(), ranking.end(), [](const TermScore& a, const TermScore& b) { return a.tf > b.tf; });
    if (ranking.size() > top_k) ranking.resize(top_k);
    return ranking;
}

std::string render_probe(const std::vector<std::string>& words, const std::string& connective) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i > 0) out += ' ' + connective + ' ';
        out += words[i];
    }
    return out;
}

ProbeCandidate make_candidate(const std::string& rendered, const std::vector<TermScore>& ranking,
                              const TermFilter& filter) {
    ProbeCandidate c;
    c.rendered = rendered;
    c.terms = filter.apply_text(rendered);
    if (c.terms.empty()) throw ValidationError("probe '" + rendered + "' has no content terms");
    for (const auto& t : c.terms) {
        const auto it = std::find_if(ranking.begin(), ranking.end(), [&](const TermScore& s) { return s.term == t; });
        c.tf_scores.push_back(it == ranking.end() ? 0.0 : it->value());
    }
    return c;
}

double ambiguity_ratio(double n_c, double n_cp) {
    if (!(n_c > 0)) throw ValidationError("result count N(c) must be positive");
    if (!(n_cp >= 0)) throw ValidationError("result count N(c,p) must be nonnegative");
    return n_cp / n_c;
}

void AmbiguityReport::add(std::string topic, std::string probe, double n_c, double n_cp) {
    const double ratio = ambiguity_ratio(n_c, n_cp);
    if (find(topic, probe)) throw ValidationError("duplicate ambiguity entry for " + topic + " / " + probe);
    entries.push_back({std::move(topic), std::move(probe), n_c, n_cp, ratio});
}

const AmbiguityEntry* AmbiguityReport::find(const std::string& topic, const std::string& probe) const {
    for (const auto& e : entries)
        if (e.topic == topic && e.probe == probe) return &e;
    return nullptr;
}

AmbiguityReport read_ambiguity_csv(std::istream& in) {
    AmbiguityReport report;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (!header) {
            if (line.rfind("topic,probe,N,Np", 0) != 0) throw ValidationError("expected header 'topic,probe,N,Np,ratio'", lineno);
            header = true;
            continue;
        }
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string f;
        while (std::getline(ls, f, ',')) fields.push_back(f);
        if (fields.size() < 4) throw ValidationError("expected at least 4 fields", lineno);
        try {
            report.add(fields[0], fields[1], parse_number(fields[2], lineno), parse_number(fields[3], lineno));
        } catch (const ValidationError& e) {
            if (e.line()) throw;
            throw ValidationError(e.what(), lineno);
        }
    }
    if (!header) throw ValidationError("missing ambiguity CSV header");
    return report;
}

void write_ambiguity_csv(std::ostream& out, const AmbiguityReport& report) {
    out << "topic,probe,N,Np,ratio\n";
    for (const auto& e : report.entries)
        out << e.topic << ',' << e.probe << ',' << shortest(e.n_c) << ',' << shortest(e.n_cp) << ',' << shortest(e.ratio)
            << '\n';
}

void write_candidates_csv(std::ostream& out, const std::vector<TermScore>& ranking) {
    out << "rank,term,tf\n";
    for (std::size_t i = 0; i < ranking.size(); ++i)
        out << i + 1 << ',' << ranking[i].term << ',' << shortest(ranking[i].value()) << '\n';
}

std::string format_percent(double ratio) {
    return std::to_string(static_cast<long long>(std::llround(ratio * 100.0))) + "%";
}

const ProbeCandidate& select_probe(const std::vector<ProbeCandidate>& candidates, const AmbiguityReport& report,
                                   const std::vector<std::string>& group, const ProbePolicy& policy,
                                   const KeywordSet* keywords, const TermFilter& filter) {
    if (group.empty()) throw ValidationError("probe selection needs at least one topic");
    if (candidates.empty()) throw ValidationError("no probe candidates");
    std::vector<std::string> reasons;
    for (const auto& c : candidates) {
        std::string reason;
        for (const auto& topic : group) {
            if (keywords && keywords->contains(topic)) {
                const auto kw = keyword_terms(keywords->at(topic), filter);
                for (const auto& t : c.terms) {
                    if (kw.count(t)) {
                        reason = "shares term '" + t + "' with the " + topic + " keywords";
                        break;
                    }
                }
                if (!reason.empty()) break;
            }
            const auto* e = report.find(topic, c.rendered);
            if (!e) {
                reason = "no result counts for " + topic;
                break;
            }
            if (e->ratio < policy.min_ratio) {
                reason = topic + " ratio " + shortest(e->ratio) + " below " + shortest(policy.min_ratio);
                break;
            }
        }
        if (reason.empty()) return c;
        reasons.push_back("'" + c.rendered + "': " + reason);
    }
    std::string msg = "no probe candidate passes for group";
    for (const auto& t : group) msg += ' ' + t;
    for (const auto& r : reasons) msg += "; " + r;
    throw ValidationError(msg);
}

}  // namespace pri

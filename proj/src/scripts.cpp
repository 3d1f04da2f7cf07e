#include "pri/scripts.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "pri/error.hpp"

namespace pri {
namespace {

constexpr const char* kBundledKeywords =
#include "keywords_data.inc"
    ;

constexpr const char* kBundledTrending =
#include "trending_data.inc"
    ;

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string strip_comment(std::string line) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    return line;
}

std::string render(const std::string& tmpl, const std::string& group) {
    std::string out = tmpl;
    out.replace(out.find("{}"), 2, group);
    return out;
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

}  // namespace

KeywordSet::KeywordSet(std::vector<CategoryKeywords> topics) : topics_(std::move(topics)) {
    std::set<std::string> seen;
    for (const auto& t : topics_) {
        if (t.keywords.empty()) throw ValidationError("keyword list for '" + t.label + "' is empty");
        if (!seen.insert(t.label).second) throw ValidationError("duplicate keyword list for '" + t.label + "'");
    }
}

const CategoryKeywords& KeywordSet::at(std::string_view label) const {
    for (const auto& t : topics_)
        if (t.label == label) return t;
    throw ValidationError("no keyword list for '" + std::string(label) + "'");
}

bool KeywordSet::contains(std::string_view label) const {
    return std::any_of(topics_.begin(), topics_.end(), [&](const auto& t) { return t.label == label; });
}

KeywordSet parse_keywords(std::istream& in) {
    std::vector<CategoryKeywords> topics;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos) throw ValidationError("expected 'label: phrase, phrase'", lineno);
        CategoryKeywords k{trim(line.substr(0, colon)), {}, false};
        std::istringstream phrases(line.substr(colon + 1));
        std::string phrase;
        while (std::getline(phrases, phrase, ',')) {
            phrase = trim(phrase);
            if (!phrase.empty() && std::find(k.keywords.begin(), k.keywords.end(), phrase) == k.keywords.end())
                k.keywords.push_back(phrase);
        }
        if (k.label.empty() || k.keywords.empty()) throw ValidationError("empty label or keyword list", lineno);
        topics.push_back(std::move(k));
    }
    return KeywordSet(std::move(topics));
}

std::vector<std::string> parse_query_list(std::istream& in) {
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(strip_comment(line));
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

const KeywordSet& sensitive_keywords() {
    static const KeywordSet set = [] {
        std::istringstream in(kBundledKeywords);
        return parse_keywords(in);
    }();
    return set;
}

const std::vector<std::string>& trending_queries() {
    static const std::vector<std::string> list = [] {
        std::istringstream in(kBundledTrending);
        return parse_query_list(in);
    }();
    return list;
}

KeywordSet default_keywords(const std::string& catchall) {
    auto topics = sensitive_keywords().topics();
    topics.push_back({catchall, trending_queries(), true});
    return KeywordSet(std::move(topics));
}

std::set<std::string> keyword_terms(const CategoryKeywords& keywords, const TermFilter& filter) {
    std::set<std::string> out;
    for (const auto& phrase : keywords.keywords)
        for (auto& t : filter.apply_text(phrase)) out.insert(std::move(t));
    return out;
}

const std::vector<std::string>& query_templates() {
    static const std::vector<std::string> templates{
        "{}",          "what is {}",         "{} near me",      "why am i so {}", "how to deal with {}",
        "best {}",     "latest {} news",     "{} information",  "{} for beginners", "questions about {}",
        "{} forum",    "{} facts",           "{} explained",    "everything about {}"};
    return templates;
}

std::size_t QueryScript::query_count() const {
    return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(),
                                                  [](const auto& e) { return e.kind != EntryKind::wait; }));
}

std::size_t QueryScript::probe_count() const {
    return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(),
                                                  [](const auto& e) { return e.kind == EntryKind::probe; }));
}

std::vector<std::size_t> QueryScript::probe_gaps() const {
    std::vector<std::size_t> gaps;
    bool seen_probe = false;
    std::size_t run = 0;
    for (const auto& e : entries) {
        if (e.kind == EntryKind::query) {
            ++run;
        } else if (e.kind == EntryKind::probe) {
            if (seen_probe) gaps.push_back(run);
            seen_probe = true;
            run = 0;
        }
    }
    return gaps;
}

void ScriptBounds::validate() const {
    if (min_queries > max_queries) throw ValidationError("min_queries exceeds max_queries");
    if (min_gap == 0 || min_gap > max_gap) throw ValidationError("probe gap bounds must satisfy 1 <= min_gap <= max_gap");
    if (min_wait > max_wait) throw ValidationError("min_wait exceeds max_wait");
    if (max_group == 0) throw ValidationError("max_group must be positive");
    if (max_attempts == 0) throw ValidationError("max_attempts must be positive");
    // Fewest queries that can hold min_probes probes.
    if (min_probes > 0) {
        const std::size_t needed = min_probes + (min_probes - 1) * min_gap + (leading_probe ? 0 : min_gap);
        if (needed > max_queries)
            throw ValidationError("bounds unsatisfiable: " + std::to_string(min_probes) + " probes need at least " +
                                  std::to_string(needed) + " queries but max_queries is " + std::to_string(max_queries));
    }
}

QueryScript generate_script(const CategoryKeywords& keywords, const std::string& probe, const ScriptBounds& bounds,
                            Rng& rng) {
    bounds.validate();
    if (keywords.keywords.empty()) throw ValidationError("keyword list for '" + keywords.label + "' is empty");
    if (trim(probe).empty()) throw ValidationError("probe query is empty");
    if (keywords.verbatim && std::all_of(keywords.keywords.begin(), keywords.keywords.end(),
                                         [&](const auto& q) { return q == probe; }))
        throw ValidationError("every query for '" + keywords.label + "' equals the probe");

    auto user_query = [&] {
        for (;;) {
            std::string q;
            if (keywords.verbatim) {
                q = keywords.keywords[rng.index(keywords.keywords.size())];
            } else {
                const std::size_t group = 1 + rng.index(bounds.max_group);
                std::string joined;
                for (std::size_t i = 0; i < group; ++i) {
                    if (!joined.empty()) joined += ' ';
                    joined += keywords.keywords[rng.index(keywords.keywords.size())];
                }
                const auto& templates = query_templates();
                q = render(templates[rng.index(templates.size())], joined);
            }
            if (q != probe) return q;
        }
    };

    for (std::size_t attempt = 0; attempt < bounds.max_attempts; ++attempt) {
        const std::size_t total = rng.uniform_int(bounds.min_queries, bounds.max_queries);
        // Layout as a list of user-query runs, each followed by a probe.
        std::vector<std::size_t> runs;
        std::size_t used = 0;
        bool ok = true;
        if (bounds.leading_probe) {
            runs.push_back(0);
            used = 1;
        }
        while (used < total) {
            const std::size_t remaining = total - used;
            if (remaining < bounds.min_gap + 1) {
                ok = false;
                break;
            }
            std::size_t gap = rng.uniform_int(bounds.min_gap, bounds.max_gap);
            if (gap + 1 > remaining) gap = remaining - 1;
            // Leave either nothing or room for a full gap plus probe.
            const std::size_t rest = remaining - gap - 1;
            if (rest > 0 && rest < bounds.min_gap + 1) {
                ok = false;
                break;
            }
            runs.push_back(gap);
            used += gap + 1;
        }
        if (!ok || runs.size() < bounds.min_probes) continue;

        QueryScript s;
        s.topic = keywords.label;
        s.probe = probe;
        for (const auto& k : keywords.keywords) {
            if (keywords.verbatim) break;
            if (!s.keywords.empty()) s.keywords += ' ';
            s.keywords += k;
        }
        if (keywords.verbatim) s.keywords = keywords.label;
        for (std::size_t gap : runs) {
            for (std::size_t i = 0; i < gap; ++i) s.entries.push_back({EntryKind::query, user_query(), 0});
            s.entries.push_back({EntryKind::probe, probe, 0});
        }
        std::vector<ScriptEntry> with_waits;
        for (std::size_t i = 0; i < s.entries.size(); ++i) {
            with_waits.push_back(s.entries[i]);
            if (i + 1 < s.entries.size())
                with_waits.push_back({EntryKind::wait, {}, static_cast<unsigned>(rng.uniform_int(bounds.min_wait, bounds.max_wait))});
        }
        s.entries = std::move(with_waits);
        return s;
    }
    throw ValidationError("could not generate a script within the bounds after " + std::to_string(bounds.max_attempts) +
                          " attempts");
}

void validate_script(const QueryScript& script, const ScriptBounds& bounds) {
    const std::size_t n = script.query_count();
    if (n < bounds.min_queries || n > bounds.max_queries)
        throw ValidationError("script has " + std::to_string(n) + " queries, outside [" + std::to_string(bounds.min_queries) +
                              ", " + std::to_string(bounds.max_queries) + "]");
    if (script.probe_count() < bounds.min_probes)
        throw ValidationError("script has " + std::to_string(script.probe_count()) + " probes, fewer than " +
                              std::to_string(bounds.min_probes));
    for (auto g : script.probe_gaps())
        if (g < bounds.min_gap || g > bounds.max_gap)
            throw ValidationError("probe gap of " + std::to_string(g) + " user queries outside bounds");
    for (const auto& e : script.entries)
        if (e.kind == EntryKind::wait && (e.wait_seconds < bounds.min_wait || e.wait_seconds > bounds.max_wait))
            throw ValidationError("wait of " + std::to_string(e.wait_seconds) + " s outside bounds");
}

QueryScript parse_script(std::istream& in) {
    QueryScript s;
    std::string line;
    std::size_t lineno = 0;
    bool saw_query = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '!') {
            const std::string body = trim(std::string_view(t).substr(1));
            if (starts_with(body, "keywords:")) {
                s.keywords = trim(std::string_view(body).substr(9));
            } else if (starts_with(body, "probe:")) {
                if (saw_query) throw ValidationError("probe directive must precede queries", lineno);
                s.probe = trim(std::string_view(body).substr(6));
            } else if (starts_with(body, "topic:")) {
                s.topic = trim(std::string_view(body).substr(6));
            } else if (starts_with(body, "wait")) {
                const std::string num = trim(std::string_view(body).substr(4));
                unsigned v = 0;
                const auto res = std::from_chars(num.data(), num.data() + num.size(), v);
                if (num.empty() || res.ec != std::errc() || res.ptr != num.data() + num.size())
                    throw ValidationError("bad wait directive '" + t + "'", lineno);
                s.entries.push_back({EntryKind::wait, {}, v});
            } else {
                throw ValidationError("unknown directive '" + t + "'", lineno);
            }
            continue;
        }
        saw_query = true;
        const bool is_probe = !s.probe.empty() && t == s.probe;
        s.entries.push_back({is_probe ? EntryKind::probe : EntryKind::query, t, 0});
    }
    return s;
}

QueryScript parse_script_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open script file: " + path);
    return parse_script(in);
}

void write_script(std::ostream& out, const QueryScript& script) {
    out << "! keywords: " << script.keywords << '\n';
    out << "! probe: " << script.probe << '\n';
    if (!script.topic.empty()) out << "! topic: " << script.topic << '\n';
    for (const auto& e : script.entries) {
        if (e.kind == EntryKind::wait)
            out << "! wait " << e.wait_seconds << '\n';
        else
            out << e.text << '\n';
    }
}

ClickPolicy ClickPolicy::for_keywords(const CategoryKeywords& keywords, const TermFilter& filter, double tf_threshold) {
    if (!(tf_threshold > 0)) throw ValidationError("click TF threshold must be positive");
    ClickPolicy p;
    p.tf_threshold = tf_threshold;
    p.keyword_terms = pri::keyword_terms(keywords, filter);
    return p;
}

double keyword_tf(std::string_view item_text, const ClickPolicy& policy, const TermFilter& filter) {
    const auto terms = filter.apply_text(item_text);
    if (terms.empty()) return 0.0;
    const auto hits = std::count_if(terms.begin(), terms.end(), [&](const auto& t) { return policy.keyword_terms.count(t) > 0; });
    return static_cast<double>(hits) / static_cast<double>(terms.size());
}

bool click_decision(std::string_view item_text, const ClickPolicy& policy, const TermFilter& filter,
                    bool is_probe_response) {
    if (is_probe_response) return false;
    return keyword_tf(item_text, policy, filter) > policy.tf_threshold;
}

}  // namespace pri

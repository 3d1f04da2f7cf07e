#pragma once

// Category keyword lists, user-session query scripts with interleaved
// probes, and the keyword-TF click policy.

#include <cstddef>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "pri/random.hpp"
#include "pri/text.hpp"

namespace pri {

struct CategoryKeywords {
    std::string label;
    std::vector<std::string> keywords;  // phrases
    // Catch-all style lists hold whole queries that are issued as-is.
    bool verbatim = false;
};

class KeywordSet {
public:
    KeywordSet() = default;
    explicit KeywordSet(std::vector<CategoryKeywords> topics);

    const std::vector<CategoryKeywords>& topics() const { return topics_; }
    const CategoryKeywords& at(std::string_view label) const;
    bool contains(std::string_view label) const;

private:
    std::vector<CategoryKeywords> topics_;
};

// "label: phrase, phrase, ..." per line; '#' comments.
KeywordSet parse_keywords(std::istream& in);
// One query per line; '#' comments.
std::vector<std::string> parse_query_list(std::istream& in);

// Bundled keyword lists for the eleven sensitive topics.
const KeywordSet& sensitive_keywords();
// Bundled general-interest queries for the catch-all topic.
const std::vector<std::string>& trending_queries();
// Sensitive lists plus the trending queries under `catchall` (verbatim).
KeywordSet default_keywords(const std::string& catchall = "other");

// Filtered terms of all phrases in a keyword list.
std::set<std::string> keyword_terms(const CategoryKeywords& keywords, const TermFilter& filter);

// Templates wrapping keyword groups into query text; "{}" marks the group.
const std::vector<std::string>& query_templates();

enum class EntryKind { query, probe, wait };

struct ScriptEntry {
    EntryKind kind = EntryKind::query;
    std::string text;          // query or probe text
    unsigned wait_seconds = 0; // for waits

    friend bool operator==(const ScriptEntry&, const ScriptEntry&) = default;
};

struct QueryScript {
    std::string topic;
    std::string keywords;  // free text of the keywords header
    std::string probe;
    std::vector<ScriptEntry> entries;

    std::size_t query_count() const;  // user queries plus probes
    std::size_t probe_count() const;
    // Number of user queries between consecutive probes.
    std::vector<std::size_t> probe_gaps() const;

    friend bool operator==(const QueryScript&, const QueryScript&) = default;
};

struct ScriptBounds {
    std::size_t min_queries = 25;
    std::size_t max_queries = 40;
    std::size_t min_gap = 1;
    std::size_t max_gap = 5;
    unsigned min_wait = 1;
    unsigned max_wait = 10;
    std::size_t min_probes = 5;
    std::size_t max_group = 2;   // keywords per user query
    bool leading_probe = true;   // probe before the first user query
    std::size_t max_attempts = 1000;

    void validate() const;
};

QueryScript generate_script(const CategoryKeywords& keywords, const std::string& probe, const ScriptBounds& bounds,
                            Rng& rng);
// Throws ValidationError naming the first violated bound.
void validate_script(const QueryScript& script, const ScriptBounds& bounds);

// Script text: "! keywords: ...", "! probe: ...", optional "! topic: ...",
// "! wait N" and bare query lines. A bare line equal to the probe is a probe.
QueryScript parse_script(std::istream& in);
QueryScript parse_script_file(const std::string& path);
void write_script(std::ostream& out, const QueryScript& script);

struct ClickPolicy {
    double tf_threshold = 0.1;
    unsigned dwell_seconds = 5;
    std::set<std::string> keyword_terms;  // filtered

    static ClickPolicy for_keywords(const CategoryKeywords& keywords, const TermFilter& filter, double tf_threshold = 0.1);
};

// Fraction of the item's filtered terms that are keyword terms.
double keyword_tf(std::string_view item_text, const ClickPolicy& policy, const TermFilter& filter);
bool click_decision(std::string_view item_text, const ClickPolicy& policy, const TermFilter& filter,
                    bool is_probe_response);

}  // namespace pri

#pragma once

// Labelled advert corpora, session captures and the dictionary built from
// training text.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pri/dictionary.hpp"
#include "pri/text.hpp"

namespace pri {

// Sensitive categories plus the catch-all label. Index order is the
// sensitive list followed by the catch-all.
class CategorySet {
public:
    CategorySet(std::vector<std::string> sensitive, std::string catchall = "other");

    const std::vector<std::string>& sensitive() const { return sensitive_; }
    const std::string& catchall() const { return catchall_; }

    // All labels, catch-all last.
    const std::vector<std::string>& labels() const { return all_; }
    std::size_t size() const { return all_.size(); }
    std::size_t catchall_index() const { return all_.size() - 1; }

    std::optional<std::size_t> index_of(std::string_view label) const;
    std::size_t require_index(std::string_view label) const;
    bool contains(std::string_view label) const { return index_of(label).has_value(); }
    bool is_sensitive(std::string_view label) const { return contains(label) && label != catchall_; }

    friend bool operator==(const CategorySet& a, const CategorySet& b) { return a.all_ == b.all_; }

private:
    std::vector<std::string> sensitive_;
    std::string catchall_;
    std::vector<std::string> all_;
};

// The eleven sensitive topics studied plus "other".
CategorySet default_categories();

struct LabeledAdvert {
    std::string label;
    std::string text;
};

struct Advert {
    std::string text;
    std::size_t position = 0;  // slot index on the page
};

struct Link {
    std::string title;
    std::string snippet;
};

struct ResultPage {
    std::vector<Link> links;
    std::vector<Advert> adverts;
    std::size_t ad_slots = 0;

    std::size_t item_count() const { return links.size() + adverts.size(); }
    // Visible text of item i: links first, then adverts.
    std::string item_text(std::size_t i) const;
};

struct Interaction {
    std::size_t step = 0;  // 1-based
    std::string query;
    ResultPage page;
    std::vector<std::size_t> clicked;
    bool is_probe = false;
};

struct SessionTrace {
    std::string session_id;
    std::string topic;
    std::vector<Interaction> interactions;

    std::vector<const Interaction*> probes() const;
};

// `label<TAB>advert text` per line; blank lines and lines starting with '#'
// are skipped.
std::vector<LabeledAdvert> load_corpus(std::istream& in, const CategorySet& categories);
std::vector<LabeledAdvert> load_corpus_file(const std::string& path, const CategorySet& categories);
void write_corpus(std::ostream& out, const std::vector<LabeledAdvert>& corpus);

// Every distinct filtered term of the corpus, ids by first occurrence.
Dictionary build_dictionary(const std::vector<LabeledAdvert>& corpus, const TermFilter& filter);

inline constexpr std::string_view kCaptureHeader = "#pri-capture v1";

// One JSON object per interaction after the header line. Records of a
// session are contiguous with strictly increasing steps.
std::vector<SessionTrace> parse_capture(std::istream& in);
std::vector<SessionTrace> parse_capture_file(const std::string& path);
void write_capture(std::ostream& out, const std::vector<SessionTrace>& traces);
void write_capture_file(const std::string& path, const std::vector<SessionTrace>& traces);

// Checks the per-trace invariants parse_capture enforces.
void validate_trace(const SessionTrace& trace);

}  // namespace pri

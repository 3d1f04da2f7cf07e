#pragma once

// Text normalization: the filter map from raw advert/query text to
// content-bearing terms (tokenize, drop stopwords, Porter-stem).

#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pri/rational.hpp"

namespace pri {

class Dictionary;

using TermSequence = std::vector<std::string>;

// Maximal runs of ASCII alphanumerics, lowercased. Everything else separates.
std::vector<std::string> tokenize(std::string_view text);

// Martin Porter's suffix stripper (reference C variant: bli->ble, logi->log),
// preceded by a small exception table. Words containing non-letters are
// returned unchanged.
std::string porter_stem(std::string_view word);

class TermFilter {
public:
    // Bundled English stopword list.
    TermFilter();
    TermFilter(std::set<std::string> stopwords, std::string stopword_source);

    // One word per line, '#' starts a comment, blank lines ignored.
    static TermFilter from_stream(std::istream& in, std::string source);
    static TermFilter from_file(const std::string& path);

    bool is_stopword(std::string_view word) const;

    // Maps one lowercase token to its term, or "" when it maps to nothing.
    // A stem that collides with a stopword (ones -> on) maps to nothing.
    std::string map(std::string_view token) const;

    TermSequence apply(std::span<const std::string> tokens) const;
    TermSequence apply_text(std::string_view text) const { return apply(tokenize(text)); }

    const std::set<std::string>& stopwords() const { return stopwords_; }
    const std::string& stopword_source() const { return source_; }
    static constexpr std::string_view stemmer_name() { return "porter"; }

private:
    std::set<std::string> stopwords_;
    std::string source_;
};

TermSequence apply_filter(std::span<const std::string> tokens, const TermFilter& filter);

// The bundled list, one word per entry.
const std::vector<std::string>& default_stopwords();

// Frequency of `term` in `sequence`, 0 when term is not in the dictionary
// or the sequence is empty.
double term_frequency(std::string_view term, std::span<const std::string> sequence,
                      const Dictionary& dictionary);
Rational term_frequency_exact(std::string_view term, std::span<const std::string> sequence,
                              const Dictionary& dictionary);

}  // namespace pri

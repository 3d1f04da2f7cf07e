#pragma once

// The trained PRI model and the per-probe score M(c) computed from the
// adverts on one result page.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pri/corpus.hpp"
#include "pri/dictionary.hpp"
#include "pri/rational.hpp"
#include "pri/text.hpp"

namespace pri {

// Term statistics indexed [term id] and [category index][term id].
template <typename T>
struct BasicTermStats {
    std::vector<T> total;
    std::vector<std::vector<T>> per_category;
};

using TermStats = BasicTermStats<double>;
using ExactTermStats = BasicTermStats<Rational>;

class PriModel {
public:
    PriModel(Dictionary dictionary, TermStats stats, CategorySet categories, TermFilter filter,
             std::optional<ExactTermStats> exact = std::nullopt, std::vector<std::string> warnings = {});

    const Dictionary& dictionary() const { return dictionary_; }
    const TermStats& stats() const { return stats_; }
    const CategorySet& categories() const { return categories_; }
    const TermFilter& filter() const { return filter_; }
    // Present for freshly trained models; models loaded from file carry doubles only.
    const std::optional<ExactTermStats>& exact_stats() const { return exact_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    // ratio(c, w) = per_category[c][w] / total[w], row-major categories x terms.
    const std::vector<double>& ratios() const { return ratios_; }

private:
    Dictionary dictionary_;
    TermStats stats_;
    CategorySet categories_;
    TermFilter filter_;
    std::optional<ExactTermStats> exact_;
    std::vector<std::string> warnings_;
    std::vector<double> ratios_;
};

struct ScoreVector {
    std::size_t step = 0;
    std::vector<double> scores;  // aligned with CategorySet::labels()

    double at(const CategorySet& categories, std::string_view label) const {
        return scores.at(categories.require_index(label));
    }
};

PriModel train(const std::vector<LabeledAdvert>& corpus, const CategorySet& categories, const TermFilter& filter);

// Sum over the page's adverts of phi(w|a), indexed by term id.
std::vector<double> page_term_mass(const PriModel& model, const std::vector<Advert>& adverts);
std::vector<Rational> page_term_mass_exact(const PriModel& model, const std::vector<Advert>& adverts);

ScoreVector score(const PriModel& model, const std::vector<Advert>& adverts, std::size_t step = 0);
// Exact evaluation; requires exact_stats().
std::vector<Rational> score_exact(const PriModel& model, const std::vector<Advert>& adverts);

inline constexpr std::string_view kModelHeader = "#pri-model v1";

void write_model(std::ostream& out, const PriModel& model);
PriModel read_model(std::istream& in);
void write_model_file(const std::string& path, const PriModel& model);
PriModel read_model_file(const std::string& path);

}  // namespace pri

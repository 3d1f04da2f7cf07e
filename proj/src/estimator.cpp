#include "pri/estimator.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "pri/error.hpp"
#include "pri/kernels.hpp"

namespace pri {
namespace {

// Counts of dictionary terms in one filtered advert, with the advert length.
struct AdvertCounts {
    std::map<TermId, long long> counts;
    long long length = 0;
};

AdvertCounts count_terms(const Dictionary& dict, const TermFilter& filter, std::string_view text) {
    AdvertCounts out;
    const auto terms = filter.apply_text(text);
    out.length = static_cast<long long>(terms.size());
    for (const auto& t : terms)
        if (auto id = dict.find(t)) ++out.counts[*id];
    return out;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, std::size_t line) {
    double v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ValidationError("bad number '" + std::string(s) + "'", line);
    return v;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto tab = line.find('\t', start);
        out.push_back(line.substr(start, tab - start));
        if (tab == std::string::npos) break;
        start = tab + 1;
    }
    return out;
}

}  // namespace

PriModel::PriModel(Dictionary dictionary, TermStats stats, CategorySet categories, TermFilter filter,
                   std::optional<ExactTermStats> exact, std::vector<std::string> warnings)
    : dictionary_(std::move(dictionary)),
      stats_(std::move(stats)),
      categories_(std::move(categories)),
      filter_(std::move(filter)),
      exact_(std::move(exact)),
      warnings_(std::move(warnings)) {
    const std::size_t d = dictionary_.size(), c = categories_.size();
    if (stats_.total.size() != d || stats_.per_category.size() != c)
        throw ValidationError("term statistics do not match dictionary and categories");
    ratios_.assign(c * d, 0.0);
    for (std::size_t ci = 0; ci < c; ++ci) {
        if (stats_.per_category[ci].size() != d) throw ValidationError("term statistics do not match dictionary");
        for (std::size_t w = 0; w < d; ++w) {
            if (!(stats_.total[w] > 0))
                throw ValidationError("term '" + dictionary_.term(w) + "' has zero total frequency");
            ratios_[ci * d + w] = stats_.per_category[ci][w] / stats_.total[w];
        }
    }
}

PriModel train(const std::vector<LabeledAdvert>& corpus, const CategorySet& categories, const TermFilter& filter) {
    Dictionary dict = build_dictionary(corpus, filter);
    const std::size_t d = dict.size(), c = categories.size();

    ExactTermStats exact;
    exact.total.assign(d, Rational(0));
    exact.per_category.assign(c, std::vector<Rational>(d, Rational(0)));
    std::vector<std::size_t> adverts_per_category(c, 0);

    for (const auto& advert : corpus) {
        const std::size_t ci = categories.require_index(advert.label);
        ++adverts_per_category[ci];
        const auto counts = count_terms(dict, filter, advert.text);
        for (const auto& [id, n] : counts.counts) {
            const Rational phi(n, counts.length);
            exact.total[id] += phi;
            exact.per_category[ci][id] += phi;
        }
    }

    std::vector<std::string> warnings;
    for (std::size_t ci = 0; ci < c; ++ci)
        if (adverts_per_category[ci] == 0)
            warnings.push_back("category '" + categories.labels()[ci] + "' has no training adverts; its score is always 0");

    TermStats stats;
    stats.total.resize(d);
    stats.per_category.assign(c, std::vector<double>(d));
    for (std::size_t w = 0; w < d; ++w) {
        stats.total[w] = to_double(exact.total[w]);
        for (std::size_t ci = 0; ci < c; ++ci) stats.per_category[ci][w] = to_double(exact.per_category[ci][w]);
    }
    return PriModel(std::move(dict), std::move(stats), categories, filter, std::move(exact), std::move(warnings));
}

std::vector<double> page_term_mass(const PriModel& model, const std::vector<Advert>& adverts) {
    std::vector<double> mass(model.dictionary().size(), 0.0);
    for (const auto& a : adverts) {
        const auto counts = count_terms(model.dictionary(), model.filter(), a.text);
        for (const auto& [id, n] : counts.counts)
            mass[id] += static_cast<double>(n) / static_cast<double>(counts.length);
    }
    return mass;
}

std::vector<Rational> page_term_mass_exact(const PriModel& model, const std::vector<Advert>& adverts) {
    std::vector<Rational> mass(model.dictionary().size(), Rational(0));
    for (const auto& a : adverts) {
        const auto counts = count_terms(model.dictionary(), model.filter(), a.text);
        for (const auto& [id, n] : counts.counts) mass[id] += Rational(n, counts.length);
    }
    return mass;
}

ScoreVector score(const PriModel& model, const std::vector<Advert>& adverts, std::size_t step) {
    ScoreVector out;
    out.step = step;
    out.scores.assign(model.categories().size(), 0.0);
    if (adverts.empty()) return out;
    const auto mass = page_term_mass(model, adverts);
    kernels::matvec(model.ratios(), model.categories().size(), model.dictionary().size(), mass, out.scores);
    return out;
}

std::vector<Rational> score_exact(const PriModel& model, const std::vector<Advert>& adverts) {
    if (!model.exact_stats()) throw std::logic_error("model has no exact statistics");
    const auto& ex = *model.exact_stats();
    const auto mass = page_term_mass_exact(model, adverts);
    std::vector<Rational> out(model.categories().size(), Rational(0));
    for (std::size_t ci = 0; ci < out.size(); ++ci)
        for (std::size_t w = 0; w < mass.size(); ++w)
            if (mass[w] != 0) out[ci] += ex.per_category[ci][w] / ex.total[w] * mass[w];
    return out;
}

void write_model(std::ostream& out, const PriModel& model) {
    const auto& cats = model.categories();
    out << kModelHeader << '\n';
    out << "sensitive";
    for (const auto& s : cats.sensitive()) out << '\t' << s;
    out << '\n' << "catchall\t" << cats.catchall() << '\n';
    out << "stemmer\t" << TermFilter::stemmer_name() << '\n';
    out << "stopword_source\t" << model.filter().stopword_source() << '\n';
    out << "stopwords";
    for (const auto& s : model.filter().stopwords()) out << '\t' << s;
    out << '\n';
    for (const auto& w : model.warnings()) out << "warning\t" << w << '\n';
    const auto& dict = model.dictionary();
    for (TermId id = 0; id < dict.size(); ++id) out << "term\t" << id << '\t' << dict.term(id) << '\n';
    const auto& st = model.stats();
    for (TermId id = 0; id < dict.size(); ++id) {
        out << "stat\t" << id << '\t' << format_double(st.total[id]);
        for (std::size_t ci = 0; ci < cats.size(); ++ci) out << '\t' << format_double(st.per_category[ci][id]);
        out << '\n';
    }
}

PriModel read_model(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kModelHeader)
        throw ValidationError("missing model header '" + std::string(kModelHeader) + "'", 1);
    std::optional<std::vector<std::string>> sensitive;
    std::optional<std::string> catchall, source;
    std::set<std::string> stopwords;
    std::vector<std::string> warnings;
    Dictionary dict;
    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split_tabs(line);
        const std::string& key = f[0];
        if (key == "sensitive") {
            sensitive.emplace(f.begin() + 1, f.end());
        } else if (key == "catchall" && f.size() == 2) {
            catchall = f[1];
        } else if (key == "stemmer" && f.size() == 2) {
            if (f[1] != TermFilter::stemmer_name()) throw ValidationError("unsupported stemmer '" + f[1] + "'", lineno);
        } else if (key == "stopword_source" && f.size() == 2) {
            source = f[1];
        } else if (key == "stopwords") {
            stopwords.insert(f.begin() + 1, f.end());
        } else if (key == "warning" && f.size() == 2) {
            warnings.push_back(f[1]);
        } else if (key == "term" && f.size() == 3) {
            if (f[1] != std::to_string(dict.size())) throw ValidationError("term ids must be dense and ordered", lineno);
            if (dict.contains(f[2])) throw ValidationError("duplicate term '" + f[2] + "'", lineno);
            dict.add(f[2]);
        } else if (key == "stat" && f.size() >= 3) {
            if (f[1] != std::to_string(rows.size())) throw ValidationError("stat ids must be dense and ordered", lineno);
            std::vector<double> row;
            for (std::size_t i = 2; i < f.size(); ++i) row.push_back(parse_double(f[i], lineno));
            rows.push_back(std::move(row));
        } else {
            throw ValidationError("unrecognized model line '" + key + "'", lineno);
        }
    }
    if (!sensitive || !catchall) throw ValidationError("model lacks category declarations");
    CategorySet cats(*sensitive, *catchall);
    if (rows.size() != dict.size()) throw ValidationError("model has " + std::to_string(dict.size()) + " terms but " +
                                                          std::to_string(rows.size()) + " stat lines");
    TermStats stats;
    stats.per_category.assign(cats.size(), std::vector<double>(dict.size()));
    for (std::size_t w = 0; w < rows.size(); ++w) {
        if (rows[w].size() != cats.size() + 1)
            throw ValidationError("stat line for term " + std::to_string(w) + " has the wrong number of values");
        stats.total.push_back(rows[w][0]);
        for (std::size_t ci = 0; ci < cats.size(); ++ci) stats.per_category[ci][w] = rows[w][ci + 1];
    }
    return PriModel(std::move(dict), std::move(stats), std::move(cats),
                    TermFilter(std::move(stopwords), source.value_or("model")), std::nullopt, std::move(warnings));
}

void write_model_file(const std::string& path, const PriModel& model) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    write_model(out, model);
}

PriModel read_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model file: " + path);
    return read_model(in);
}

}  // namespace pri

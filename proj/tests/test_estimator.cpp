#include <random>
#include <sstream>

#include "doctest.h"
#include "pri/error.hpp"
#include "pri/estimator.hpp"
#include "pri/kernels.hpp"
#include "support/synthetic.hpp"

using namespace pri;

namespace {

PriModel worked_model() {
    const CategorySet cats({"prostate"}, "other");
    return train(load_corpus_file(PRI_SOURCE_DIR "/data/examples/worked_corpus.tsv", cats), cats, TermFilter());
}

const Rational& exact_total(const PriModel& m, const char* term) {
    return m.exact_stats()->total.at(*m.dictionary().find(term));
}
const Rational& exact_cat(const PriModel& m, const char* cat, const char* term) {
    return m.exact_stats()->per_category.at(m.categories().require_index(cat)).at(*m.dictionary().find(term));
}

}  // namespace

TEST_CASE("worked example term statistics") {
    const auto m = worked_model();
    REQUIRE(m.exact_stats());
    CHECK(m.dictionary().size() == 13);
    for (const char* t : {"prostat", "cancer"}) {
        CHECK(exact_total(m, t) == Rational(5, 12));
        CHECK(exact_cat(m, "prostate", t) == Rational(5, 12));
        CHECK(exact_cat(m, "other", t) == 0);
    }
    for (const char* t : {"diabet", "discov"}) {
        CHECK(exact_total(m, t) == Rational(5, 12));
        CHECK(exact_cat(m, "other", t) == Rational(5, 12));
    }
    CHECK(exact_total(m, "risk") == Rational(5, 12));
    CHECK(exact_cat(m, "prostate", "risk") == Rational(1, 6));
    CHECK(exact_cat(m, "other", "risk") == Rational(1, 4));
    for (const char* t : {"possibl", "learn", "here"}) {
        CHECK(exact_total(m, t) == Rational(1, 6));
        CHECK(exact_cat(m, "prostate", t) == Rational(1, 6));
        CHECK(exact_cat(m, "other", t) == 0);
    }
    for (const char* t : {"treat", "suffer"}) {
        CHECK(exact_total(m, t) == Rational(5, 12));
        CHECK(exact_cat(m, "prostate", t) == Rational(1, 4));
        CHECK(exact_cat(m, "other", t) == Rational(1, 6));
    }
    for (const char* t : {"revers", "natur"}) {
        CHECK(exact_total(m, t) == Rational(1, 6));
        CHECK(exact_cat(m, "prostate", t) == 0);
        CHECK(exact_cat(m, "other", t) == Rational(1, 6));
    }
    // The published table lists 1/6 for this term; the four-term advert gives 1/4.
    CHECK(exact_total(m, "lifetim") == Rational(1, 4));
    CHECK(m.warnings().empty());
}

TEST_CASE("worked example probe advert score") {
    const auto m = worked_model();
    const std::vector<Advert> page{{"patient choose safer treatment here", 0}};
    const auto exact = score_exact(m, page);
    CHECK(exact[m.categories().require_index("prostate")] == Rational(8, 25));
    CHECK(exact[m.categories().require_index("other")] == Rational(2, 25));
    const auto s = score(m, page, 3);
    CHECK(s.step == 3);
    CHECK(s.at(m.categories(), "prostate") == doctest::Approx(0.32).epsilon(1e-12));
    CHECK(s.at(m.categories(), "other") == doctest::Approx(0.08).epsilon(1e-12));
}

TEST_CASE("score edge cases") {
    const auto m = worked_model();
    const auto empty = score(m, {});
    CHECK(empty.scores == std::vector<double>(2, 0.0));
    const auto none = score(m, {{"zebra giraffe", 0}});
    CHECK(none.scores == std::vector<double>(2, 0.0));

    const CategorySet cats({"prostate"}, "other");
    const auto tiny = train({{"other", "help advice"}}, cats, TermFilter());
    CHECK(tiny.exact_stats()->total[*tiny.dictionary().find("help")] == Rational(1, 2));
    CHECK(tiny.exact_stats()->per_category[1][*tiny.dictionary().find("help")] == Rational(1, 2));
    REQUIRE(tiny.warnings().size() == 1);
    CHECK(tiny.warnings()[0].find("prostate") != std::string::npos);

    CHECK_THROWS_AS(train({}, cats, TermFilter()), ValidationError);
}

TEST_CASE("score matches the brute-force oracle on random synthetic corpora") {
    std::mt19937_64 rng(2024);
    const TermFilter filter;
    for (int trial = 0; trial < 200; ++trial) {
        const auto sc = testing::make_synthetic(rng);
        const auto model = train(sc.corpus, sc.categories, filter);
        CHECK(model.dictionary().size() <= 40);
        const auto fast = score(model, sc.page);
        const auto oracle = testing::brute_force_score(sc, filter);
        REQUIRE(fast.scores.size() == oracle.size());
        for (std::size_t c = 0; c < oracle.size(); ++c) CHECK(std::abs(fast.scores[c] - oracle[c]) <= 1e-12);
    }
}

TEST_CASE("estimator invariants") {
    std::mt19937_64 rng(99);
    const TermFilter filter;
    for (int trial = 0; trial < 100; ++trial) {
        const auto sc = testing::make_synthetic(rng);
        const auto model = train(sc.corpus, sc.categories, filter);
        const auto& ex = *model.exact_stats();

        for (std::size_t w = 0; w < model.dictionary().size(); ++w) {
            Rational sum = 0;
            for (const auto& row : ex.per_category) sum += row[w];
            CHECK(sum == ex.total[w]);
            CHECK(ex.total[w] > 0);
        }

        // Additivity: summing the score over categories gives the page's dictionary mass.
        const auto exact = score_exact(model, sc.page);
        Rational lhs = 0, rhs = 0;
        for (const auto& v : exact) lhs += v;
        for (const auto& v : page_term_mass_exact(model, sc.page)) rhs += v;
        CHECK(lhs == rhs);

        const auto s = score(model, sc.page);
        for (double v : s.scores) {
            CHECK(v >= 0.0);
            CHECK(v <= static_cast<double>(sc.page.size()) + 1e-12);
        }
        CHECK(score(model, sc.page).scores == s.scores);

        // Monotonicity: appending an advert built only from terms seen in category c.
        const std::size_t c = rng() % model.categories().size();
        std::string text;
        for (std::size_t w = 0; w < model.dictionary().size(); ++w)
            if (ex.per_category[c][w] > 0) text += model.dictionary().term(w) + " ";
        if (!text.empty()) {
            auto page = sc.page;
            page.push_back({text, page.size()});
            CHECK(score_exact(model, page)[c] >= exact[c]);
        }
    }
}

TEST_CASE("model file round trip") {
    const auto m = worked_model();
    std::ostringstream out;
    write_model(out, m);
    std::istringstream in(out.str());
    const auto back = read_model(in);
    CHECK(back.dictionary() == m.dictionary());
    CHECK(back.categories() == m.categories());
    CHECK(back.filter().stopwords() == m.filter().stopwords());
    CHECK(back.stats().total == m.stats().total);
    CHECK(back.stats().per_category == m.stats().per_category);
    const std::vector<Advert> page{{"patient choose safer treatment here", 0}};
    CHECK(score(back, page).scores == score(m, page).scores);
    std::ostringstream again;
    write_model(again, back);
    CHECK(again.str() == out.str());
    CHECK(out.str().find("#pri-model v1\n") == 0);

    std::istringstream bad("#pri-model v1\nsensitive\tprostate\ncatchall\tother\nterm\t0\tfoo\nstat\t0\t1\tx\t0\n");
    CHECK_THROWS_WITH_AS(read_model(bad), doctest::Contains("line 5"), ValidationError);
}

TEST_CASE("scores agree across kernel variants") {
    std::mt19937_64 rng(5);
    const auto saved = kernels::active_isa();
    for (int trial = 0; trial < 50; ++trial) {
        const auto sc = testing::make_synthetic(rng);
        const auto model = train(sc.corpus, sc.categories, TermFilter());
        kernels::force_isa(kernels::Isa::scalar);
        const auto ref = score(model, sc.page).scores;
        for (auto isa : {kernels::Isa::avx2, kernels::Isa::neon}) {
            if (!kernels::isa_available(isa)) continue;
            kernels::force_isa(isa);
            const auto got = score(model, sc.page).scores;
            for (std::size_t c = 0; c < ref.size(); ++c) CHECK(std::abs(got[c] - ref[c]) <= 1e-12);
        }
    }
    kernels::force_isa(saved);
}

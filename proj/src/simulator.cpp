#include "pri/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pri/error.hpp"

namespace pri {
namespace {

const std::vector<std::string>& commercial_words() {
    static const std::vector<std::string> words{"free",    "online", "official", "guide",   "expert",
                                                "trusted", "compare", "offers",  "today",   "local",
                                                "services", "apply", "deals",    "rated",   "instant"};
    return words;
}

const std::vector<std::string>& consumer_words() {
    static const std::vector<std::string> words{
        "holiday", "flights", "insurance", "broadband", "phone",    "shoes",  "fashion", "car",
        "tyres",   "recipes", "furniture", "garden",    "laptop",   "tv",     "streaming", "music",
        "concert", "tickets", "hotel",     "cruise",    "camera",   "watch",  "kitchen", "sofa"};
    return words;
}

const std::vector<std::string>& link_words() {
    static const std::vector<std::string> words{"information", "article", "review", "page",    "resources",
                                                "overview",    "wiki",    "home",   "latest",  "report",
                                                "story",       "library", "index",  "summary", "archive"};
    return words;
}

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
    return v[rng.index(v.size())];
}

std::string make_ad(const std::vector<const CategoryKeywords*>& sources, Rng& rng) {
    std::string ad;
    auto add = [&](const std::string& w) {
        if (!ad.empty()) ad += ' ';
        ad += w;
    };
    for (const auto* src : sources) add(pick(src->keywords, rng));
    add(pick(commercial_words(), rng));
    if (sources.size() == 1) add(pick(sources[0]->keywords, rng));
    add(pick(commercial_words(), rng));
    return ad;
}

std::string make_consumer_ad(Rng& rng) {
    std::string ad = pick(consumer_words(), rng);
    ad += ' ' + pick(commercial_words(), rng);
    ad += ' ' + pick(consumer_words(), rng);
    ad += ' ' + pick(consumer_words(), rng);
    ad += ' ' + pick(commercial_words(), rng);
    return ad;
}

}  // namespace

void EngineConfig::validate() const {
    if (!(click_boost >= 1.0)) throw ValidationError("click_boost must be at least 1");
    if (ads_per_page == 0) throw ValidationError("ads_per_page must be positive");
    if (!(pool_diversity > 0) || pool_diversity > static_cast<double>(ads_per_page))
        throw ValidationError("pool_diversity must be in (0, ads_per_page]");
    if (!(query_weight >= 0)) throw ValidationError("query_weight must be nonnegative");
    if (!(explore_weight >= 0)) throw ValidationError("explore_weight must be nonnegative");
    if (pool_size == 0) throw ValidationError("pool_size must be positive");
    double total = 0;
    for (const auto& [label, w] : prior_knowledge) {
        if (!(w >= 0) || !std::isfinite(w)) throw ValidationError("prior weight for '" + label + "' must be nonnegative");
        total += w;
    }
    if (!prior_knowledge.empty() && !(total > 0)) throw ValidationError("prior weights sum to zero");
    for (const auto& sp : shared_pools) {
        if (sp.members.size() < 2) throw ValidationError("a shared pool needs at least two member topics");
        if (!(sp.weight >= 0 && sp.weight <= 1)) throw ValidationError("shared pool weight must be in [0, 1]");
    }
}

const std::set<std::string>& ambiguous_terms() {
    static const std::set<std::string> terms = [] {
        const TermFilter f;
        std::set<std::string> out;
        for (const char* w : {"help", "advice", "symptom", "symptoms", "cause", "causes"})
            out.insert(f.map(w));
        return out;
    }();
    return terms;
}

std::vector<std::set<std::string>> topic_vocabularies(const KeywordSet& keywords, const CategorySet& categories,
                                                      const TermFilter& filter) {
    std::vector<std::set<std::string>> vocab(categories.size());
    std::set<std::string> sensitive_terms;
    for (std::size_t c = 0; c < categories.size(); ++c) {
        const auto& label = categories.labels()[c];
        if (!keywords.contains(label)) throw ValidationError("no keyword list for category '" + label + "'");
        const auto& kw = keywords.at(label);
        if (kw.verbatim) continue;
        for (const auto& t : keyword_terms(kw, filter))
            if (!ambiguous_terms().count(t)) {
                vocab[c].insert(t);
                sensitive_terms.insert(t);
            }
    }
    std::set<std::string> template_terms;
    for (const auto& tmpl : query_templates())
        for (const auto& t : filter.apply_text(tmpl)) template_terms.insert(t);
    for (std::size_t c = 0; c < categories.size(); ++c) {
        const auto& kw = keywords.at(categories.labels()[c]);
        if (!kw.verbatim) continue;
        for (const auto& t : keyword_terms(kw, filter))
            if (!ambiguous_terms().count(t) && !sensitive_terms.count(t) && !template_terms.count(t)) vocab[c].insert(t);
    }
    return vocab;
}

AdPool build_ad_pools(const KeywordSet& keywords, const CategorySet& categories, const EngineConfig& config,
                      std::uint64_t seed) {
    config.validate();
    AdPool pools;
    for (const auto& label : categories.labels()) {
        if (!keywords.contains(label)) throw ValidationError("no keyword list for category '" + label + "'");
        const auto& kw = keywords.at(label);
        Rng rng(derive_seed(seed, "ads/" + label));
        std::vector<std::string> ads;
        for (std::size_t i = 0; i < config.pool_size; ++i)
            ads.push_back(kw.verbatim ? make_consumer_ad(rng) : make_ad({&kw}, rng));
        pools.topic_ads.emplace(label, std::move(ads));
    }
    for (const auto& spec : config.shared_pools) {
        AdPool::Shared shared{spec.members, spec.weight, {}};
        std::vector<const CategoryKeywords*> sources;
        std::string name = "shared";
        for (const auto& m : spec.members) {
            if (!categories.contains(m)) throw ValidationError("shared pool member '" + m + "' is not a category");
            sources.push_back(&keywords.at(m));
            name += '/' + m;
        }
        Rng rng(derive_seed(seed, name));
        for (std::size_t i = 0; i < config.pool_size; ++i) shared.ads.push_back(make_ad(sources, rng));
        pools.shared.push_back(std::move(shared));
    }
    return pools;
}

std::vector<Link> query_links(const std::string& query, std::size_t count, const TermFilter& filter) {
    std::vector<std::string> words;
    for (const auto& tok : tokenize(query))
        if (!filter.map(tok).empty()) words.push_back(tok);
    Rng rng(fnv1a64(query));
    std::vector<Link> links;
    for (std::size_t i = 0; i < count; ++i) {
        Link l;
        l.title = words.empty() ? pick(link_words(), rng) : pick(words, rng);
        l.title += ' ' + pick(link_words(), rng);
        l.snippet = pick(link_words(), rng);
        if (!words.empty()) l.snippet += ' ' + pick(words, rng);
        l.snippet += ' ' + pick(link_words(), rng) + ' ' + pick(link_words(), rng);
        links.push_back(std::move(l));
    }
    return links;
}

Engine::Engine(EngineConfig config, const AdPool& pools, const CategorySet& categories, const KeywordSet& keywords,
               TermFilter filter)
    : config_(std::move(config)),
      categories_(categories),
      filter_(std::move(filter)),
      pools_(pools),
      rng_(config_.seed) {
    config_.validate();
    vocab_ = topic_vocabularies(keywords, categories_, filter_);
    topic_shared_.assign(categories_.size(), nullptr);
    for (const auto& label : categories_.labels()) {
        const auto it = pools_.topic_ads.find(label);
        if (it == pools_.topic_ads.end() || it->second.empty())
            throw ValidationError("no advert pool for category '" + label + "'");
        topic_pools_.push_back(&it->second);
    }
    for (const auto& shared : pools_.shared) {
        if (shared.ads.empty()) throw ValidationError("empty shared advert pool");
        for (const auto& m : shared.members) {
            const auto c = categories_.require_index(m);
            if (!topic_shared_[c]) topic_shared_[c] = &shared;
        }
    }
    weights_.assign(categories_.size(), 0.0);
    if (config_.prior_knowledge.empty()) {
        std::fill(weights_.begin(), weights_.end(), 1.0 / static_cast<double>(weights_.size()));
    } else {
        double total = 0;
        for (const auto& [label, w] : config_.prior_knowledge) {
            weights_[categories_.require_index(label)] = w;
            total += w;
        }
        for (auto& w : weights_) w /= total;
    }
}

std::vector<double> Engine::belief() const {
    const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    std::vector<double> b(weights_.size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = weights_[i] / total;
    return b;
}

std::set<std::size_t> Engine::matched_topics(const std::string& query) const {
    std::set<std::size_t> out;
    const auto terms = filter_.apply_text(query);
    for (std::size_t c = 0; c < vocab_.size(); ++c)
        for (const auto& t : terms)
            if (vocab_[c].count(t)) {
                out.insert(c);
                break;
            }
    return out;
}

void Engine::apply(const Update& u) {
    for (auto c : u.increments) weights_[c] += config_.query_weight;
    for (auto c : u.boosts) weights_[c] *= config_.click_boost;
    if (u.explore)
        for (auto& w : weights_) w += config_.explore_weight / static_cast<double>(weights_.size());
    // Rescale so repeated boosts cannot overflow; belief is scale-free.
    const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    if (total > 1e100)
        for (auto& w : weights_) w /= total;
}

const std::vector<std::string>& Engine::pool_for(std::size_t topic, double u_shared) const {
    if (const auto* shared = topic_shared_[topic]; shared && u_shared < shared->weight) return shared->ads;
    return *topic_pools_[topic];
}

ResultPage Engine::submit_query(const std::string& query) {
    // Whether the previous page drew a click is only known now.
    if (served_ && last_topical_ && !last_clicked_ && config_.explore_weight > 0) {
        if (pending_.empty())
            apply({{}, {}, true});
        else
            pending_.back().explore = true;
    }
    ResultPage page;
    page.ad_slots = config_.ads_per_page;
    const auto matched = matched_topics(query);

    page.links = query_links(query, config_.links_per_page, filter_);

    // A fixed number of draws per page keeps paired runs on common random numbers.
    const double u_count = rng_.uniform();
    const auto whole = static_cast<std::size_t>(std::floor(config_.pool_diversity));
    const double frac = config_.pool_diversity - static_cast<double>(whole);
    const std::size_t n_ads = std::min(config_.ads_per_page, std::max<std::size_t>(1, whole + (u_count < frac ? 1 : 0)));

    const auto b = belief();
    std::vector<std::size_t> order(b.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return b[x] > b[y]; });

    std::vector<std::vector<std::size_t>> item_topics(page.links.size(),
                                                      std::vector<std::size_t>(matched.begin(), matched.end()));
    for (std::size_t slot = 0; slot < config_.ads_per_page; ++slot) {
        const double u_topic = rng_.uniform();
        const double u_shared = rng_.uniform();
        const double u_ad = rng_.uniform();
        if (slot >= n_ads) continue;
        std::size_t topic = order.back();
        double acc = 0;
        for (auto c : order) {
            acc += b[c];
            if (u_topic < acc) {
                topic = c;
                break;
            }
        }
        const auto& pool = pool_for(topic, u_shared);
        std::size_t idx = std::min(pool.size() - 1, static_cast<std::size_t>(u_ad * static_cast<double>(pool.size())));
        for (std::size_t tries = 0; tries < pool.size(); ++tries) {
            const bool used = std::any_of(page.adverts.begin(), page.adverts.end(),
                                          [&](const Advert& a) { return a.text == pool[idx]; });
            if (!used) break;
            idx = (idx + 1) % pool.size();
        }
        page.adverts.push_back({pool[idx], slot});
        item_topics.push_back({topic});
    }
    // Remaining slots repeat the unique adverts in order.
    if (config_.fill_slots)
        for (std::size_t slot = n_ads; slot < config_.ads_per_page && n_ads > 0; ++slot) {
            page.adverts.push_back({page.adverts[slot % n_ads].text, slot});
            item_topics.push_back(item_topics[page.links.size() + slot % n_ads]);
        }

    pending_.push_back({std::vector<std::size_t>(matched.begin(), matched.end()), {}});
    while (pending_.size() > config_.adaptation_lag) {
        apply(pending_.front());
        pending_.pop_front();
    }
    last_item_topics_ = std::move(item_topics);
    served_ = true;
    last_topical_ = !matched.empty();
    last_clicked_ = false;
    return page;
}

void Engine::register_click(std::size_t item_index) {
    if (!served_) throw ValidationError("click before any page was served");
    if (item_index >= last_item_topics_.size())
        throw ValidationError("clicked item " + std::to_string(item_index) + " not on the last page");
    const auto& topics = last_item_topics_[item_index];
    last_clicked_ = true;
    if (pending_.empty()) {
        apply({{}, topics});
    } else {
        auto& boosts = pending_.back().boosts;
        boosts.insert(boosts.end(), topics.begin(), topics.end());
    }
}

}  // namespace pri

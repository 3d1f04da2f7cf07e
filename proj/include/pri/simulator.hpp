#pragma once

// Seeded stand-in for a personalising search engine: a belief over topics
// driven by queries and clicks, query-determined links, belief-targeted
// adverts, and a queue that delays belief updates.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pri/corpus.hpp"
#include "pri/random.hpp"
#include "pri/scripts.hpp"
#include "pri/text.hpp"

namespace pri {

struct SharedPoolSpec {
    std::vector<std::string> members;
    double weight = 0.0;  // chance a member topic's slot draws from the shared pool

    friend bool operator==(const SharedPoolSpec&, const SharedPoolSpec&) = default;
};

struct EngineConfig {
    std::size_t adaptation_lag = 0;      // interactions before an update takes effect
    double click_boost = 2.0;            // >= 1
    std::size_t ads_per_page = 4;        // advert slots
    double pool_diversity = 3.3;         // mean unique adverts per page
    bool fill_slots = true;              // repeat unique adverts to fill every slot
    double query_weight = 1.0;           // weight added per matching query
    // Weight spread evenly over all topics after a topical query whose page
    // drew no click.
    double explore_weight = 0.0;
    std::map<std::string, double> prior_knowledge;  // empty: uniform
    std::uint64_t seed = 0;
    std::size_t links_per_page = 4;
    std::size_t pool_size = 12;          // adverts per topic pool
    std::vector<SharedPoolSpec> shared_pools;

    void validate() const;
    friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

struct AdPool {
    struct Shared {
        std::vector<std::string> members;
        double weight = 0.0;
        std::vector<std::string> ads;
    };
    std::map<std::string, std::vector<std::string>> topic_ads;
    std::vector<Shared> shared;
};

// Query terms the engine treats as uninformative about any topic.
const std::set<std::string>& ambiguous_terms();

// Advert pools templated from each topic's keywords plus generic commercial
// words; verbatim (catch-all) topics get general consumer adverts.
AdPool build_ad_pools(const KeywordSet& keywords, const CategorySet& categories, const EngineConfig& config,
                      std::uint64_t seed);

// Vocabulary per category index used to match queries to topics.
std::vector<std::set<std::string>> topic_vocabularies(const KeywordSet& keywords, const CategorySet& categories,
                                                      const TermFilter& filter = TermFilter());

// Links for a query; a function of the query text alone.
std::vector<Link> query_links(const std::string& query, std::size_t count, const TermFilter& filter = TermFilter());

class Engine {
public:
    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;
    Engine(EngineConfig config, const AdPool& pools, const CategorySet& categories, const KeywordSet& keywords,
           TermFilter filter = TermFilter());

    ResultPage submit_query(const std::string& query);
    // item_index addresses the last served page, links first.
    void register_click(std::size_t item_index);

    // Effective normalized belief, one entry per category.
    std::vector<double> belief() const;
    std::size_t pending_updates() const { return pending_.size(); }
    std::set<std::size_t> matched_topics(const std::string& query) const;
    const CategorySet& categories() const { return categories_; }
    const EngineConfig& config() const { return config_; }

private:
    struct Update {
        std::vector<std::size_t> increments;
        std::vector<std::size_t> boosts;
        bool explore = false;
    };

    void apply(const Update& u);
    const std::vector<std::string>& pool_for(std::size_t topic, double u_shared) const;

    EngineConfig config_;
    CategorySet categories_;
    TermFilter filter_;
    std::vector<std::set<std::string>> vocab_;
    AdPool pools_;
    std::vector<const std::vector<std::string>*> topic_pools_;  // into pools_
    std::vector<const AdPool::Shared*> topic_shared_;           // into pools_, may be null
    std::vector<double> weights_;
    std::deque<Update> pending_;
    Rng rng_;
    bool served_ = false;
    bool last_topical_ = false;
    bool last_clicked_ = false;
    std::vector<std::vector<std::size_t>> last_item_topics_;
};

}  // namespace pri

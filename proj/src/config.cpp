#include "pri/config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pri/error.hpp"

namespace pri {
namespace {

namespace fs = std::filesystem;

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

void parse_into(const std::string& text, const std::string& name, const fs::path& base_dir,
                std::vector<ConfigEntry>& out, std::vector<fs::path>& stack) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string origin = name + ":" + std::to_string(lineno);
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.rfind("include", 0) == 0 && (line.size() == 7 || line[7] == ' ' || line[7] == '\t')) {
            const std::string target = trim(std::string_view(line).substr(7));
            if (target.empty()) throw ValidationError(origin + ": include needs a path");
            fs::path p = fs::path(target).is_absolute() ? fs::path(target) : base_dir / target;
            p = p.lexically_normal();
            if (std::find(stack.begin(), stack.end(), p) != stack.end())
                throw ValidationError(origin + ": include cycle through " + p.string());
            std::ifstream f(p);
            if (!f) throw ValidationError(origin + ": cannot open included file " + p.string());
            std::stringstream buf;
            buf << f.rdbuf();
            stack.push_back(p);
            parse_into(buf.str(), p.string(), p.parent_path(), out, stack);
            stack.pop_back();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ValidationError(origin + ": expected 'key = value'");
        ConfigEntry e{trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)), origin};
        if (e.key.empty()) throw ValidationError(origin + ": empty key");
        out.push_back(std::move(e));
    }
}

[[noreturn]] void bad(const ConfigEntry& e, const std::string& why) {
    throw ValidationError(e.origin + ": " + e.key + ": " + why);
}

double as_double(const ConfigEntry& e) {
    double v = 0;
    const auto& s = e.value;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) bad(e, "expected a number, got '" + s + "'");
    return v;
}

std::size_t as_size(const ConfigEntry& e) {
    std::size_t v = 0;
    const auto& s = e.value;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
        bad(e, "expected a nonnegative integer, got '" + s + "'");
    return v;
}

bool as_bool(const ConfigEntry& e) {
    if (e.value == "true" || e.value == "yes" || e.value == "1") return true;
    if (e.value == "false" || e.value == "no" || e.value == "0") return false;
    bad(e, "expected true or false, got '" + e.value + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string part;
    while (std::getline(in, part, sep)) {
        part = trim(part);
        if (!part.empty()) out.push_back(part);
    }
    return out;
}

std::vector<std::string> words(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

std::string resolve_path(const ConfigEntry& e) {
    // Paths are relative to the file that set them.
    const auto colon = e.origin.rfind(':');
    if (colon == std::string::npos || e.origin == "flag" || fs::path(e.value).is_absolute()) return e.value;
    return (fs::path(e.origin.substr(0, colon)).parent_path() / e.value).lexically_normal().string();
}

}  // namespace

std::vector<ConfigEntry> parse_config_text(const std::string& text, const std::string& origin_name,
                                           const std::string& base_dir) {
    std::vector<ConfigEntry> out;
    std::vector<fs::path> stack;
    parse_into(text, origin_name, base_dir, out, stack);
    return out;
}

std::vector<ConfigEntry> parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open config file: " + path);
    std::stringstream buf;
    buf << f.rdbuf();
    std::vector<ConfigEntry> out;
    std::vector<fs::path> stack{fs::path(path).lexically_normal()};
    parse_into(buf.str(), path, fs::path(path).parent_path(), out, stack);
    return out;
}

const std::vector<std::string>& known_config_keys() {
    static const std::vector<std::string> keys{
        "campaign.scripts_per_topic", "campaign.repetitions",    "campaign.train_repetitions",
        "campaign.threads",           "campaign.train_clicks",   "campaign.test_clicks",
        "campaign.train_on_probe_steps", "campaign.click_threshold", "campaign.default_probe",
        "campaign.probe.<topic>",     "campaign.hygiene_sessions", "campaign.hygiene_probes",
        "campaign.keywords",          "campaign.trending",       "campaign.catchall",
        "script.min_queries",         "script.max_queries",      "script.min_gap",
        "script.max_gap",             "script.min_wait",         "script.max_wait",
        "script.min_probes",          "script.max_group",        "script.leading_probe",
        "engine.adaptation_lag",      "engine.click_boost",      "engine.ads_per_page",
        "engine.pool_diversity",      "engine.fill_slots",       "engine.query_weight",
        "engine.explore_weight",      "engine.prior",            "engine.links_per_page",
        "engine.pool_size",           "engine.shared_pool",      "engine.shared_pools",
        "detector.epsilon",           "detector.sigma_multiplier", "detector.session_probe_count"};
    return keys;
}

void apply_setting(CampaignConfig& c, const ConfigEntry& e) {
    const auto& k = e.key;
    if (k == "campaign.scripts_per_topic") c.scripts_per_topic = as_size(e);
    else if (k == "campaign.repetitions") c.repetitions = as_size(e);
    else if (k == "campaign.train_repetitions") c.train_repetitions = as_size(e);
    else if (k == "campaign.threads") c.threads = as_size(e);
    else if (k == "campaign.train_clicks") c.train_clicks = as_bool(e);
    else if (k == "campaign.test_clicks") c.test_clicks = as_bool(e);
    else if (k == "campaign.train_on_probe_steps") c.train_on_probe_steps = as_bool(e);
    else if (k == "campaign.click_threshold") c.click_threshold = as_double(e);
    else if (k == "campaign.default_probe") c.default_probe = e.value;
    else if (k.rfind("campaign.probe.", 0) == 0) c.probes[k.substr(15)] = e.value;
    else if (k == "campaign.hygiene_sessions") c.hygiene_sessions = as_size(e);
    else if (k == "campaign.hygiene_probes") {
        c.hygiene_probes = split(e.value, ';');
        if (c.hygiene_probes.empty()) bad(e, "expected probes separated by ';'");
    } else if (k == "campaign.keywords" || k == "campaign.trending" || k == "campaign.catchall") {
        try {
            std::vector<CategoryKeywords> topics;
            std::vector<std::string> trending;
            std::string catchall = c.categories.catchall();
            for (const auto& t : c.keywords.topics()) {
                if (t.verbatim) trending = t.keywords;
                else topics.push_back(t);
            }
            if (k == "campaign.keywords") {
                std::ifstream in(resolve_path(e));
                if (!in) bad(e, "cannot open " + resolve_path(e));
                topics = parse_keywords(in).topics();
            } else if (k == "campaign.trending") {
                std::ifstream in(resolve_path(e));
                if (!in) bad(e, "cannot open " + resolve_path(e));
                trending = parse_query_list(in);
                if (trending.empty()) bad(e, "no queries in " + resolve_path(e));
            } else {
                catchall = e.value;
            }
            std::vector<std::string> labels;
            for (const auto& t : topics) labels.push_back(t.label);
            topics.push_back({catchall, trending, true});
            c.categories = CategorySet(labels, catchall);
            c.keywords = KeywordSet(std::move(topics));
        } catch (const ValidationError& err) {
            if (std::string(err.what()).rfind(e.origin, 0) == 0) throw;
            bad(e, err.what());
        }
    }
    else if (k == "script.min_queries") c.bounds.min_queries = as_size(e);
    else if (k == "script.max_queries") c.bounds.max_queries = as_size(e);
    else if (k == "script.min_gap") c.bounds.min_gap = as_size(e);
    else if (k == "script.max_gap") c.bounds.max_gap = as_size(e);
    else if (k == "script.min_wait") c.bounds.min_wait = static_cast<unsigned>(as_size(e));
    else if (k == "script.max_wait") c.bounds.max_wait = static_cast<unsigned>(as_size(e));
    else if (k == "script.min_probes") c.bounds.min_probes = as_size(e);
    else if (k == "script.max_group") c.bounds.max_group = as_size(e);
    else if (k == "script.leading_probe") c.bounds.leading_probe = as_bool(e);
    else if (k == "engine.adaptation_lag") c.engine.adaptation_lag = as_size(e);
    else if (k == "engine.click_boost") c.engine.click_boost = as_double(e);
    else if (k == "engine.ads_per_page") c.engine.ads_per_page = as_size(e);
    else if (k == "engine.pool_diversity") c.engine.pool_diversity = as_double(e);
    else if (k == "engine.fill_slots") c.engine.fill_slots = as_bool(e);
    else if (k == "engine.query_weight") c.engine.query_weight = as_double(e);
    else if (k == "engine.explore_weight") c.engine.explore_weight = as_double(e);
    else if (k == "engine.links_per_page") c.engine.links_per_page = as_size(e);
    else if (k == "engine.pool_size") c.engine.pool_size = as_size(e);
    else if (k == "engine.prior") {
        c.engine.prior_knowledge.clear();
        if (e.value == "uniform") return;
        for (const auto& part : split(e.value, ',')) {
            const auto colon = part.find(':');
            if (colon == std::string::npos) bad(e, "expected 'label:weight, ...' or 'uniform'");
            ConfigEntry w{k, trim(std::string_view(part).substr(colon + 1)), e.origin};
            c.engine.prior_knowledge[trim(std::string_view(part).substr(0, colon))] = as_double(w);
        }
    } else if (k == "engine.shared_pools") {
        if (e.value != "none") bad(e, "only 'none' is accepted (clears shared pools)");
        c.engine.shared_pools.clear();
    } else if (k == "engine.shared_pool") {
        const auto colon = e.value.rfind(':');
        if (colon == std::string::npos) bad(e, "expected 'topic topic ... : weight'");
        ConfigEntry w{k, trim(std::string_view(e.value).substr(colon + 1)), e.origin};
        c.engine.shared_pools.push_back({words(e.value.substr(0, colon)), as_double(w)});
    }
    else if (k == "detector.epsilon") c.detector.epsilon = as_double(e);
    else if (k == "detector.sigma_multiplier") c.detector.sigma_multiplier = as_double(e);
    else if (k == "detector.session_probe_count") c.detector.session_probe_count = as_size(e);
    else bad(e, "unknown key");
}

CampaignConfig campaign_from_entries(const std::vector<ConfigEntry>& entries) {
    CampaignConfig c;
    for (const auto& e : entries) apply_setting(c, e);
    try {
        c.validate();
    } catch (const ValidationError& err) {
        throw ValidationError(std::string("invalid configuration: ") + err.what());
    }
    return c;
}

}  // namespace pri

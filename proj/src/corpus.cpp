#include "pri/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "json.hpp"

#include "pri/error.hpp"

namespace pri {
namespace {

using nlohmann::json;

bool valid_label(std::string_view label) {
    if (label.empty()) return false;
    return std::all_of(label.begin(), label.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    });
}

json to_json(const SessionTrace& trace, const Interaction& it) {
    json links = json::array();
    for (const auto& l : it.page.links) links.push_back(json::array({l.title, l.snippet}));
    json adverts = json::array();
    for (const auto& a : it.page.adverts) adverts.push_back(json{{"slot", a.position}, {"text", a.text}});
    return json{{"session_id", trace.session_id},
                {"topic", trace.topic},
                {"step", it.step},
                {"query", it.query},
                {"is_probe", it.is_probe},
                {"links", std::move(links)},
                {"ad_slots", it.page.ad_slots},
                {"adverts", std::move(adverts)},
                {"clicked", it.clicked}};
}

template <typename T>
T field(const json& record, const char* name, std::size_t line) {
    const auto it = record.find(name);
    if (it == record.end()) throw ValidationError(std::string("missing field '") + name + "'", line);
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ValidationError(std::string("field '") + name + "' has the wrong type", line);
    }
}

}  // namespace

CategorySet::CategorySet(std::vector<std::string> sensitive, std::string catchall)
    : sensitive_(std::move(sensitive)), catchall_(std::move(catchall)) {
    std::set<std::string> seen;
    for (const auto& label : sensitive_) {
        if (!valid_label(label)) throw ValidationError("invalid category label '" + label + "'");
        if (!seen.insert(label).second) throw ValidationError("duplicate category label '" + label + "'");
    }
    if (!valid_label(catchall_)) throw ValidationError("invalid catch-all label '" + catchall_ + "'");
    if (seen.count(catchall_)) throw ValidationError("catch-all label '" + catchall_ + "' is also listed as sensitive");
    all_ = sensitive_;
    all_.push_back(catchall_);
}

std::optional<std::size_t> CategorySet::index_of(std::string_view label) const {
    for (std::size_t i = 0; i < all_.size(); ++i)
        if (all_[i] == label) return i;
    return std::nullopt;
}

std::size_t CategorySet::require_index(std::string_view label) const {
    if (auto i = index_of(label)) return *i;
    throw ValidationError("unknown category '" + std::string(label) + "'");
}

CategorySet default_categories() {
    return CategorySet({"anorexia", "bankrupt", "diabetes", "disabled", "divorce", "gambling", "gay",
                        "location", "payday", "prostate", "unemployed"},
                       "other");
}

std::string ResultPage::item_text(std::size_t i) const {
    if (i < links.size()) return links[i].title + " " + links[i].snippet;
    const std::size_t a = i - links.size();
    if (a >= adverts.size()) throw ValidationError("item index " + std::to_string(i) + " out of range");
    return adverts[a].text;
}

std::vector<const Interaction*> SessionTrace::probes() const {
    std::vector<const Interaction*> out;
    for (const auto& it : interactions)
        if (it.is_probe) out.push_back(&it);
    return out;
}

std::vector<LabeledAdvert> load_corpus(std::istream& in, const CategorySet& categories) {
    std::vector<LabeledAdvert> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw ValidationError("expected 'label<TAB>text'", lineno);
        std::string label = line.substr(0, tab);
        if (!categories.contains(label)) throw ValidationError("unknown label '" + label + "'", lineno);
        out.push_back({std::move(label), line.substr(tab + 1)});
    }
    return out;
}

std::vector<LabeledAdvert> load_corpus_file(const std::string& path, const CategorySet& categories) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open corpus file: " + path);
    return load_corpus(in, categories);
}

void write_corpus(std::ostream& out, const std::vector<LabeledAdvert>& corpus) {
    for (const auto& a : corpus) out << a.label << '\t' << a.text << '\n';
}

Dictionary build_dictionary(const std::vector<LabeledAdvert>& corpus, const TermFilter& filter) {
    if (corpus.empty()) throw ValidationError("empty corpus");
    Dictionary dict;
    for (const auto& advert : corpus)
        for (const auto& term : filter.apply_text(advert.text)) dict.add(term);
    if (dict.empty()) throw ValidationError("corpus contains no content terms after filtering");
    return dict;
}

void validate_trace(const SessionTrace& trace) {
    const std::string where = "session '" + trace.session_id + "'";
    std::size_t last_step = 0;
    std::optional<std::size_t> slots;
    for (const auto& it : trace.interactions) {
        const std::string at = where + " step " + std::to_string(it.step);
        if (it.step <= last_step) throw ValidationError(at + ": steps must be strictly increasing");
        last_step = it.step;
        if (it.is_probe && !it.clicked.empty()) throw ValidationError(at + ": probe responses are never clicked");
        for (auto c : it.clicked)
            if (c >= it.page.item_count()) throw ValidationError(at + ": clicked index out of range");
        for (const auto& a : it.page.adverts)
            if (a.position >= it.page.ad_slots) throw ValidationError(at + ": advert slot beyond page slot count");
        if (slots && *slots != it.page.ad_slots) throw ValidationError(at + ": advert slot layout changed within session");
        slots = it.page.ad_slots;
    }
}

std::vector<SessionTrace> parse_capture(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCaptureHeader)
        throw ValidationError("missing capture header '" + std::string(kCaptureHeader) + "'", 1);

    std::vector<SessionTrace> traces;
    std::set<std::string> closed;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception& e) {
            throw ValidationError(std::string("malformed record: ") + e.what(), lineno);
        }
        if (!record.is_object()) throw ValidationError("record is not an object", lineno);

        Interaction it;
        auto session_id = field<std::string>(record, "session_id", lineno);
        auto topic = field<std::string>(record, "topic", lineno);
        it.step = field<std::size_t>(record, "step", lineno);
        it.query = field<std::string>(record, "query", lineno);
        it.is_probe = field<bool>(record, "is_probe", lineno);
        it.page.ad_slots = field<std::size_t>(record, "ad_slots", lineno);
        it.clicked = field<std::vector<std::size_t>>(record, "clicked", lineno);
        for (const auto& l : field<json>(record, "links", lineno)) {
            if (!l.is_array() || l.size() != 2 || !l[0].is_string() || !l[1].is_string())
                throw ValidationError("link must be [title, snippet]", lineno);
            it.page.links.push_back({l[0].get<std::string>(), l[1].get<std::string>()});
        }
        for (const auto& a : field<json>(record, "adverts", lineno)) {
            if (!a.is_object()) throw ValidationError("advert must be an object", lineno);
            it.page.adverts.push_back({field<std::string>(a, "text", lineno), field<std::size_t>(a, "slot", lineno)});
        }
        if (it.step == 0) throw ValidationError("steps are 1-based", lineno);

        if (traces.empty() || traces.back().session_id != session_id) {
            if (!closed.insert(session_id).second)
                throw ValidationError("records of session '" + session_id + "' are not contiguous", lineno);
            traces.push_back({session_id, topic, {}});
        }
        auto& trace = traces.back();
        if (trace.topic != topic) throw ValidationError("topic changed within session '" + session_id + "'", lineno);
        if (!trace.interactions.empty()) {
            const auto prev = trace.interactions.back().step;
            if (it.step == prev)
                throw ValidationError("duplicate step " + std::to_string(it.step) + " in session '" + session_id + "'", lineno);
            if (it.step < prev)
                throw ValidationError("out-of-order step " + std::to_string(it.step) + " in session '" + session_id + "'", lineno);
        }
        if (it.is_probe && !it.clicked.empty()) throw ValidationError("probe responses are never clicked", lineno);
        trace.interactions.push_back(std::move(it));
        try {
            validate_trace(trace);
        } catch (const ValidationError& e) {
            throw ValidationError(e.what(), lineno);
        }
    }
    return traces;
}

std::vector<SessionTrace> parse_capture_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open capture file: " + path);
    return parse_capture(in);
}

void write_capture(std::ostream& out, const std::vector<SessionTrace>& traces) {
    out << kCaptureHeader << '\n';
    for (const auto& trace : traces)
        for (const auto& it : trace.interactions) out << to_json(trace, it).dump() << '\n';
}

void write_capture_file(const std::string& path, const std::vector<SessionTrace>& traces) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write capture file: " + path);
    write_capture(out, traces);
}

}  // namespace pri

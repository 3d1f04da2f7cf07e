#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pri {

using TermId = std::size_t;

// Bijective term <-> dense id map. Ids are assigned in insertion order.
class Dictionary {
public:
    // Returns the id of `term`, inserting it if new.
    TermId add(std::string_view term);

    std::optional<TermId> find(std::string_view term) const;
    bool contains(std::string_view term) const { return find(term).has_value(); }

    const std::string& term(TermId id) const { return terms_.at(id); }
    const std::vector<std::string>& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }

    friend bool operator==(const Dictionary& a, const Dictionary& b) { return a.terms_ == b.terms_; }

private:
    std::unordered_map<std::string, TermId> ids_;
    std::vector<std::string> terms_;
};

}  // namespace pri

#include "pri/dictionary.hpp"

namespace pri {

TermId Dictionary::add(std::string_view term) {
    if (auto it = ids_.find(std::string(term)); it != ids_.end()) return it->second;
    const TermId id = terms_.size();
    terms_.emplace_back(term);
    ids_.emplace(terms_.back(), id);
    return id;
}

std::optional<TermId> Dictionary::find(std::string_view term) const {
    if (auto it = ids_.find(std::string(term)); it != ids_.end()) return it->second;
    return std::nullopt;
}

}  // namespace pri

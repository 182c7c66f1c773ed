#include "polyvm/object_space.hpp"

#include "polyvm/errors.hpp"

namespace polyvm {

Value* NameTable::find(std::string_view name) {
    for (auto& [key, value] : entries_) {
        if (key == name) return &value;
    }
    return nullptr;
}

const Value* NameTable::find(std::string_view name) const {
    for (const auto& [key, value] : entries_) {
        if (key == name) return &value;
    }
    return nullptr;
}

void NameTable::set(std::string_view name, Value value) {
    if (auto* existing = find(name)) {
        *existing = std::move(value);
        return;
    }
    entries_.emplace_back(std::string(name), std::move(value));
}

HeapHandle Heap::allocate(HeapObject object) {
    objects_.push_back(std::move(object));
    return static_cast<HeapHandle>(objects_.size() - 1);
}

HeapObject& Heap::at(HeapHandle handle) {
    if (!valid(handle)) throw StaleHandle();
    return objects_[handle];
}

const HeapObject& Heap::at(HeapHandle handle) const {
    if (!valid(handle)) throw StaleHandle();
    return objects_[handle];
}

void ObjectSpace::ensure_heap(LangId lang) {
    if (heaps_.size() <= lang.index) heaps_.resize(lang.index + 1u);
}

Heap& ObjectSpace::heap(LangId lang) {
    if (lang.index >= heaps_.size()) throw StaleHandle();
    return heaps_[lang.index];
}

const Heap& ObjectSpace::heap(LangId lang) const {
    if (lang.index >= heaps_.size()) throw StaleHandle();
    return heaps_[lang.index];
}

}  // namespace polyvm

#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "polyvm/kernel/isa.hpp"
#include "polyvm/value.hpp"

namespace polyvm {

namespace kernel {
struct Builtin;
}

/// Insertion-ordered name -> Value table. Used for frame locals, module
/// globals and object slots; ordering is what inspectors show.
class NameTable {
public:
    using Entry = std::pair<std::string, Value>;

    Value* find(std::string_view name);
    const Value* find(std::string_view name) const;
    void set(std::string_view name, Value value);
    bool contains(std::string_view name) const { return find(name) != nullptr; }
    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

private:
    std::vector<Entry> entries_;
};

using ScopePtr = std::shared_ptr<NameTable>;

struct FunctionObject {
    kernel::CodePtr code;
    ScopePtr globals;
};

struct ClassObject {
    std::string name;
    /// Methods (refs to FunctionObjects) and class-level attributes, in
    /// definition order.
    NameTable members;
    /// Built-in exception classes construct ExceptionObjects when called.
    bool exception_class = false;
};

struct InstanceObject {
    HeapHandle class_handle = 0;
    NameTable slots;
};

struct BoundMethod {
    Value receiver;
    HeapHandle function = 0;
};

struct BuiltinObject {
    std::shared_ptr<const kernel::Builtin> builtin;
};

struct ExceptionObject {
    std::string class_name;
    std::string message;
};

struct IteratorObject {
    Value iterable;
    std::size_t position = 0;
};

/// A non-object value exposed to another language by reference (conversion
/// turned off, or shallow list conversion).
struct BoxObject {
    Value value;
};

using HeapObject = std::variant<FunctionObject, ClassObject, InstanceObject, BoundMethod, BuiltinObject,
                                ExceptionObject, IteratorObject, BoxObject>;

/// One language's object heap. Handles are indices and stay valid for the
/// lifetime of the heap; nothing is collected.
class Heap {
public:
    HeapHandle allocate(HeapObject object);
    HeapObject& at(HeapHandle handle);
    const HeapObject& at(HeapHandle handle) const;
    bool valid(HeapHandle handle) const { return handle < objects_.size(); }
    std::size_t size() const { return objects_.size(); }

private:
    std::vector<HeapObject> objects_;
};

class ObjectSpace {
public:
    Heap& heap(LangId lang);
    const Heap& heap(LangId lang) const;
    void ensure_heap(LangId lang);

    HeapObject& at(LangId lang, HeapHandle handle) { return heap(lang).at(handle); }
    const HeapObject& at(LangId lang, HeapHandle handle) const { return heap(lang).at(handle); }

    ObjectRef allocate(LangId lang, HeapObject object) { return ObjectRef{lang, heap(lang).allocate(std::move(object))}; }

private:
    std::vector<Heap> heaps_;
};

}  // namespace polyvm

#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace polyvm {

using BigInt = boost::multiprecision::cpp_int;

/// Index of a registered language plugin. Assigned by the registry in
/// registration order; the registry maps it back to the plugin's short name.
struct LangId {
    std::uint16_t index = 0;
    friend auto operator<=>(const LangId&, const LangId&) = default;
};

using HeapHandle = std::uint32_t;

/// An object living in the heap of the language that owns it.
struct ObjectRef {
    LangId lang;
    HeapHandle handle = 0;
    friend bool operator==(const ObjectRef&, const ObjectRef&) = default;
};

/// The same kind of handle, as seen from a language other than the owner.
struct ForeignRef {
    LangId lang;
    HeapHandle handle = 0;
    friend bool operator==(const ForeignRef&, const ForeignRef&) = default;
};

class Value;
using List = std::vector<Value>;
using ListPtr = std::shared_ptr<List>;

enum class ValueKind : std::uint8_t { Nil, Bool, Int, Float, Text, List, Object, Foreign };

std::string_view kind_name(ValueKind kind);

/// Tagged neutral value shared by every guest language.
///
/// Lists are reference types inside one language (guest code may alias and
/// mutate them); crossing a language boundary copies them element-wise.
class Value {
public:
    Value() = default;

    static Value nil() { return Value{}; }
    static Value boolean(bool b) { return Value{Rep{b}}; }
    static Value integer(BigInt i) { return Value{Rep{std::move(i)}}; }
    static Value integer(std::int64_t i) { return Value{Rep{BigInt{i}}}; }
    static Value real(double d) { return Value{Rep{d}}; }
    static Value text(std::string s) { return Value{Rep{std::move(s)}}; }
    static Value list(List items = {}) { return Value{Rep{std::make_shared<List>(std::move(items))}}; }
    static Value list_ptr(ListPtr items) { return Value{Rep{std::move(items)}}; }
    static Value object(ObjectRef ref) { return Value{Rep{ref}}; }
    static Value foreign(ForeignRef ref) { return Value{Rep{ref}}; }

    ValueKind kind() const { return static_cast<ValueKind>(rep_.index()); }

    bool is_nil() const { return kind() == ValueKind::Nil; }
    bool is_bool() const { return kind() == ValueKind::Bool; }
    bool is_int() const { return kind() == ValueKind::Int; }
    bool is_float() const { return kind() == ValueKind::Float; }
    bool is_number() const { return is_int() || is_float(); }
    bool is_text() const { return kind() == ValueKind::Text; }
    bool is_list() const { return kind() == ValueKind::List; }
    bool is_object() const { return kind() == ValueKind::Object; }
    bool is_foreign() const { return kind() == ValueKind::Foreign; }
    bool is_ref() const { return is_object() || is_foreign(); }

    bool as_bool() const { return std::get<bool>(rep_); }
    const BigInt& as_int() const { return std::get<BigInt>(rep_); }
    double as_float() const { return std::get<double>(rep_); }
    const std::string& as_text() const { return std::get<std::string>(rep_); }
    const ListPtr& as_list() const { return std::get<ListPtr>(rep_); }
    ObjectRef as_object() const { return std::get<ObjectRef>(rep_); }
    ForeignRef as_foreign() const { return std::get<ForeignRef>(rep_); }

    /// Numeric value as a double (Int or Float only).
    double to_double() const;

    /// Structural equality: same kind, equal payload, lists element-wise,
    /// references by (language, handle). Int 1 and Float 1.0 are different.
    friend bool operator==(const Value& a, const Value& b);

private:
    using Rep = std::variant<std::monostate, bool, BigInt, double, std::string, ListPtr, ObjectRef, ForeignRef>;
    explicit Value(Rep rep) : rep_(std::move(rep)) {}
    Rep rep_;
};

/// Debug rendering independent of any guest language, used in test output.
std::string debug_string(const Value& v);

/// UTF-8 helpers for code-point based text operations.
namespace utf8 {
std::vector<std::string> code_points(std::string_view text);
std::size_t length(std::string_view text);
}  // namespace utf8

}  // namespace polyvm

#include "polyvm/value.hpp"

#include <sstream>

namespace polyvm {

std::string_view kind_name(ValueKind kind) {
    switch (kind) {
    case ValueKind::Nil: return "Nil";
    case ValueKind::Bool: return "Bool";
    case ValueKind::Int: return "Int";
    case ValueKind::Float: return "Float";
    case ValueKind::Text: return "Text";
    case ValueKind::List: return "List";
    case ValueKind::Object: return "Object";
    case ValueKind::Foreign: return "Foreign";
    }
    return "?";
}

double Value::to_double() const {
    if (is_float()) return as_float();
    return as_int().convert_to<double>();
}

bool operator==(const Value& a, const Value& b) {
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
    case ValueKind::Nil: return true;
    case ValueKind::Bool: return a.as_bool() == b.as_bool();
    case ValueKind::Int: return a.as_int() == b.as_int();
    case ValueKind::Float: return a.as_float() == b.as_float();
    case ValueKind::Text: return a.as_text() == b.as_text();
    case ValueKind::List: {
        const auto& x = *a.as_list();
        const auto& y = *b.as_list();
        if (a.as_list() == b.as_list()) return true;
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!(x[i] == y[i])) return false;
        }
        return true;
    }
    case ValueKind::Object: return a.as_object() == b.as_object();
    case ValueKind::Foreign: return a.as_foreign() == b.as_foreign();
    }
    return false;
}

std::string debug_string(const Value& v) {
    std::ostringstream out;
    switch (v.kind()) {
    case ValueKind::Nil: out << "Nil"; break;
    case ValueKind::Bool: out << "Bool(" << (v.as_bool() ? "true" : "false") << ")"; break;
    case ValueKind::Int: out << "Int(" << v.as_int() << ")"; break;
    case ValueKind::Float: out << "Float(" << v.as_float() << ")"; break;
    case ValueKind::Text: out << "Text(\"" << v.as_text() << "\")"; break;
    case ValueKind::List: {
        out << "List[";
        bool first = true;
        for (const auto& item : *v.as_list()) {
            if (!first) out << ", ";
            first = false;
            out << debug_string(item);
        }
        out << "]";
        break;
    }
    case ValueKind::Object:
        out << "ObjectRef(" << v.as_object().lang.index << ", " << v.as_object().handle << ")";
        break;
    case ValueKind::Foreign:
        out << "ForeignRef(" << v.as_foreign().lang.index << ", " << v.as_foreign().handle << ")";
        break;
    }
    return out.str();
}

namespace utf8 {

namespace {
std::size_t sequence_length(unsigned char lead) {
    if (lead < 0x80) return 1;
    if ((lead >> 5) == 0x6) return 2;
    if ((lead >> 4) == 0xE) return 3;
    if ((lead >> 3) == 0x1E) return 4;
    return 1;
}
}  // namespace

std::vector<std::string> code_points(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t n = std::min(sequence_length(static_cast<unsigned char>(text[i])), text.size() - i);
        out.emplace_back(text.substr(i, n));
        i += n;
    }
    return out;
}

std::size_t length(std::string_view text) {
    std::size_t count = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        i += sequence_length(static_cast<unsigned char>(text[i]));
        ++count;
    }
    return count;
}

}  // namespace utf8

}  // namespace polyvm

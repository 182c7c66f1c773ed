#include "polyvm/runtime.hpp"

#include <algorithm>

namespace polyvm {

namespace {
template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

std::string_view token_kind_name(TokenKind kind) {
    switch (kind) {
    case TokenKind::Keyword: return "Keyword";
    case TokenKind::Identifier: return "Identifier";
    case TokenKind::IVar: return "IVar";
    case TokenKind::Constant: return "Constant";
    case TokenKind::Number: return "Number";
    case TokenKind::Text: return "Text";
    case TokenKind::Operator: return "Operator";
    case TokenKind::Punctuation: return "Punctuation";
    case TokenKind::Comment: return "Comment";
    case TokenKind::Indent: return "Indent";
    case TokenKind::Dedent: return "Dedent";
    case TokenKind::Newline: return "Newline";
    case TokenKind::Error: return "Error";
    case TokenKind::End: return "End";
    }
    return "?";
}

std::string_view neutral_class_name(const Value& value) {
    switch (value.kind()) {
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

LangId Runtime::register_plugin(std::unique_ptr<LanguagePlugin> plugin) {
    auto descriptor = plugin->descriptor();
    if (find_language(descriptor.id)) throw DuplicatePlugin(descriptor.id);
    for (const auto& cap : required_capabilities()) {
        if (!descriptor.capabilities.contains(cap)) throw MissingCapability(cap);
    }
    LangId lang{static_cast<std::uint16_t>(entries_.size())};
    objects_.ensure_heap(lang);
    entries_.push_back(Entry{std::move(plugin), std::move(descriptor), {}});

    auto& entry = entries_.back();
    for (const auto& builtin : entry.plugin->builtins()) install_builtin(lang, builtin);
    for (const auto& name : entry.plugin->exception_classes()) {
        ClassObject cls;
        cls.name = name;
        cls.exception_class = true;
        entry.builtins.set(name, Value::object(objects_.allocate(lang, std::move(cls))));
    }
    for (const auto& builtin : shared_builtins_) install_builtin(lang, builtin);
    return lang;
}

void Runtime::install_builtin(LangId lang, const std::shared_ptr<const kernel::Builtin>& builtin) {
    auto ref = objects_.allocate(lang, BuiltinObject{builtin});
    entries_[lang.index].builtins.set(builtin->name, Value::object(ref));
}

void Runtime::add_shared_builtin(std::shared_ptr<const kernel::Builtin> builtin) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        install_builtin(LangId{static_cast<std::uint16_t>(i)}, builtin);
    }
    shared_builtins_.push_back(std::move(builtin));
}

const Value* Runtime::builtin(LangId lang, std::string_view name) const {
    return entries_.at(lang.index).builtins.find(name);
}

std::optional<LangId> Runtime::find_language(std::string_view id) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].descriptor.id == id) return LangId{static_cast<std::uint16_t>(i)};
    }
    return std::nullopt;
}

LangId Runtime::language(std::string_view id) const {
    if (auto lang = find_language(id)) return *lang;
    throw UnknownLanguage(std::string(id));
}

const std::string& Runtime::language_name(LangId lang) const { return entries_.at(lang.index).descriptor.id; }

std::vector<LangId> Runtime::languages() const {
    std::vector<LangId> out;
    for (std::size_t i = 0; i < entries_.size(); ++i) out.push_back(LangId{static_cast<std::uint16_t>(i)});
    return out;
}

std::vector<PluginDescriptor> Runtime::descriptors() const {
    std::vector<PluginDescriptor> out;
    for (const auto& entry : entries_) out.push_back(entry.descriptor);
    return out;
}

const LanguagePlugin& Runtime::plugin(LangId lang) const { return *entries_.at(lang.index).plugin; }

std::optional<LangId> Runtime::language_for_extension(std::string_view extension) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].descriptor.file_extension == extension) return LangId{static_cast<std::uint16_t>(i)};
    }
    return std::nullopt;
}

Value Runtime::convert(const Value& value, LangId from, LangId to, const ConversionPolicy& policy) {
    if (from == to) return value;
    switch (value.kind()) {
    case ValueKind::Foreign: {
        auto ref = value.as_foreign();
        if (ref.lang != to) return value;
        if (const auto* box = std::get_if<BoxObject>(&objects_.at(ref.lang, ref.handle))) return box->value;
        return Value::object(ObjectRef{ref.lang, ref.handle});
    }
    case ValueKind::Object: {
        auto ref = value.as_object();
        if (ref.lang == to) return value;
        return Value::foreign(ForeignRef{ref.lang, ref.handle});
    }
    default: break;
    }
    auto wrap = [&] {
        auto ref = objects_.allocate(from, BoxObject{value});
        return Value::foreign(ForeignRef{ref.lang, ref.handle});
    };
    if (!policy.auto_convert) return wrap();
    if (value.is_list()) {
        if (!policy.deep_lists) return wrap();
        List items;
        items.reserve(value.as_list()->size());
        for (const auto& item : *value.as_list()) items.push_back(convert(item, from, to, policy));
        return Value::list(std::move(items));
    }
    return value;
}

std::pair<LangId, HeapHandle> Runtime::resolve(const Value& ref) const {
    if (ref.is_object()) return {ref.as_object().lang, ref.as_object().handle};
    if (ref.is_foreign()) return {ref.as_foreign().lang, ref.as_foreign().handle};
    throw StaleHandle();
}

std::string Runtime::class_name_of(const Value& value) const {
    if (!value.is_ref()) return std::string(neutral_class_name(value));
    auto [lang, handle] = resolve(value);
    const auto& obj = objects_.at(lang, handle);
    return std::visit(overloaded{
                          [&](const InstanceObject& inst) {
                              return std::get<ClassObject>(objects_.at(lang, inst.class_handle)).name;
                          },
                          [&](const ExceptionObject& exc) { return exc.class_name; },
                          [&](const BoxObject& box) { return std::string(neutral_class_name(box.value)); },
                          [&](const auto&) { return plugin(lang).type_name(Value::object({lang, handle}), *this); },
                      },
                      obj);
}

MopView Runtime::mop_reflect(const Value& ref) const {
    auto [lang, handle] = resolve(ref);
    const auto& obj = objects_.at(lang, handle);
    const auto self = Value::object(ObjectRef{lang, handle});
    MopView view;
    view.class_name = class_name_of(ref);
    view.display = plugin(lang).display(self, *this);
    std::visit(overloaded{
                   [&](const InstanceObject& inst) { view.slots = inst.slots.entries(); },
                   [&](const ClassObject& cls) { view.slots = cls.members.entries(); },
                   [&](const ExceptionObject& exc) { view.slots.emplace_back("message", Value::text(exc.message)); },
                   [&](const BoxObject& box) {
                       view.display = plugin(lang).display(box.value, *this);
                       if (box.value.is_list()) {
                           const auto& items = *box.value.as_list();
                           for (std::size_t i = 0; i < items.size(); ++i) {
                               view.slots.emplace_back(std::to_string(i), items[i]);
                           }
                       }
                   },
                   [&](const auto&) {},
               },
               obj);
    return view;
}

Value Runtime::mop_slot_get(const Value& ref, std::string_view name, LangId caller) {
    auto [lang, handle] = resolve(ref);
    const auto& obj = objects_.at(lang, handle);
    std::optional<Value> found;
    if (const auto* inst = std::get_if<InstanceObject>(&obj)) {
        if (const auto* v = inst->slots.find(name)) found = *v;
    } else if (const auto* cls = std::get_if<ClassObject>(&obj)) {
        if (const auto* v = cls->members.find(name)) found = *v;
    } else if (const auto* exc = std::get_if<ExceptionObject>(&obj)) {
        if (name == "message") found = Value::text(exc->message);
    }
    if (!found) throw NoSuchSlot(std::string(name));
    return convert(*found, lang, caller);
}

std::string Runtime::mop_display(const Value& value, LangId language) const {
    return plugin(language).display(value, *this);
}

ExceptionValue Runtime::materialize(LangId lang, ExceptionValue exception) {
    if (!exception.payload) {
        auto ref = objects_.allocate(lang, ExceptionObject{exception.class_name, exception.message});
        exception.payload = Value::object(ref);
    }
    return exception;
}

ExceptionValue Runtime::exception_from_value(const Value& raised, LangId raiser) {
    if (raised.is_ref()) {
        auto [lang, handle] = resolve(raised);
        const auto& obj = objects_.at(lang, handle);
        if (const auto* exc = std::get_if<ExceptionObject>(&obj)) {
            return ExceptionValue{exc->class_name, exc->message, raised};
        }
        if (const auto* inst = std::get_if<InstanceObject>(&obj)) {
            std::string message;
            if (const auto* m = inst->slots.find("message")) message = plugin(lang).to_text(*m, *this);
            return ExceptionValue{class_name_of(raised), message, raised};
        }
        if (const auto* cls = std::get_if<ClassObject>(&obj); cls && cls->exception_class) {
            return materialize(raiser, ExceptionValue{cls->name, "", std::nullopt});
        }
    }
    return materialize(raiser, plugin(raiser).exception_for_raised(raised, *this));
}

}  // namespace polyvm

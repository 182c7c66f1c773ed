#include "polyvm/service/wire.hpp"

#include <cmath>

namespace polyvm::service {

namespace {
const BigInt kSafeInt = BigInt(1) << 53;
}

json encode_value(const Runtime& runtime, const Value& value) {
    switch (value.kind()) {
    case ValueKind::Nil: return nullptr;
    case ValueKind::Bool: return value.as_bool();
    case ValueKind::Int: {
        const auto& i = value.as_int();
        if (i < kSafeInt && i > -kSafeInt) return static_cast<std::int64_t>(i);
        return json{{"int", i.str()}};
    }
    case ValueKind::Float: {
        const double d = value.as_float();
        if (std::isnan(d)) return json{{"float", "nan"}};
        if (std::isinf(d)) return json{{"float", d > 0 ? "inf" : "-inf"}};
        return d;
    }
    case ValueKind::Text: return value.as_text();
    case ValueKind::List: {
        json items = json::array();
        for (const auto& item : *value.as_list()) items.push_back(encode_value(runtime, item));
        return items;
    }
    case ValueKind::Object:
    case ValueKind::Foreign: {
        auto [lang, handle] = runtime.resolve(value);
        return json{{"ref", {{"lang", runtime.language_name(lang)}, {"handle", handle}}}};
    }
    }
    return nullptr;
}

Value decode_value(const Runtime& runtime, const json& data) {
    if (data.is_null()) return Value::nil();
    if (data.is_boolean()) return Value::boolean(data.get<bool>());
    if (data.is_number_integer()) return Value::integer(data.get<std::int64_t>());
    if (data.is_number_float()) return Value::real(data.get<double>());
    if (data.is_string()) return Value::text(data.get<std::string>());
    if (data.is_array()) {
        List items;
        for (const auto& item : data) items.push_back(decode_value(runtime, item));
        return Value::list(std::move(items));
    }
    if (data.is_object()) {
        if (data.contains("int") && data["int"].is_string()) {
            try {
                return Value::integer(BigInt(data["int"].get<std::string>()));
            } catch (const std::exception&) {
                throw BadParams("malformed integer");
            }
        }
        if (data.contains("float") && data["float"].is_string()) {
            const auto s = data["float"].get<std::string>();
            if (s == "nan") return Value::real(std::nan(""));
            if (s == "inf") return Value::real(HUGE_VAL);
            if (s == "-inf") return Value::real(-HUGE_VAL);
            throw BadParams("malformed float");
        }
        if (data.contains("ref") && data["ref"].is_object()) {
            const auto& ref = data["ref"];
            if (!ref.contains("lang") || !ref["lang"].is_string() || !ref.contains("handle") ||
                !ref["handle"].is_number_integer() || ref["handle"].get<std::int64_t>() < 0) {
                throw BadParams("a ref needs a language id and a handle");
            }
            const auto lang = runtime.language(ref["lang"].get<std::string>());
            const auto handle = ref["handle"].get<std::uint64_t>();
            if (handle >= runtime.objects().heap(lang).size()) throw StaleHandle();
            return Value::object(ObjectRef{lang, static_cast<HeapHandle>(handle)});
        }
    }
    throw BadParams("cannot decode value " + data.dump());
}

json encode_frame_summary(const kernel::FrameView& frame, std::size_t index) {
    return json{{"index", index}, {"language", frame.language_name}, {"name", frame.display_name}, {"line", frame.line}};
}

json encode_frame(const Runtime& runtime, const kernel::FrameView& frame, std::size_t index) {
    auto out = encode_frame_summary(frame, index);
    out["source"] = frame.source;
    json locals = json::array();
    for (const auto& [name, value] : frame.locals) {
        locals.push_back(json{{"name", name},
                              {"value", encode_value(runtime, value)},
                              {"display", runtime.mop_display(value, frame.language)}});
    }
    out["locals"] = std::move(locals);
    json pseudo = json::array();
    for (const auto& [name, text] : frame.pseudo_entries) pseudo.push_back(json{{"name", name}, {"text", text}});
    out["pseudo"] = std::move(pseudo);
    return out;
}

json encode_stack(const std::vector<kernel::FrameView>& stack) {
    json out = json::array();
    for (std::size_t i = 0; i < stack.size(); ++i) out.push_back(encode_frame_summary(stack[i], i));
    return out;
}

json encode_inspect(const Runtime& runtime, const debug::InspectView& view) {
    const auto viewer = runtime.language(view.viewer_language);
    json slots = json::array();
    for (const auto& [name, value] : view.slots) {
        slots.push_back(json{
            {"name", name}, {"value", encode_value(runtime, value)}, {"display", runtime.mop_display(value, viewer)}});
    }
    return json{{"class_name", view.class_name},
                {"display", view.display},
                {"slots", std::move(slots)},
                {"viewer_language", view.viewer_language}};
}

json encode_exception(const ExceptionValue& exception) {
    return json{{"class", exception.class_name}, {"message", exception.message}};
}

json encode_session(const debug::DebugSession& session) {
    const bool exception = session.event.kind == vm::DebugEvent::Kind::UnhandledException;
    json out{{"id", session.id},
             {"pid", session.event.pid},
             {"kind", exception ? "exception" : "interrupt"},
             {"title", session.event.title},
             {"open", session.open},
             {"selected_frame", session.selected_frame},
             {"stack", encode_stack(session.event.stack)}};
    if (session.event.exception) out["exception"] = encode_exception(*session.event.exception);
    return out;
}

}  // namespace polyvm::service

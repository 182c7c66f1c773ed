#include "polyvm/kernel/introspection.hpp"

#include <sstream>

#include "polyvm/runtime.hpp"

namespace polyvm::kernel {

std::vector<FrameView> stack_view(const Runtime& runtime, const FrameStack& frames) {
    std::vector<FrameView> views;
    views.reserve(frames.size());
    for (std::size_t i = frames.size(); i-- > 0;) {
        const auto& f = frames[i];
        const bool top = i + 1 == frames.size();
        FrameView view;
        view.language = f.language;
        view.language_name = runtime.language_name(f.language);
        view.display_name = f.code->name;
        view.line = top || f.ip == 0 ? f.code->line_at(f.ip) : f.code->line_at(f.ip - 1);
        view.source = f.code->source;
        view.locals = f.locals->entries();
        view.pseudo_entries.emplace_back("(thisContext)", "frame " + std::to_string(frames.size() - 1 - i) + " " +
                                                              f.code->name + " @" + std::to_string(view.line));
        view.pseudo_entries.emplace_back("(source)", std::string(runtime.plugin(f.language).root_name()));
        views.push_back(std::move(view));
    }
    return views;
}

void restart_frame(Runtime& runtime, FrameStack& frames, std::size_t index,
                   const std::optional<std::string>& new_source) {
    if (index >= frames.size()) throw BadIndex(index);
    const Frame& old = frames[index];
    CodePtr code = old.code;
    const bool module = old.code->kind == CodeKind::Module;

    if (new_source) {
        const auto& plugin = runtime.plugin(old.language);
        CompileOptions options;
        if (module) {
            for (const auto& [name, value] : old.arguments) options.predeclared.push_back(name);
            code = plugin.compile(*new_source, old.language, options);
        } else {
            options.methods = old.code->kind == CodeKind::Method;
            auto compiled = plugin.compile(*new_source, old.language, options);
            CodePtr definition;
            for (const auto& child : compiled->children) {
                if (child->name == old.code->name) definition = child;
            }
            if (!definition && compiled->children.size() == 1) definition = compiled->children.front();
            if (!definition) throw CompileError(1, 1, "expected a definition of '" + old.code->name + "'");
            if (definition->params.size() != old.code->params.size()) {
                throw ArityChanged(old.code->params.size(), definition->params.size());
            }
            auto patched = std::make_shared<CodeUnit>(*definition);
            patched->kind = old.code->kind;
            patched->binds_self_param = old.code->binds_self_param;
            code = std::move(patched);
        }
    }

    std::vector<std::pair<std::string, Value>> bindings;
    if (module) {
        bindings = old.arguments;
    } else {
        for (std::size_t i = 0; i < code->params.size() && i < old.arguments.size(); ++i) {
            bindings.emplace_back(code->params[i], old.arguments[i].second);
        }
    }
    Frame fresh = make_frame(code, std::move(bindings), module ? nullptr : old.globals);
    fresh.self_object = old.self_object;
    fresh.function = old.function;
    fresh.return_mode = old.return_mode;
    fresh.convert_result_to = old.convert_result_to;

    if (new_source && old.function) {
        auto& fn = std::get<FunctionObject>(runtime.objects().at(old.function->lang, old.function->handle));
        fn.code = code;
    }
    frames.resize(index);
    frames.push_back(std::move(fresh));
}

Value run_to_completion(ExecutionContext& context, FrameStack& frames, std::uint64_t limit) {
    std::uint64_t total = 0;
    while (true) {
        auto result = step(context, frames, limit - total);
        total += result.executed;
        if (auto* done = std::get_if<Completed>(&result.outcome)) return done->value;
        if (auto* trapped = std::get_if<Trapped>(&result.outcome)) throw EvaluationError(trapped->exception);
        if (auto* failed = std::get_if<Failed>(&result.outcome)) throw EvaluationError(failed->exception);
        if (std::holds_alternative<Yielded>(result.outcome) && total >= limit) {
            throw EvaluationError(ExceptionValue{"EvaluationLimit", "instruction limit exceeded", std::nullopt});
        }
    }
}

Value evaluate_in_frame(ExecutionContext& context, const FrameStack& frames, std::size_t index,
                        std::string_view source) {
    if (index >= frames.size()) throw BadIndex(index);
    const Frame& target = frames[index];
    CompileOptions options;
    for (const auto& [name, value] : target.locals->entries()) options.predeclared.push_back(name);
    options.methods = target.self_object.has_value();
    auto code = context.runtime.plugin(target.language).compile(source, target.language, options);

    Frame scratch;
    scratch.code = std::move(code);
    scratch.language = target.language;
    scratch.locals = target.locals;
    scratch.globals = target.globals;
    scratch.self_object = target.self_object;
    FrameStack stack;
    stack.push_back(std::move(scratch));
    return run_to_completion(context, stack, kEvaluationLimit);
}

std::string snapshot(const FrameStack& frames) {
    std::ostringstream out;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const auto& f = frames[i];
        out << "frame " << i << " " << f.code->name << "@" << static_cast<const void*>(f.code.get()) << " ip=" << f.ip
            << " lang=" << f.language.index << " mode=" << static_cast<int>(f.return_mode);
        if (f.convert_result_to) out << " convert=" << f.convert_result_to->index;
        if (f.function) out << " fn=" << f.function->lang.index << ":" << f.function->handle;
        if (f.self_object) out << " self=" << debug_string(*f.self_object);
        out << "\n  locals@" << static_cast<const void*>(f.locals.get()) << ":";
        for (const auto& [name, value] : f.locals->entries()) out << " " << name << "=" << debug_string(value);
        out << "\n  stack:";
        for (const auto& v : f.stack) out << " " << debug_string(v);
        out << "\n  handlers:";
        for (const auto& h : f.handlers) {
            out << " (" << h.handler_ip << "," << h.class_name.value_or("*") << "," << static_cast<int>(h.kind) << ","
                << h.stack_depth << ")";
        }
        out << "\n  args:";
        for (const auto& [name, value] : f.arguments) out << " " << name << "=" << debug_string(value);
        out << "\n";
    }
    return out.str();
}

}  // namespace polyvm::kernel

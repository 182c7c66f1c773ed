#include "polyvm/bridge/bridge.hpp"

#include <regex>

#include "polyvm/frontend/support.hpp"
#include "polyvm/kernel/introspection.hpp"

namespace polyvm::bridge {

void install(Runtime& runtime) { runtime.add_shared_builtin(frontend::builtin("xeval", xeval)); }

kernel::BuiltinResult xeval(kernel::BuiltinCall& call) {
    auto& rt = call.context.runtime;
    const auto& plugin = rt.plugin(call.caller);
    if (auto err = frontend::check_arity(plugin, "xeval", call, 2, 3)) return *err;
    if (!call.args[0].is_text() || !call.args[1].is_text()) {
        return plugin.error(ErrorKind::ValueError, {"xeval expects a language name and source text"});
    }
    const auto target = rt.find_language(call.args[0].as_text());
    if (!target) return plugin.error(ErrorKind::ValueError, {"unknown language '" + call.args[0].as_text() + "'"});

    const Value argument = call.args.size() > 2 ? rt.convert(call.args[2], call.caller, *target) : Value::nil();
    CompileOptions options;
    options.predeclared.emplace_back(kArgumentName);
    kernel::CodePtr code;
    try {
        code = rt.plugin(*target).compile(call.args[1].as_text(), *target, options);
    } catch (const CompileError& e) {
        return ExceptionValue{std::string(kForeignCompileError), e.what(), std::nullopt};
    }
    auto frame = kernel::make_frame(std::move(code), {{std::string(kArgumentName), argument}});
    frame.convert_result_to = call.caller;
    return frame;
}

namespace {

struct PolicyScope {
    PolicyScope(Runtime& rt, const ConversionPolicy& policy) : rt(rt), saved(rt.policy()) { rt.set_policy(policy); }
    ~PolicyScope() { rt.set_policy(saved); }
    Runtime& rt;
    ConversionPolicy saved;
};

}  // namespace

Value cross_invoke(Runtime& runtime, std::string& transcript, const Value& target, std::string_view selector,
                   std::span<const Value> args, LangId caller, const ConversionPolicy& policy) {
    auto [owner, handle] = runtime.resolve(target);
    if (!runtime.objects().heap(owner).valid(handle)) throw StaleHandle();
    if (const auto* inst = std::get_if<InstanceObject>(&runtime.objects().at(owner, handle))) {
        const auto& cls = std::get<ClassObject>(runtime.objects().at(owner, inst->class_handle));
        if (!cls.members.contains(selector) && !inst->slots.contains(selector)) {
            throw NoSuchMethod(std::string(selector));
        }
    }

    PolicyScope scope(runtime, policy);
    kernel::ExecutionContext ctx{runtime, transcript};
    kernel::FrameStack none;
    auto result = kernel::invoke_method(ctx, none, target, selector, args, caller);
    if (auto* v = std::get_if<Value>(&result)) return std::move(*v);
    if (auto* e = std::get_if<ExceptionValue>(&result)) throw EvaluationError(std::move(*e));
    if (auto* frame = std::get_if<kernel::Frame>(&result)) {
        kernel::FrameStack stack;
        stack.push_back(std::move(*frame));
        return kernel::run_to_completion(ctx, stack, kernel::kEvaluationLimit);
    }
    return Value::nil();
}

std::vector<PipelineCell> parse_pipeline(std::string_view text) {
    static const std::regex separator(R"(^---(\s+(\S+))?\s*$)");
    std::vector<PipelineCell> cells;
    std::size_t pos = 0;
    int line = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        if (pos == nl && nl == text.size() && pos > 0) break;
        std::string current(text.substr(pos, nl - pos));
        if (!current.empty() && current.back() == '\r') current.pop_back();
        ++line;
        std::smatch m;
        if (std::regex_match(current, m, separator)) {
            if (!m[2].matched) throw PipelineFormatError(line, "separator without a language");
            cells.push_back(PipelineCell{m[2].str(), ""});
        } else if (!cells.empty()) {
            cells.back().source += current;
            cells.back().source += '\n';
        }
        if (nl == text.size()) break;
        pos = nl + 1;
    }
    if (cells.empty()) throw PipelineFormatError(line, "no '--- <language>' separator found");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].source.find_first_not_of(" \t\r\n") == std::string::npos) {
            throw PipelineFormatError(line, "cell " + std::to_string(i + 1) + " is empty");
        }
    }
    return cells;
}

}  // namespace polyvm::bridge

#include "polyvm/service/protocol.hpp"

namespace polyvm::service {

namespace {

const json& require(const json& params, const char* name) {
    if (!params.contains(name)) throw BadParams(std::string("missing parameter '") + name + "'");
    return params[name];
}

std::string text_param(const json& params, const char* name) {
    const auto& v = require(params, name);
    if (!v.is_string()) throw BadParams(std::string("parameter '") + name + "' must be a string");
    return v.get<std::string>();
}

std::uint64_t uint_param(const json& params, const char* name) {
    const auto& v = require(params, name);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw BadParams(std::string("parameter '") + name + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
}

bool known_code(std::string_view code) {
    for (std::string_view c : {"unknown_op", "bad_params", "unknown_language", "compile_error", "stale_handle",
                               "session_closed", "not_runnable"}) {
        if (c == code) return true;
    }
    return false;
}

}  // namespace

Protocol::Protocol(vm::Vm& vm, Push sink) : vm_(vm), push_(std::move(sink)), sessions_(vm) {
    sessions_.on_session = [this](const debug::DebugSession& s) {
        push(json{{"event", "trap"}, {"session", encode_session(s)}});
    };
    listener_ = vm_.subscribe([this](const vm::VmEvent& event) {
        if (const auto* f = std::get_if<vm::Finished>(&event)) finished(*f);
    });
}

Protocol::~Protocol() { vm_.unsubscribe(listener_); }

void Protocol::push(json event) {
    event["id"] = 0;
    if (push_) push_(event);
}

json Protocol::error_reply(std::int64_t id, std::string_view code, std::string_view message) {
    return json{{"id", id}, {"error", {{"code", code}, {"message", message}}}};
}

json Protocol::handle_text(std::string_view text) {
    json request;
    try {
        request = json::parse(text);
    } catch (const json::exception& e) {
        return error_reply(0, "bad_params", std::string("malformed JSON: ") + e.what());
    }
    return handle(request);
}

json Protocol::handle(const json& request) {
    std::int64_t id = 0;
    if (!request.is_object()) return error_reply(0, "bad_params", "a message must be a JSON object");
    if (!request.contains("id") || !request["id"].is_number_integer() || request["id"].get<std::int64_t>() <= 0) {
        return error_reply(0, "bad_params", "a request needs a positive integer id");
    }
    id = request["id"].get<std::int64_t>();
    if (!request.contains("op") || !request["op"].is_string()) return error_reply(id, "bad_params", "missing op");
    json params = request.contains("params") ? request["params"] : json::object();
    if (!params.is_object()) return error_reply(id, "bad_params", "params must be an object");
    try {
        return json{{"id", id}, {"result", dispatch(request["op"].get<std::string>(), params)}};
    } catch (const VmError& e) {
        return error_reply(id, known_code(e.code()) ? e.code() : "bad_params", e.what());
    } catch (const json::exception& e) {
        return error_reply(id, "bad_params", e.what());
    }
}

json Protocol::dispatch(const std::string& op, const json& params) {
    if (op == "hello") return hello();
    if (op == "eval") return eval(params);
    if (op == "inspect") return inspect(params);
    if (op == "inspect_eval") return inspect_eval(params);
    if (op == "processes") return processes();
    if (op == "interrupt") return interrupt(params);
    if (op == "stack") return stack(params);
    if (op == "frame") return frame(params);
    if (op == "eval_in_frame") return eval_in_frame(params);
    if (op == "restart_frame") return restart_frame(params);
    if (op == "proceed") return proceed(params);
    if (op == "step_over") return step_over(params);
    if (op == "set_budget") return set_budget(params);
    if (op == "highlight") return highlight(params);
    if (op == "pipeline") return pipeline(params);
    throw UnknownOp(op);
}

json Protocol::hello() {
    json languages = json::array();
    for (const auto& d : vm_.runtime().descriptors()) {
        languages.push_back(json{{"id", d.id}, {"name", d.display_name}, {"extension", d.file_extension}});
    }
    return json{{"version", kProtocolVersion}, {"languages", std::move(languages)}, {"budget", vm_.budget()}};
}

json Protocol::eval(const json& params) {
    const auto language = text_param(params, "language");
    const auto source = text_param(params, "source");
    std::string mode = params.contains("mode") ? text_param(params, "mode") : "doIt";
    if (mode != "doIt" && mode != "printIt") throw BadParams("mode must be doIt or printIt");
    const auto pid = vm_.spawn(language, source);
    evals_[pid] = mode;
    return json{{"pid", pid}};
}

void Protocol::finished(const vm::Finished& event) {
    auto it = evals_.find(event.pid);
    if (it == evals_.end()) return;
    const auto mode = it->second;
    evals_.erase(it);
    const auto& p = vm_.process(event.pid);
    json out{{"event", "completed"}, {"pid", event.pid}, {"output", p.transcript}};
    if (event.result.exception) {
        out["exception"] = encode_exception(*event.result.exception);
    } else {
        out["value"] = encode_value(vm_.runtime(), event.result.value);
        if (mode == "printIt") out["display"] = vm_.runtime().mop_display(event.result.value, p.language);
    }
    push(std::move(out));
}

LangId Protocol::viewer_for(const Value& value, const json& params) const {
    if (params.contains("language")) return vm_.runtime().language(text_param(params, "language"));
    if (value.is_ref()) return vm_.runtime().resolve(value).first;
    return vm_.runtime().languages().front();
}

json Protocol::inspect(const json& params) {
    const auto value = decode_value(vm_.runtime(), require(params, "value_ref"));
    return encode_inspect(vm_.runtime(), debug::inspect_value(vm_.runtime(), value, viewer_for(value, params)));
}

json Protocol::inspect_eval(const json& params) {
    auto& rt = vm_.runtime();
    const auto value = decode_value(rt, require(params, "value_ref"));
    const auto source = text_param(params, "source");
    const auto lang = viewer_for(value, params);
    CompileOptions options;
    options.predeclared.emplace_back(bridge::kArgumentName);
    auto code = rt.plugin(lang).compile(source, lang, options);
    kernel::FrameStack frames;
    frames.push_back(kernel::make_frame(std::move(code), {{std::string(bridge::kArgumentName), value}}));
    std::string transcript;
    kernel::ExecutionContext ctx{rt, transcript, vm_.now()};
    json out;
    try {
        auto result = kernel::run_to_completion(ctx, frames, kernel::kEvaluationLimit);
        out["display"] = rt.mop_display(result, lang);
        out["value"] = encode_value(rt, result);
    } catch (const EvaluationError& e) {
        out["error"] = encode_exception(e.exception());
    }
    out["output"] = transcript;
    out["refreshed"] = encode_inspect(rt, debug::inspect_value(rt, value, lang));
    return out;
}

json Protocol::processes() {
    json out = json::array();
    for (auto pid : vm_.pids()) {
        const auto& p = vm_.process(pid);
        json entry{{"pid", pid},
                   {"language", vm_.runtime().language_name(p.language)},
                   {"state", vm::state_name(p.state)},
                   {"consumed", p.consumed}};
        if (p.state != vm::State::Terminated) entry["current_line"] = p.current_line();
        if (auto s = sessions_.session_for(pid)) entry["session"] = *s;
        out.push_back(std::move(entry));
    }
    return out;
}

json Protocol::interrupt(const json& params) {
    vm_.interrupt(uint_param(params, "pid"));
    return json::object();
}

json Protocol::stack(const json& params) { return encode_stack(sessions_.stack(uint_param(params, "session"))); }

json Protocol::frame(const json& params) {
    const auto index = uint_param(params, "index");
    return encode_frame(vm_.runtime(), sessions_.frame(uint_param(params, "session"), index), index);
}

json Protocol::eval_in_frame(const json& params) {
    const auto id = uint_param(params, "session");
    const auto index = uint_param(params, "index");
    const auto source = text_param(params, "source");
    const auto view = sessions_.frame(id, index);
    try {
        auto value = sessions_.eval_in_frame(id, index, source);
        return json{{"display", vm_.runtime().mop_display(value, view.language)},
                    {"value", encode_value(vm_.runtime(), value)}};
    } catch (const EvaluationError& e) {
        return json{{"error", encode_exception(e.exception())}};
    }
}

json Protocol::restart_frame(const json& params) {
    std::optional<std::string> source;
    if (params.contains("source") && !params["source"].is_null()) source = text_param(params, "source");
    return json{{"stack", encode_stack(sessions_.restart(uint_param(params, "session"), uint_param(params, "index"),
                                                          source))}};
}

json Protocol::proceed(const json& params) {
    const auto id = uint_param(params, "session");
    const auto pid = sessions_.session(id).event.pid;
    auto outcome = sessions_.proceed(id);
    if (!outcome.termination) return json::object();
    const auto& p = vm_.process(pid);
    json out{{"result_display", vm_.runtime().mop_display(outcome.termination->value, p.language)}};
    if (outcome.termination->exception) out["exception"] = encode_exception(*outcome.termination->exception);
    return out;
}

json Protocol::step_over(const json& params) {
    const auto id = uint_param(params, "session");
    auto stack = sessions_.step_over(id);
    const auto& s = sessions_.session(id);
    return json{{"stack", encode_stack(stack)}, {"selected_frame", s.selected_frame}, {"open", s.open}};
}

json Protocol::set_budget(const json& params) {
    const auto& q = require(params, "quantum");
    if (!q.is_number_integer()) throw BadParams("quantum must be an integer");
    return json{{"previous", vm_.set_budget(q.get<std::int64_t>())}};
}

json Protocol::highlight(const json& params) {
    const auto lang = vm_.runtime().language(text_param(params, "language"));
    const auto source = text_param(params, "source");
    json out = json::array();
    for (const auto& t : vm_.runtime().plugin(lang).tokenize(source)) {
        if (t.synthetic()) continue;
        out.push_back(json{{"kind", token_kind_name(t.kind)}, {"line", t.line}, {"start", t.start}, {"end", t.end}});
    }
    return out;
}

json Protocol::pipeline(const json& params) {
    const auto& cells_json = require(params, "cells");
    if (!cells_json.is_array() || cells_json.empty()) throw BadParams("cells must be a non-empty array");
    std::vector<bridge::PipelineCell> cells;
    for (const auto& c : cells_json) {
        if (!c.is_object()) throw BadParams("each cell needs a language and a source");
        cells.push_back(bridge::PipelineCell{text_param(c, "language"), text_param(c, "source")});
    }
    Value initial = params.contains("initial") ? decode_value(vm_.runtime(), params["initial"]) : Value::nil();
    auto run = std::make_unique<bridge::Pipeline>(vm_, std::move(cells), std::move(initial), vm_.runtime().policy());
    auto* raw = run.get();
    raw->on_cell = [this](const bridge::CellResult& cell) {
        push(json{{"event", "cell"},
                  {"index", cell.index},
                  {"pid", cell.pid},
                  {"display", cell.display},
                  {"output", vm_.process(cell.pid).transcript}});
    };
    raw->on_done = [this, raw](const bridge::PipelineResult& result) {
        json out{{"event", "completed"}, {"pipeline", true}, {"pid", *raw->current_pid()}};
        const auto lang = vm_.process(*raw->current_pid()).language;
        if (result.failure) {
            out["exception"] = encode_exception(*result.failure);
            out["cell"] = *result.failed_cell;
        } else {
            out["value"] = encode_value(vm_.runtime(), result.final);
            out["display"] = vm_.runtime().mop_display(result.final, lang);
        }
        push(std::move(out));
    };
    const auto pid = raw->start();
    pipelines_.push_back(std::move(run));
    return json{{"pid", pid}};
}

}  // namespace polyvm::service

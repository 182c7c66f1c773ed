#include "polyvm/cli/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "polyvm/bridge/pipeline.hpp"
#include "polyvm/debug/session.hpp"
#include "polyvm/service/server.hpp"

namespace polyvm::cli {

namespace {

constexpr std::string_view kUsageLine =
    "usage: polyvm [--budget N] [--lang L] [--no-auto-convert] (run FILE | pipeline FILE | serve [--port P] | repl)";

std::optional<std::string> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void apply(vm::Vm& machine, const CliConfig& config) {
    auto policy = machine.runtime().policy();
    policy.auto_convert = config.auto_convert;
    machine.runtime().set_policy(policy);
}

/// Drives `pid` to termination, proceeding past every trap. Returns the
/// stack of the first exception trap.
std::optional<vm::DebugEvent> settle_headless(vm::Vm& machine, vm::Pid pid) {
    std::optional<vm::DebugEvent> first;
    while (true) {
        auto state = machine.run_until_settled(pid);
        if (state == vm::State::Terminated) return first;
        auto& p = machine.process(pid);
        if (state != vm::State::Suspended || !p.event) throw InternalFault("process neither suspended nor done");
        if (p.event->exception) {
            if (!first) first = *p.event;
            machine.unwind(pid);
        } else {
            machine.resume(pid);
        }
    }
}

int report_failure(const vm::Termination& result, const std::optional<vm::DebugEvent>& trap, std::ostream& err) {
    err << "UNHANDLED " << result.exception->title() << "\n";
    if (trap) err << format_stack(trap->stack);
    return kGuestError;
}

}  // namespace

std::string format_stack(const std::vector<kernel::FrameView>& stack) {
    std::ostringstream out;
    for (const auto& f : stack) {
        out << "  at " << f.display_name << " [" << f.language_name << "] line " << f.line << "\n";
    }
    return out.str();
}

int run_source(std::string_view language, std::string_view source, const CliConfig& config, std::ostream& out,
               std::ostream& err) {
    vm::Vm machine(config.budget);
    apply(machine, config);
    vm::Pid pid = 0;
    try {
        pid = machine.spawn(language, source);
    } catch (const CompileError& e) {
        err << "error: " << e.what() << "\n";
        return kGuestError;
    }
    auto trap = settle_headless(machine, pid);
    const auto& p = machine.process(pid);
    out << p.transcript;
    out.flush();
    if (p.result->failed()) return report_failure(*p.result, trap, err);
    return kOk;
}

int run_file(const std::string& path, const CliConfig& config, std::ostream& out, std::ostream& err) {
    auto source = read_file(path);
    if (!source) {
        err << "error: cannot read " << path << "\n";
        return kUsage;
    }
    std::string language;
    if (config.language) {
        language = *config.language;
    } else {
        vm::Vm probe(1);
        const auto dot = path.rfind('.');
        std::optional<LangId> lang;
        if (dot != std::string::npos) lang = probe.runtime().language_for_extension(path.substr(dot));
        if (!lang) {
            err << "error: cannot tell the language of " << path << "; pass --lang\n" << kUsageLine << "\n";
            return kUsage;
        }
        language = probe.runtime().language_name(*lang);
    }
    try {
        return run_source(language, *source, config, out, err);
    } catch (const UnknownLanguage& e) {
        err << "error: " << e.what() << "\n" << kUsageLine << "\n";
        return kUsage;
    }
}

int run_pipeline_text(std::string_view text, const CliConfig& config, std::ostream& out, std::ostream& err) {
    std::vector<bridge::PipelineCell> cells;
    try {
        cells = bridge::parse_pipeline(text);
    } catch (const bridge::PipelineFormatError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
    vm::Vm machine(config.budget);
    apply(machine, config);
    std::unique_ptr<bridge::Pipeline> pipeline;
    try {
        pipeline = std::make_unique<bridge::Pipeline>(machine, cells, Value::nil(), machine.runtime().policy());
    } catch (const UnknownLanguage& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const CompileError& e) {
        err << "error: " << e.what() << "\n";
        return kGuestError;
    }
    pipeline->on_cell = [&](const bridge::CellResult& cell) {
        out << machine.process(cell.pid).transcript;
        out << "cell " << cell.index + 1 << ": " << cell.display << "\n";
    };
    std::optional<vm::DebugEvent> trap;
    pipeline->start();
    while (!pipeline->done()) {
        const auto pid = *pipeline->current_pid();
        auto first = settle_headless(machine, pid);
        if (!trap) trap = first;
    }
    const auto& result = pipeline->result();
    if (result.failure) {
        out << machine.process(*pipeline->current_pid()).transcript;
        return report_failure(vm::Termination{result.final, result.failure}, trap, err);
    }
    const auto last = machine.runtime().language(cells.back().language);
    out << machine.runtime().mop_display(result.final, last) << "\n";
    return kOk;
}

int run_pipeline_file(const std::string& path, const CliConfig& config, std::ostream& out, std::ostream& err) {
    auto text = read_file(path);
    if (!text) {
        err << "error: cannot read " << path << "\n";
        return kUsage;
    }
    return run_pipeline_text(*text, config, out, err);
}

Repl::Repl(std::string_view language, const CliConfig& config)
    : vm_(config.budget), scope_(std::make_shared<NameTable>()) {
    apply(vm_, config);
    lang_ = vm_.runtime().language(language);
}

const std::string& Repl::language() const { return vm_.runtime().language_name(lang_); }

std::string Repl::switch_language(std::string_view id) {
    const auto target = vm_.runtime().language(id);
    auto converted = std::make_shared<NameTable>();
    for (const auto& [name, value] : scope_->entries()) {
        converted->set(name, vm_.runtime().convert(value, lang_, target));
    }
    scope_ = std::move(converted);
    lang_ = target;
    return "language: " + language() + "\n";
}

std::string Repl::inspect(std::string_view name) {
    const auto* value = scope_->find(name);
    if (!value) return "no binding named '" + std::string(name) + "'\n";
    auto view = debug::inspect_value(vm_.runtime(), *value, lang_);
    std::ostringstream out;
    out << view.class_name << ": " << view.display << "\n";
    for (const auto& [slot, v] : view.slots) out << "  " << slot << " = " << vm_.runtime().mop_display(v, lang_) << "\n";
    return out.str();
}

std::string Repl::submit(std::string_view input) {
    auto trimmed = input;
    while (!trimmed.empty() && (trimmed.back() == '\n' || trimmed.back() == ' ')) trimmed.remove_suffix(1);
    try {
        if (trimmed.starts_with(":lang ")) return switch_language(trimmed.substr(6));
        if (trimmed.starts_with(":inspect ")) return inspect(trimmed.substr(9));
        if (trimmed.starts_with(":")) return "commands: :lang <id>, :inspect <name>\n";

        CompileOptions options;
        for (const auto& [name, value] : scope_->entries()) options.predeclared.push_back(name);
        auto code = vm_.runtime().plugin(lang_).compile(input, lang_, options);
        auto frame = kernel::make_frame(std::move(code), {});
        frame.locals = scope_;
        frame.globals = scope_;
        const auto pid = vm_.spawn_frame(std::move(frame));
        settle_headless(vm_, pid);
        const auto& p = vm_.process(pid);
        std::string out = p.transcript;
        if (p.result->failed()) return out + p.result->exception->title() + "\n";
        if (!p.result->value.is_nil()) out += vm_.runtime().mop_display(p.result->value, lang_) + "\n";
        return out;
    } catch (const VmError& e) {
        return std::string("error: ") + e.what() + "\n";
    }
}

namespace {

bool opens_block(std::string_view language, std::string_view line) {
    while (!line.empty() && (line.back() == ' ' || line.back() == '\r')) line.remove_suffix(1);
    if (language == "minipy") return line.ends_with(":");
    auto start = line.find_first_not_of(" \t");
    if (start == std::string_view::npos) return false;
    line = line.substr(start);
    for (std::string_view kw : {"def ", "class ", "if ", "while ", "for ", "begin"}) {
        if (line.starts_with(kw) && !line.ends_with(" end") && line != "begin end") return true;
    }
    return false;
}

}  // namespace

void repl_loop(Repl& repl, std::istream& in, std::ostream& out, bool prompt) {
    std::string line;
    while (true) {
        if (prompt) out << repl.language() << "> " << std::flush;
        if (!std::getline(in, line)) break;
        std::string submission = line + "\n";
        if (opens_block(repl.language(), line)) {
            while (true) {
                if (prompt) out << "... " << std::flush;
                if (!std::getline(in, line) || line.find_first_not_of(" \t\r") == std::string::npos) break;
                submission += line + "\n";
            }
        }
        out << repl.submit(submission) << std::flush;
    }
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-language VM with live debugging", "polyvm"};
    app.require_subcommand(1);
    app.fallthrough();

    CliConfig config;
    std::int64_t budget = static_cast<std::int64_t>(vm::kDefaultQuantum);
    std::string language;
    bool no_auto_convert = false;
    std::uint16_t port = 8080;
    auto* budget_option = app.add_option("--budget", budget, "instructions per scheduling quantum (env POLYVM_BUDGET)");
    budget_option->check(CLI::Range(std::int64_t{1}, std::numeric_limits<std::int64_t>::max()));
    app.add_option("--lang", language, "language id (minipy, minirb)");
    app.add_flag("--no-auto-convert", no_auto_convert, "pass boundary values as foreign references");

    std::string path;
    auto* run = app.add_subcommand("run", "run a guest source file");
    run->add_option("file", path)->required();
    auto* pipeline = app.add_subcommand("pipeline", "run a pipeline file");
    pipeline->add_option("file", path)->required();
    auto* serve = app.add_subcommand("serve", "start the protocol server");
    serve->add_option("--port", port, "TCP port");
    serve->add_option("--static", config.static_dir, "directory served at HTTP /");
    auto* repl = app.add_subcommand("repl", "interactive evaluation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << kUsageLine << "\n";
        return kUsage;
    }

    if (budget_option->count() == 0) {
        if (const char* env = std::getenv("POLYVM_BUDGET"); env && *env) {
            std::string_view text(env);
            auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), budget);
            if (ec != std::errc() || end != text.data() + text.size() || budget < 1) {
                err << "error: POLYVM_BUDGET must be a positive integer\n" << kUsageLine << "\n";
                return kUsage;
            }
        }
    }
    config.budget = static_cast<std::uint64_t>(budget);
    config.auto_convert = !no_auto_convert;
    if (!language.empty()) config.language = language;

    try {
        if (run->parsed()) return run_file(path, config, out, err);
        if (pipeline->parsed()) return run_pipeline_file(path, config, out, err);
        if (serve->parsed()) {
            config.port = port;
            service::ServerOptions options;
            options.port = port;
            options.static_dir = config.static_dir;
            options.budget = config.budget;
            options.auto_convert = config.auto_convert;
            service::Server server(options);
            server.start();
            out << "listening on port " << server.port() << "\n" << std::flush;
            server.wait();
            return kOk;
        }
        if (repl->parsed()) {
            Repl session(config.language.value_or("minipy"), config);
            repl_loop(session, std::cin, out, true);
            return kOk;
        }
    } catch (const UnknownLanguage& e) {
        err << "error: " << e.what() << "\n" << kUsageLine << "\n";
        return kUsage;
    } catch (const VmError& e) {
        err << "error: " << e.what() << "\n";
        return kGuestError;
    }
    err << kUsageLine << "\n";
    return kUsage;
}

}  // namespace polyvm::cli

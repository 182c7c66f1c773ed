#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "polyvm/vm/vm.hpp"

namespace polyvm::cli {

struct CliConfig {
    std::uint64_t budget = vm::kDefaultQuantum;
    std::optional<std::uint16_t> port;
    std::optional<std::string> language;
    bool auto_convert = true;
    /// Directory served over HTTP "/" by `serve`; empty means the built-in page.
    std::string static_dir;
};

enum ExitStatus : int { kOk = 0, kGuestError = 1, kUsage = 2 };

/// Runs a source to termination headless. Traps auto-proceed.
int run_source(std::string_view language, std::string_view source, const CliConfig& config, std::ostream& out,
               std::ostream& err);
int run_file(const std::string& path, const CliConfig& config, std::ostream& out, std::ostream& err);
int run_pipeline_text(std::string_view text, const CliConfig& config, std::ostream& out, std::ostream& err);
int run_pipeline_file(const std::string& path, const CliConfig& config, std::ostream& out, std::ostream& err);

/// Plain-text stack, top frame first.
std::string format_stack(const std::vector<kernel::FrameView>& stack);

/// Interactive evaluation against a persistent root scope.
class Repl {
public:
    Repl(std::string_view language, const CliConfig& config);

    /// Evaluates one submission (printIt) or a `:inspect` / `:lang` command
    /// and returns what the REPL prints for it.
    std::string submit(std::string_view input);
    const std::string& language() const;

private:
    std::string switch_language(std::string_view id);
    std::string inspect(std::string_view name);

    vm::Vm vm_;
    LangId lang_;
    ScopePtr scope_;
};

/// Reads submissions from `in` until EOF. Block openers continue until a
/// blank line.
void repl_loop(Repl& repl, std::istream& in, std::ostream& out, bool prompt);

/// Entry point of the `polyvm` executable.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace polyvm::cli

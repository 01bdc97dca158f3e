#include "edaloop/adapters.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>

#include "edaloop/errors.hpp"
#include "edaloop/reports.hpp"
#include "edaloop/util.hpp"

namespace fs = std::filesystem;

namespace edaloop::adapters {

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out += c;
    }
    return out + "'";
}

namespace {

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
    for (std::size_t pos = 0; (pos = text.find(from, pos)) != std::string::npos; pos += to.size())
        text.replace(pos, from.size(), to);
    return text;
}

bool executable_exists(const std::string& program, const fs::path& cwd) {
    if (program.find('/') != std::string::npos) {
        fs::path p = program;
        if (p.is_relative()) p = cwd / p;
        return ::access(p.c_str(), X_OK) == 0;
    }
    static const char* builtins[] = {"cd", "exit", "echo", "test", "[", "true", "false", ":", "exec", "set", "."};
    for (const char* b : builtins)
        if (program == b) return true;
    const char* path = std::getenv("PATH");
    if (!path) return false;
    std::string_view rest = path;
    while (!rest.empty()) {
        auto colon = rest.find(':');
        auto dir = rest.substr(0, colon);
        if (!dir.empty() && ::access((fs::path(dir) / program).c_str(), X_OK) == 0) return true;
        if (colon == std::string_view::npos) break;
        rest.remove_prefix(colon + 1);
    }
    return false;
}

// First word of the command that is not an environment assignment.
std::string command_program(const std::string& command) {
    for (const auto& word : util::split_ws(command)) {
        if (word.find('=') != std::string::npos && word.front() != '=' && word.front() != '\'') continue;
        std::string w = word;
        if (w.size() >= 2 && (w.front() == '\'' || w.front() == '"') && w.back() == w.front())
            w = w.substr(1, w.size() - 2);
        return w;
    }
    return {};
}

struct Marker {
    Stage stage;
    bool pass;
    double at_s;
};

} // namespace

RunResult run_external(const AdapterSpec& spec, const fs::path& workspace, const std::string& script_name) {
    if (!spec.command_template) throw ConfigError("external adapter needs a command template");
    const std::string command = replace_all(replace_all(*spec.command_template, "{workspace}", shell_quote(workspace.string())),
                                            "{script}", shell_quote(script_name));
    const auto program = command_program(command);
    if (program.empty() || !executable_exists(program, workspace))
        throw ConfigError("tool executable '" + program + "' not found");

    int fds[2];
    if (::pipe(fds) != 0) throw ConfigError(std::string("pipe failed: ") + std::strerror(errno));
    const auto start = std::chrono::steady_clock::now();
    pid_t pid = ::fork();
    if (pid < 0) {
        ::close(fds[0]);
        ::close(fds[1]);
        throw ConfigError(std::string("fork failed: ") + std::strerror(errno));
    }
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(fds[1], STDOUT_FILENO);
        ::dup2(fds[1], STDERR_FILENO);
        ::close(fds[0]);
        ::close(fds[1]);
        int devnull = ::open("/dev/null", O_RDONLY);
        if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
        if (::chdir(workspace.c_str()) != 0) ::_exit(126);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::setpgid(pid, pid);
    ::close(fds[1]);

    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
    std::string output, pending;
    std::vector<Marker> markers;
    bool timed_out = false;
    auto scan_line = [&](const std::string& line) {
        auto t = util::trim(line);
        if (t.rfind("@@STAGE ", 0) != 0) return;
        auto words = util::split_ws(t);
        if (words.size() < 3) return;
        try {
            markers.push_back({stage_from_string(words[1]), words[2] == "PASS", elapsed()});
        } catch (const ConfigError&) {
        }
    };

    char buf[4096];
    for (;;) {
        int wait_ms = -1;
        if (spec.timeout_s) {
            double left = *spec.timeout_s - elapsed();
            if (left <= 0) {
                timed_out = true;
                break;
            }
            wait_ms = static_cast<int>(left * 1000.0) + 1;
        }
        pollfd p{fds[0], POLLIN, 0};
        int rc = ::poll(&p, 1, wait_ms);
        if (rc < 0 && errno == EINTR) continue;
        if (rc == 0) continue;
        ssize_t n = ::read(fds[0], buf, sizeof buf);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) break;
        output.append(buf, static_cast<std::size_t>(n));
        pending.append(buf, static_cast<std::size_t>(n));
        for (std::size_t nl; (nl = pending.find('\n')) != std::string::npos;) {
            scan_line(pending.substr(0, nl));
            pending.erase(0, nl + 1);
        }
    }
    if (!pending.empty()) scan_line(pending);
    if (timed_out) ::kill(-pid, SIGKILL);
    ::close(fds[0]);
    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    // Stray grandchildren still holding the group are no longer wanted.
    ::kill(-pid, SIGKILL);
    const bool exit_ok = !timed_out && WIFEXITED(status) && WEXITSTATUS(status) == 0;
    const double total = elapsed();

    RunResult r;
    r.log_text = output;
    if (timed_out) r.log_text += "\nERROR: [edaloop] timeout after " + util::shortest(*spec.timeout_s) + " s\n";
    const auto digest = reports::scan_log(output);

    bool failed = false;
    double last_t = 0.0;
    for (auto stage : spec.stages) {
        if (failed) {
            r.stage_outcomes.push_back({stage, StageStatus::skipped, 0.0, ""});
            continue;
        }
        auto m = std::find_if(markers.begin(), markers.end(), [&](const Marker& x) { return x.stage == stage; });
        if (m != markers.end()) {
            r.stage_outcomes.push_back({stage, m->pass ? StageStatus::pass : StageStatus::fail, m->at_s - last_t, ""});
            last_t = m->at_s;
            failed = !m->pass;
            continue;
        }
        std::string note;
        if (timed_out) note = "timeout";
        else if (!exit_ok) note = "exit status " + std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1);
        else if (digest.has_errors()) note = "error in log";
        bool ok = note.empty();
        r.stage_outcomes.push_back({stage, ok ? StageStatus::pass : StageStatus::fail, total - last_t, note});
        last_t = total;
        failed = !ok;
    }

    const auto reports_dir = workspace / "reports";
    if (fs::is_directory(reports_dir))
        for (const auto& e : fs::directory_iterator(reports_dir))
            if (e.is_regular_file()) r.report_files[e.path().filename().string()] = e.path().string();
    util::write_file(workspace / "run.log", r.log_text);
    return r;
}

} // namespace edaloop::adapters

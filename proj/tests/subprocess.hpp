#ifndef OPLANG_TESTS_SUBPROCESS_HPP
#define OPLANG_TESTS_SUBPROCESS_HPP

// Helpers for driving the installed CLI binary from tests.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

namespace testutil {

struct RunResult {
    int exit_code = -1;
    std::string output; // stdout + stderr interleaved
};

// Runs the CLI with the given argument string, capturing combined output.
inline RunResult run_cli(const std::string& args) {
    static std::atomic<int> counter{0};
    const std::filesystem::path log =
        std::filesystem::temp_directory_path() /
        ("oplang_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + ".log");
    const std::string cmd =
        std::string(OPLANG_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::ostringstream buf;
    buf << in.rdbuf();
    result.output = buf.str();
    std::filesystem::remove(log);
    return result;
}

// Fresh scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "scratch") {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("oplang_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }

    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }

    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string str(const std::string& sub = "") const {
        return sub.empty() ? path_.string() : (path_ / sub).string();
    }

private:
    std::filesystem::path path_;
};

} // namespace testutil

#endif

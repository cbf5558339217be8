#ifndef ARAUCANA_SUBPROCESS_HPP
#define ARAUCANA_SUBPROCESS_HPP

// External black box spoken to over line-delimited JSON on the child's
// stdin/stdout:
//   request  {"instances": [[v, ...], ...]}\n   numerics as numbers, categoricals as strings
//   response {"predictions": [p, ...]}\n        class strings, or numbers for regression
// The child persists across batches; one request is in flight at a time.

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "araucana/error.hpp"
#include "araucana/oracle.hpp"
#include "araucana/tabular.hpp"

namespace araucana {

class SubprocessOracle final : public PredictionOracle {
public:
    SubprocessOracle(SchemaPtr schema, std::string command, std::chrono::milliseconds timeout = std::chrono::seconds(30))
        : schema_(std::move(schema)), command_(std::move(command)), timeout_(timeout) {
        schema_->task();
        std::signal(SIGPIPE, SIG_IGN);
        int in_pipe[2], out_pipe[2];
        if (pipe(in_pipe) != 0) throw OracleError(std::string("pipe: ") + std::strerror(errno));
        if (pipe(out_pipe) != 0) {
            close(in_pipe[0]);
            close(in_pipe[1]);
            throw OracleError(std::string("pipe: ") + std::strerror(errno));
        }
        pid_ = fork();
        if (pid_ < 0) throw OracleError(std::string("fork: ") + std::strerror(errno));
        if (pid_ == 0) {
            dup2(in_pipe[0], STDIN_FILENO);
            dup2(out_pipe[1], STDOUT_FILENO);
            close(in_pipe[0]);
            close(in_pipe[1]);
            close(out_pipe[0]);
            close(out_pipe[1]);
            execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        close(in_pipe[0]);
        close(out_pipe[1]);
        to_child_ = in_pipe[1];
        from_child_ = out_pipe[0];
        fcntl(to_child_, F_SETFD, FD_CLOEXEC);
        fcntl(from_child_, F_SETFD, FD_CLOEXEC);
    }

    SubprocessOracle(const SubprocessOracle&) = delete;
    SubprocessOracle& operator=(const SubprocessOracle&) = delete;

    ~SubprocessOracle() override {
        if (to_child_ >= 0) close(to_child_);
        if (from_child_ >= 0) close(from_child_);
        if (pid_ > 0) {
            // Give the child a moment to exit on EOF, then make sure it is gone.
            for (int i = 0; i < 50; ++i) {
                if (waitpid(pid_, nullptr, WNOHANG) != 0) return;
                usleep(2000);
            }
            kill(pid_, SIGKILL);
            waitpid(pid_, nullptr, 0);
        }
    }

    std::vector<Label> predict_batch(std::span<const Instance> rows) const override {
        std::lock_guard lock(mutex_);
        if (broken_) throw OracleError("subprocess oracle is unusable after an earlier failure: " + broken_reason_);
        if (rows.empty()) return {};
        try {
            return exchange(rows);
        } catch (const OracleError& e) {
            broken_ = true;
            broken_reason_ = e.what();
            throw;
        }
    }

    const Schema& schema() const override { return *schema_; }
    std::string describe() const override { return "cmd:" + command_; }

private:
    std::vector<Label> exchange(std::span<const Instance> rows) const {
        json req;
        req["instances"] = json::array();
        for (const auto& r : rows) {
            validate_instance(*schema_, r);
            req["instances"].push_back(instance_to_json(*schema_, r));
        }
        write_all(req.dump() + "\n");
        const std::string line = read_line();
        json resp;
        try {
            resp = json::parse(line);
        } catch (const json::parse_error&) {
            throw OracleError("malformed response from child: " + line.substr(0, 200));
        }
        if (!resp.is_object() || !resp.contains("predictions") || !resp["predictions"].is_array())
            throw OracleError("response lacks a \"predictions\" array");
        const auto& preds = resp["predictions"];
        if (preds.size() != rows.size())
            throw OracleError("expected " + std::to_string(rows.size()) + " predictions, got " + std::to_string(preds.size()));
        std::vector<Label> out;
        out.reserve(rows.size());
        for (const auto& p : preds) {
            try {
                Label l = label_from_json(*schema_, p);
                if (!std::isfinite(l)) throw ValidationError("non-finite prediction");
                out.push_back(l);
            } catch (const ValidationError& e) {
                throw OracleError(std::string("invalid prediction: ") + e.what());
            }
        }
        return out;
    }

    std::string child_status() const {
        int status = 0;
        pid_t r = waitpid(pid_, &status, WNOHANG);
        if (r == pid_) {
            pid_ = -1;
            if (WIFEXITED(status)) return "child exited with status " + std::to_string(WEXITSTATUS(status));
            if (WIFSIGNALED(status)) return "child killed by signal " + std::to_string(WTERMSIG(status));
        }
        return "child closed its pipe";
    }

    void write_all(const std::string& data) const {
        std::size_t off = 0;
        while (off < data.size()) {
            ssize_t n = write(to_child_, data.data() + off, data.size() - off);
            if (n < 0) {
                if (errno == EINTR) continue;
                if (errno == EPIPE) {
                    usleep(10000);
                    throw OracleError(child_status());
                }
                throw OracleError(std::string("write to child failed: ") + std::strerror(errno));
            }
            off += static_cast<std::size_t>(n);
        }
    }

    std::string read_line() const {
        const auto deadline = std::chrono::steady_clock::now() + timeout_;
        for (;;) {
            auto nl = buffer_.find('\n');
            if (nl != std::string::npos) {
                std::string line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                return line;
            }
            auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
            if (left.count() <= 0)
                throw OracleError("timed out after " + std::to_string(timeout_.count()) + " ms waiting for the child");
            pollfd pfd{from_child_, POLLIN, 0};
            int rc = poll(&pfd, 1, static_cast<int>(left.count()));
            if (rc < 0) {
                if (errno == EINTR) continue;
                throw OracleError(std::string("poll failed: ") + std::strerror(errno));
            }
            if (rc == 0) continue;
            char chunk[4096];
            ssize_t n = read(from_child_, chunk, sizeof chunk);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw OracleError(std::string("read from child failed: ") + std::strerror(errno));
            }
            if (n == 0) {
                usleep(10000);
                throw OracleError("no response: " + child_status());
            }
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

    SchemaPtr schema_;
    std::string command_;
    std::chrono::milliseconds timeout_;
    mutable pid_t pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    mutable std::mutex mutex_;
    mutable std::string buffer_;
    mutable bool broken_ = false;
    mutable std::string broken_reason_;
};

}  // namespace araucana

#endif

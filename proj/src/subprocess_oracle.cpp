#include "conic/oracle_solver.hpp"

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

namespace conic {

SubprocessOracle::SubprocessOracle(const std::string& command, Index dim) : dim_(dim) {
  if (dim < 1) throw PreconditionError("SubprocessOracle: dimension must be positive");
  int down[2];  // parent writes, child reads
  int up[2];    // child writes, parent reads
  if (pipe(down) != 0) throw std::runtime_error("SubprocessOracle: pipe failed");
  if (pipe(up) != 0) {
    close(down[0]);
    close(down[1]);
    throw std::runtime_error("SubprocessOracle: pipe failed");
  }
  // A child that exits early must not kill the solver through SIGPIPE.
  std::signal(SIGPIPE, SIG_IGN);
  pid_ = fork();
  if (pid_ < 0) throw std::runtime_error("SubprocessOracle: fork failed");
  if (pid_ == 0) {
    dup2(down[0], STDIN_FILENO);
    dup2(up[1], STDOUT_FILENO);
    close(down[0]);
    close(down[1]);
    close(up[0]);
    close(up[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(down[0]);
  close(up[1]);
  to_child_ = fdopen(down[1], "w");
  from_child_ = fdopen(up[0], "r");
  if (!to_child_ || !from_child_) throw std::runtime_error("SubprocessOracle: fdopen failed");
}

SubprocessOracle::~SubprocessOracle() {
  if (to_child_) std::fclose(static_cast<FILE*>(to_child_));
  if (from_child_) std::fclose(static_cast<FILE*>(from_child_));
  if (pid_ > 0) {
    int status = 0;
    waitpid(pid_, &status, 0);
  }
}

std::optional<Vector> SubprocessOracle::query(const Vector& v) {
  if (v.size() != dim_) throw PreconditionError("SubprocessOracle: dimension mismatch");
  FILE* out = static_cast<FILE*>(to_child_);
  for (Index i = 0; i < v.size(); ++i) std::fprintf(out, i == 0 ? "%.17g" : " %.17g", v(i));
  std::fputc('\n', out);
  if (std::fflush(out) != 0) throw OracleFault("oracle process closed its input");

  char* line = nullptr;
  std::size_t cap = 0;
  const ssize_t got = getline(&line, &cap, static_cast<FILE*>(from_child_));
  std::string reply = got > 0 ? std::string(line, static_cast<std::size_t>(got)) : std::string();
  std::free(line);
  if (got <= 0) throw OracleFault("oracle process ended without replying");

  std::istringstream in(reply);
  std::string first;
  in >> first;
  if (first == "YES") return std::nullopt;
  Vector a(dim_);
  try {
    a(0) = std::stod(first);
    for (Index i = 1; i < dim_; ++i) {
      std::string tok;
      if (!(in >> tok)) throw OracleFault("oracle reply has too few numbers");
      a(i) = std::stod(tok);
    }
  } catch (const std::logic_error&) {
    throw OracleFault("oracle reply is not a number list: " + reply);
  }
  std::string extra;
  if (in >> extra) throw OracleFault("oracle reply has too many numbers");
  return a;
}

}  // namespace conic

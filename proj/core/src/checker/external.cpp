#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "encode.hpp"
#include "evolvegen/checker/checker.hpp"
#include "evolvegen/common/error.hpp"

namespace evolvegen::checker {

using detail::Clock;
using detail::seconds_since;

std::string grammar_name(ResultGrammar g) {
  switch (g) {
    case ResultGrammar::kCertificateLine: return "certificate-line";
    case ResultGrammar::kWitnessFile: return "witness-file";
    case ResultGrammar::kExitCode: return "exit-code";
  }
  return "certificate-line";
}

ResultGrammar parse_grammar(const std::string& name) {
  if (name == "certificate-line") return ResultGrammar::kCertificateLine;
  if (name == "witness-file") return ResultGrammar::kWitnessFile;
  if (name == "exit-code") return ResultGrammar::kExitCode;
  throw ConfigError("unknown result grammar '" + name + "'");
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
    s.replace(pos, from.size(), to);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

// certificate-line: the first line that is exactly 0, 1 or 2 (AIGER result
// convention: 0 safe, 1 unsafe, 2 unknown).
// witness-file: the first non-blank line is sat (unsafe), unsat (safe) or
// unknown, as in BTOR2 witnesses.
// exit-code: adapter.safe_exit / adapter.unsafe_exit; any other status is
// unknown.
Verdict parse_external_output(ResultGrammar grammar, const std::string& output, int exit_status,
                              const ExternalAdapter& adapter) {
  std::istringstream in(output);
  std::string line;
  switch (grammar) {
    case ResultGrammar::kCertificateLine:
      while (std::getline(in, line)) {
        line = trim(line);
        if (line == "0") return Verdict::kSafe;
        if (line == "1") return Verdict::kUnsafe;
        if (line == "2") return Verdict::kUnknown;
      }
      throw ParseError("no certificate line (0/1/2) in checker output");
    case ResultGrammar::kWitnessFile:
      while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        if (line == "sat") return Verdict::kUnsafe;
        if (line == "unsat") return Verdict::kSafe;
        if (line == "unknown") return Verdict::kUnknown;
        throw ParseError("unexpected witness header '" + line + "'");
      }
      throw ParseError("empty witness");
    case ResultGrammar::kExitCode:
      if (exit_status == adapter.safe_exit) return Verdict::kSafe;
      if (exit_status == adapter.unsafe_exit) return Verdict::kUnsafe;
      return Verdict::kUnknown;
  }
  throw ParseError("unknown grammar");
}

ExternalResult run_external(const ExternalAdapter& adapter, const std::string& problem_path, double timeout_s,
                            const std::string& log_path) {
  const std::string log = log_path.empty() ? "/tmp/evolvegen-" + std::to_string(::getpid()) + "-" +
                                                 std::to_string(Clock::now().time_since_epoch().count()) + ".log"
                                           : log_path;
  const std::string witness = log + ".witness";
  std::string cmd = adapter.command_template;
  const bool uses_witness = cmd.find("{witness}") != std::string::npos;
  replace_all(cmd, "{file}", shell_quote(problem_path));
  replace_all(cmd, "{timeout}", std::to_string(static_cast<long>(std::ceil(timeout_s))));
  replace_all(cmd, "{witness}", shell_quote(witness));

  int fds[2];
  if (::pipe(fds) != 0) throw SpawnError(std::string("pipe: ") + std::strerror(errno));
  const auto t0 = Clock::now();
  pid_t pid = ::fork();
  if (pid < 0) {
    ::close(fds[0]);
    ::close(fds[1]);
    throw SpawnError(std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(fds[1], STDOUT_FILENO);
    ::dup2(fds[1], STDERR_FILENO);
    ::close(fds[0]);
    ::close(fds[1]);
    ::execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(fds[1]);
  ::fcntl(fds[0], F_SETFL, O_NONBLOCK);

  ExternalResult res;
  bool timed_out = false, eof = false;
  char buf[4096];
  while (!eof) {
    double left = timeout_s - seconds_since(t0);
    if (left <= 0) {
      timed_out = true;
      break;
    }
    pollfd p{fds[0], POLLIN, 0};
    int rc = ::poll(&p, 1, static_cast<int>(std::min(left, 0.1) * 1000) + 1);
    if (rc < 0 && errno != EINTR) break;
    for (;;) {
      ssize_t n = ::read(fds[0], buf, sizeof buf);
      if (n > 0) {
        res.output.append(buf, static_cast<std::size_t>(n));
        continue;
      }
      if (n == 0) eof = true;
      break;
    }
  }
  ::close(fds[0]);
  int status = 0;
  // Output closed; the process may still be running.
  while (!timed_out) {
    pid_t w = ::waitpid(pid, &status, WNOHANG);
    if (w == pid || (w < 0 && errno != EINTR)) break;
    if (seconds_since(t0) >= timeout_s) {
      timed_out = true;
      break;
    }
    ::usleep(2000);
  }
  if (timed_out) {
    ::kill(-pid, SIGKILL);
    ::kill(pid, SIGKILL);
    ::waitpid(pid, &status, 0);
    res.verdict = Verdict::kUnknown;
    res.reason = "timeout";
    res.wall_time = timeout_s;
    std::ofstream(log, std::ios::binary) << res.output;
    return res;
  }
  res.wall_time = seconds_since(t0);
  res.exit_status = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  std::ofstream(log, std::ios::binary) << res.output;
  if (res.exit_status == 127 || res.exit_status == 126) {
    throw SpawnError("cannot execute '" + adapter.command_template + "' (status " +
                     std::to_string(res.exit_status) + "): " + trim(res.output));
  }
  std::string text = res.output;
  if (adapter.grammar == ResultGrammar::kWitnessFile && uses_witness) text = read_file(witness);
  try {
    res.verdict = parse_external_output(adapter.grammar, text, res.exit_status, adapter);
  } catch (const ParseError& e) {
    throw ParseError(std::string(e.what()) + "; raw output in " + log);
  }
  if (res.verdict == Verdict::kUnknown) res.reason = "checker";
  return res;
}

}  // namespace evolvegen::checker

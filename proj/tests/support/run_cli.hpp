#pragma once

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <string>

namespace testsupport {

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr
};

/// Runs the iamflood CLI with a shell-quoted argument string. stdin_text is a
/// printf format: write newlines as \n.
inline CliResult run_cli(const std::string& args, const std::string& stdin_text = "")
{
  std::string cmd = std::string("'") + IAMFLOOD_CLI + "' " + args + " 2>&1";
  if (!stdin_text.empty()) cmd = "printf '" + stdin_text + "' | " + cmd;
  CliResult r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.output.append(buf.data(), n);
  const int status = pclose(p);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

inline std::string quote(const std::string& s) { return "'" + s + "'"; }

} // namespace testsupport

// Runs every acceptance criterion at full scale and prints one line each.
#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>
#include <sys/wait.h>

#include "checks.h"

#ifndef PSEUDOVIEW_CLI
#error "PSEUDOVIEW_CLI must point at the pseudoview executable"
#endif

namespace {

pseudoview::checks::CheckResult selftest_check() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string cmd = std::string("\"") + PSEUDOVIEW_CLI + "\" selftest 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string output;
  int status = -1;
  if (pipe) {
    char buf[512];
    while (fgets(buf, sizeof buf, pipe)) output += buf;
    status = pclose(pipe);
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const int code = (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  int failed = 0;
  for (std::size_t p = output.find("FAIL"); p != std::string::npos; p = output.find("FAIL", p + 4)) {
    ++failed;
  }
  char detail[160];
  std::snprintf(detail, sizeof detail, "exit code %d, %d failing line(s), %.1f s (limit 180 s)",
                code, failed, secs);
  return {10, "selftest subprocess", code == 0 && secs <= 180.0, detail, secs};
}

}  // namespace

int main() {
  using namespace pseudoview::checks;
  bool ok = true;
  const auto print = [&](const CheckResult& r) {
    ok = ok && r.passed;
    std::cout << format_result(r) << std::endl;
  };
  run_all(Scale::kFull, print);
  print(selftest_check());
  std::cout << (ok ? "all acceptance criteria passed" : "acceptance FAILED") << std::endl;
  return ok ? 0 : 1;
}

// Minimal scorer for exercising the external-predictor protocol:
//   stub_predictor <p> <mode>
// Modes: constant (always 0.5), first (clamp feature 1 into [0,1]),
// garbage (non-numeric replies), die (exit mid-batch), hang (accept a
// batch, never answer), mute (never finish the handshake).

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <string>

namespace {

bool read_line(std::string& line) {
  if (!std::getline(std::cin, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::fprintf(stderr, "usage: %s <p> <mode>\n", argv[0]);
    return 2;
  }
  const long p = std::strtol(argv[1], nullptr, 10);
  const std::string mode = argv[2];

  std::string line;
  if (!read_line(line) || line != "HELLO glime-predictor 1") return 3;
  if (mode == "mute") {
    ::pause();
    return 0;
  }
  std::printf("READY %ld\n", p);
  std::fflush(stdout);

  while (read_line(line)) {
    if (line == "BYE") return 0;
    long m = 0;
    if (std::sscanf(line.c_str(), "SCORE %ld", &m) != 1 || m < 0) return 3;
    for (long r = 0; r < m; ++r) {
      std::string row;
      if (!read_line(row)) return 3;
      if (mode == "hang") continue;
      if (mode == "die" && r >= m / 2) return 1;
      if (mode == "garbage") {
        std::printf("banana\n");
      } else if (mode == "first") {
        const double v = std::strtod(row.c_str(), nullptr);
        std::printf("%.17g\n", v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v));
      } else {
        std::printf("0.5\n");
      }
      std::fflush(stdout);
    }
    if (mode == "hang") ::pause();
  }
  return 0;
}

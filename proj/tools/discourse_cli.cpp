#include <cstdio>

int main() {
  std::puts("discourse: pipeline CLI (subcommands land with the full build)");
  return 0;
}

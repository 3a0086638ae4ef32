// Placeholder; criteria are filled in as the modules land.
#include <cstdio>

int main() {
  std::puts("acceptance criteria not yet implemented");
  return 1;
}

// CLI entry point; commands are filled in as the library lands.
#include <iostream>

int main() {
  std::cout << "rsim: not yet wired up\n";
  return 2;
}

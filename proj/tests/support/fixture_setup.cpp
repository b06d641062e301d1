#include <iostream>

#include "support/fixtures.hpp"

int main() {
  try {
    const auto& t = uaplab::testkit::trained_catch_agent();
    std::cout << (t.from_cache ? "loaded" : "trained") << " catch agent: clean return "
              << t.agent.clean_return << ", " << t.seconds_to_train << " s to train\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "fixture setup failed: " << e.what() << '\n';
    return 1;
  }
}

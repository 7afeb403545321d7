#include <exception>
#include <iostream>

#include "spinswap/cli.hpp"

int main(int argc, char** argv) {
  try {
    const spinswap::RunConfig cfg = spinswap::parse_config(argc, argv);
    spinswap::run_command(cfg, std::cout);
    return 0;
  } catch (const spinswap::HelpRequested& help) {
    std::cout << help.what();
    return 0;
  } catch (const spinswap::ConfigError& e) {
    std::cerr << "spinswap: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "spinswap: " << e.what() << "\n";
    return 1;
  }
}

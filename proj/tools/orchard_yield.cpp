#include <string>
#include <vector>

#include "orchard/cli.hpp"

int main(int argc, char** argv) {
    return orchard::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}

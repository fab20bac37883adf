#include <string>
#include <vector>

#include "solid/cli.hpp"

int main(int argc, char** argv) {
    return solid::cli::dispatch(std::vector<std::string>(argv + 1, argv + argc));
}

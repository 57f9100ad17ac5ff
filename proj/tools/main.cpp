#include <string>
#include <vector>

#include "cellhom/cli.hpp"

int main(int argc, char** argv) {
    return cellhom::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}

#include "synthctl/cli.hpp"

int main(int argc, char** argv) {
    return synthctl::run_command(argc, argv);
}

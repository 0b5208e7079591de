#include "cli.hpp"

int main(int argc, char** argv) {
    return vra::cli::run(argc, argv);
}

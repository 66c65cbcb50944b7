#include "cli.hpp"

int main(int argc, char** argv) {
    return jackstraw::cli::run(argc, argv);
}

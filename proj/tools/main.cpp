#include "nmlqg/cli.hpp"

int main(int argc, char** argv) {
    return nmlqg::run(argc, argv);
}

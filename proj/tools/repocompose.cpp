#include "repocompose/cli.hpp"

int main(int argc, char** argv) {
    return repocompose::cli::run(argc, argv);
}

#include "politelens/cli.hpp"

int main(int argc, char** argv) {
    return politelens::cli::dispatch(argc, argv);
}

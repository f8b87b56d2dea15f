#include "kway/cli.hpp"

int main(int argc, char** argv) { return kway::cli::dispatch(argc, argv); }

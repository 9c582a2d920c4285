#include "qtsc/cli.hpp"

int main(int argc, char** argv) { return qtsc::cli::dispatch(argc, argv); }

#include "sentcast/cli.hpp"

int main(int argc, char** argv) { return sentcast::cli::run(argc, argv); }

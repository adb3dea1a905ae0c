#include "deltawedge/cli.hpp"

int main(int argc, char** argv) { return deltawedge::cli::run(argc, argv); }
